#include "semiscore/scorenet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semiscore/errors.hpp"
#include "semiscore/forward.hpp"
#include "semiscore/rng.hpp"

namespace semiscore {

namespace {

constexpr double kTanhCurvatureMax = 0.769800358919501;  // 4 / (3 sqrt 3)
constexpr std::uint64_t kReferenceSeed = 0x5EEDFACEull;

void check_features(const FeatureSet& fs) {
  if (fs.dim < 1) throw input_error("features: dim must be positive");
  if (!(fs.T > 0.0)) throw input_error("features: T must be positive");
  if (fs.cheb_degree < 0) throw input_error("features: negative degree");
  if (fs.w.rows() > 0 && fs.w.cols() != fs.dim) throw input_error("features: w shape mismatch");
  if (fs.b.size() != fs.w.rows()) throw input_error("features: b length mismatch");
  if (fs.units() == 0) throw input_error("features: empty unit set");
}

}  // namespace

FeatureSet FeatureSet::make(int dim, double T, int cheb_degree, int tanh_units, bool linear_units,
                            std::uint64_t seed, double w_scale, double b_scale) {
  FeatureSet fs;
  fs.dim = dim;
  fs.T = T;
  fs.cheb_degree = cheb_degree;
  fs.linear_units = linear_units;
  fs.w.resize(tanh_units, dim);
  fs.b.resize(tanh_units);
  CounterRng rng(seed, rng_stream(RngDomain::misc, 0));
  std::uint64_t ctr = 0;
  std::vector<double> z(dim);
  for (int u = 0; u < tanh_units; ++u) {
    ctr = rng.fill_normal(ctr, z.data(), dim);
    for (int k = 0; k < dim; ++k) fs.w(u, k) = w_scale * z[k];
    fs.b[u] = b_scale * (2.0 * rng.uniform(ctr++) - 1.0);
  }
  check_features(fs);
  return fs;
}

void FeatureSet::unit_values(const Eigen::VectorXd& x, Eigen::VectorXd& rho) const {
  const int nt = static_cast<int>(w.rows());
  rho.resize(units());
  for (int u = 0; u < nt; ++u) rho[u] = std::tanh(w.row(u).dot(x) + b[u]);
  if (linear_units)
    for (int k = 0; k < dim; ++k) rho[nt + k] = x[k];
}

void FeatureSet::time_basis(double t, Eigen::VectorXd& c) const {
  const double tau = std::clamp(2.0 * t / T - 1.0, -1.0, 1.0);
  c.resize(cheb_degree + 1);
  c[0] = 1.0;
  if (cheb_degree >= 1) c[1] = tau;
  for (int j = 2; j <= cheb_degree; ++j) c[j] = 2.0 * tau * c[j - 1] - c[j - 2];
}

void FeatureSet::features(double t, const Eigen::VectorXd& x, Eigen::VectorXd& phi) const {
  Eigen::VectorXd rho, c;
  unit_values(x, rho);
  time_basis(t, c);
  const int U = units();
  phi.resize(count());
  for (int j = 0; j <= cheb_degree; ++j)
    for (int u = 0; u < U; ++u) phi[j * U + u] = c[j] * rho[u];
}

nlohmann::json FeatureSet::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["T"] = T;
  j["cheb_degree"] = cheb_degree;
  j["linear_units"] = linear_units;
  j["x_ref"] = x_ref;
  j["b"] = std::vector<double>(b.data(), b.data() + b.size());
  auto jw = nlohmann::json::array();
  for (Eigen::Index u = 0; u < w.rows(); ++u)
    jw.push_back(std::vector<double>(w.row(u).begin(), w.row(u).end()));
  j["w"] = jw;
  return j;
}

FeatureSet FeatureSet::from_json(const nlohmann::json& j) {
  FeatureSet fs;
  fs.dim = j.at("dim").get<int>();
  fs.T = j.at("T").get<double>();
  fs.cheb_degree = j.at("cheb_degree").get<int>();
  fs.linear_units = j.at("linear_units").get<bool>();
  fs.x_ref = j.value("x_ref", 12.0);
  const auto bv = j.at("b").get<std::vector<double>>();
  fs.b = Eigen::Map<const Eigen::VectorXd>(bv.data(), static_cast<Eigen::Index>(bv.size()));
  const auto& jw = j.at("w");
  fs.w.resize(static_cast<Eigen::Index>(jw.size()), fs.dim);
  for (Eigen::Index u = 0; u < fs.w.rows(); ++u) {
    const auto row = jw.at(u).get<std::vector<double>>();
    if (static_cast<int>(row.size()) != fs.dim) throw input_error("features: ragged w");
    for (int k = 0; k < fs.dim; ++k) fs.w(u, k) = row[k];
  }
  check_features(fs);
  return fs;
}

Eigen::VectorXd ScoreModel::eval(double t, const Eigen::VectorXd& x) const {
  return eval_with(theta, t, x);
}

Eigen::VectorXd ScoreModel::eval_with(const Eigen::MatrixXd& th, double t,
                                      const Eigen::VectorXd& x) const {
  if (x.size() != features.dim) throw input_error("score eval: wrong x dimension");
  if (th.rows() != features.dim || th.cols() != features.count())
    throw input_error("score eval: parameter shape mismatch");
  Eigen::VectorXd phi;
  features.features(t, x, phi);
  return th * phi;
}

RegularityConstants ScoreModel::constants() const {
  const int U = features.units();
  const int nt = static_cast<int>(features.w.rows());
  const int F = features.count();

  Eigen::VectorXd slope(U), bound(U);
  for (int u = 0; u < nt; ++u) {
    slope[u] = features.w.row(u).norm();
    bound[u] = 1.0;
  }
  for (int u = nt; u < U; ++u) {
    slope[u] = 1.0;
    bound[u] = features.x_ref;
  }

  double k1_sq = 0.0, k3_sq = 0.0;
  for (int j = 0; j <= features.cheb_degree; ++j) {
    const double dt = 2.0 * j * j / features.T;  // |T_j'| <= j^2 on [-1, 1]
    for (int u = 0; u < U; ++u) {
      k1_sq += dt * dt * bound[u] * bound[u];
      k3_sq += slope[u] * slope[u];  // |T_j| <= 1
    }
  }
  RegularityConstants c{};
  c.k1 = std::sqrt(k1_sq);  // per unit parameter norm
  c.k2 = std::sqrt(static_cast<double>(F));
  c.k3 = theta.norm() * std::sqrt(k3_sq);
  double k4 = 0.0;
  for (Eigen::Index r = 0; r < theta.rows(); ++r) {
    double acc = 0.0;
    for (int j = 0; j <= features.cheb_degree; ++j)
      for (int u = 0; u < nt; ++u)
        acc += std::abs(theta(r, j * U + u)) * slope[u] * slope[u];
    k4 = std::max(k4, kTanhCurvatureMax * acc);
  }
  c.k4 = k4;
  c.k_total = c.k1 + c.k2 + c.k3;  // the family vanishes at theta = 0
  return c;
}

BatchScore ScoreModel::as_batch_score() const {
  // Collapse the time basis once per step: s(t, x) = A(t) rho(x).
  ScoreModel m = *this;
  return [m](double t, const Eigen::Ref<const Eigen::MatrixXd>& y,
             Eigen::Ref<Eigen::MatrixXd> out) {
    const int U = m.features.units();
    const int d = m.features.dim;
    Eigen::VectorXd c;
    m.features.time_basis(t, c);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, U);
    for (int j = 0; j <= m.features.cheb_degree; ++j)
      A += c[j] * m.theta.middleCols(j * U, U);
    const int nt = static_cast<int>(m.features.w.rows());
    Eigen::VectorXd rho(U), x(d);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      x = y.row(i).transpose();
      for (int u = 0; u < nt; ++u) rho[u] = std::tanh(m.features.w.row(u).dot(x) + m.features.b[u]);
      if (m.features.linear_units)
        for (int k = 0; k < d; ++k) rho[nt + k] = x[k];
      out.row(i) = (A * rho).transpose();
    }
  };
}

nlohmann::json ScoreModel::to_json() const {
  nlohmann::json j;
  j["features"] = features.to_json();
  j["alpha"] = alpha;
  j["ridge"] = ridge;
  j["fit_residual"] = fit_residual;
  auto jt = nlohmann::json::array();
  for (Eigen::Index r = 0; r < theta.rows(); ++r)
    jt.push_back(std::vector<double>(theta.row(r).begin(), theta.row(r).end()));
  j["theta"] = jt;
  const auto c = constants();
  j["constants"] = {{"k1", c.k1}, {"k2", c.k2}, {"k3", c.k3}, {"k4", c.k4},
                    {"k_total", c.k_total}};
  return j;
}

ScoreModel ScoreModel::from_json(const nlohmann::json& j) {
  ScoreModel m;
  m.features = FeatureSet::from_json(j.at("features"));
  m.alpha = j.at("alpha").get<double>();
  m.ridge = j.value("ridge", 0.0);
  m.fit_residual = j.value("fit_residual", -1.0);
  const auto& jt = j.at("theta");
  m.theta.resize(m.features.dim, m.features.count());
  if (static_cast<int>(jt.size()) != m.features.dim) throw input_error("model: theta shape");
  for (int r = 0; r < m.features.dim; ++r) {
    const auto row = jt.at(r).get<std::vector<double>>();
    if (static_cast<int>(row.size()) != m.features.count())
      throw input_error("model: theta shape");
    for (int f = 0; f < m.features.count(); ++f) m.theta(r, f) = row[f];
  }
  return m;
}

FitData make_training_data(const Potential& p, double T, double eps, int n, std::uint64_t seed) {
  if (p.family != Family::gaussian_mixture)
    throw input_error("training data: mixture targets only (closed-form score)");
  if (!(eps > 0.0) || !(T > eps)) throw input_error("training data: need 0 < eps < T");
  FitData d;
  d.t.resize(n);
  d.x.resize(n, p.dim);
  d.y.resize(n, p.dim);
  std::vector<double> cum(p.weights.size());
  std::partial_sum(p.weights.begin(), p.weights.end(), cum.begin());
  cum.back() = 1.0;
  std::vector<double> z0(p.dim), zf(p.dim);
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, rng_stream(RngDomain::fit, i));
    const double t = eps + (T - eps) * (i + rng.uniform(0)) / n;  // stratified
    const OuCoeffs c = ou_coeffs(t);
    const std::size_t comp =
        std::lower_bound(cum.begin(), cum.end(), rng.uniform(1)) - cum.begin();
    std::uint64_t ctr = rng.fill_normal(2, z0.data(), p.dim);
    rng.fill_normal(ctr, zf.data(), p.dim);
    Eigen::VectorXd x(p.dim);
    for (int k = 0; k < p.dim; ++k) {
      const double target = p.means(static_cast<Eigen::Index>(comp), k) + p.stds[comp] * z0[k];
      x[k] = c.m * target + c.sigma * zf[k];
    }
    d.t[i] = t;
    d.x.row(i) = x.transpose();
    d.y.row(i) = mixture_score(p, t, x).transpose();
  }
  return d;
}

ScoreModel fit_score_model(const FeatureSet& fs, const FitData& data, double ridge_rel) {
  check_features(fs);
  const auto n = data.t.size();
  if (data.x.rows() != n || data.y.rows() != n || n < 1)
    throw input_error("fit: inconsistent data sizes");
  if (data.x.cols() != fs.dim || data.y.cols() != fs.dim)
    throw input_error("fit: wrong data dimension");

  // Canonical row order: lexicographic in (t, x, y). Gram accumulation then
  // does not depend on how the caller shuffled the rows.
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (data.t[a] != data.t[b]) return data.t[a] < data.t[b];
    for (Eigen::Index k = 0; k < data.x.cols(); ++k)
      if (data.x(a, k) != data.x(b, k)) return data.x(a, k) < data.x(b, k);
    for (Eigen::Index k = 0; k < data.y.cols(); ++k)
      if (data.y(a, k) != data.y(b, k)) return data.y(a, k) < data.y(b, k);
    return false;
  });

  const int F = fs.count();
  Eigen::MatrixXd phi(n, F);
  Eigen::MatrixXd ys(n, fs.dim);
  Eigen::VectorXd row;
  for (Eigen::Index i = 0; i < n; ++i) {
    fs.features(data.t[order[i]], data.x.row(order[i]).transpose(), row);
    phi.row(i) = row.transpose();
    ys.row(i) = data.y.row(order[i]);
  }

  Eigen::MatrixXd gram = phi.transpose() * phi;
  const double lambda = ridge_rel * std::max(1e-300, gram.trace() / F);
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = phi.transpose() * ys;  // F x dim
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw numeric_error("fit: normal equations not solvable");
  ScoreModel m;
  m.features = fs;
  m.theta = solver.solve(rhs).transpose();
  m.ridge = lambda;
  m.fit_residual = (phi * m.theta.transpose() - ys).squaredNorm() / static_cast<double>(n);
  return m;
}

ScoreModel reference_model(const FeatureSet& fs, const Potential& p, double T, double eps,
                           int n_points, double ridge_rel) {
  // Chunked so the design never exceeds ~100 MB.
  check_features(fs);
  const int F = fs.count();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(F, F);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(F, fs.dim);
  const int chunk = std::max(1, std::min(n_points, 1 << 16));
  int done = 0, part = 0;
  Eigen::VectorXd row;
  while (done < n_points) {
    const int m = std::min(chunk, n_points - done);
    const FitData d = make_training_data(p, T, eps, m, kReferenceSeed + part);
    Eigen::MatrixXd phi(m, F);
    for (int i = 0; i < m; ++i) {
      fs.features(d.t[i], d.x.row(i).transpose(), row);
      phi.row(i) = row.transpose();
    }
    gram.noalias() += phi.transpose() * phi;
    rhs.noalias() += phi.transpose() * d.y;
    done += m;
    ++part;
  }
  const double lambda = ridge_rel * std::max(1e-300, gram.trace() / F);
  gram.diagonal().array() += lambda;
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success)
    throw numeric_error("reference fit: normal equations not solvable");
  ScoreModel mm;
  mm.features = fs;
  mm.theta = solver.solve(rhs).transpose();
  mm.ridge = lambda;
  mm.fit_residual = -1.0;
  return mm;
}

double epsilon_al_estimate(const FeatureSet& fs, const Potential& p, double T, double eps,
                           int n_data, int refits, const ScoreModel& reference,
                           double ridge_rel, std::uint64_t seed0) {
  if (refits < 1) throw input_error("epsilon_al: refits must be positive");
  double acc = 0.0;
  for (int r = 0; r < refits; ++r) {
    const ScoreModel m =
        fit_score_model(fs, make_training_data(p, T, eps, n_data, seed0 + r), ridge_rel);
    acc += (m.theta - reference.theta).squaredNorm();
  }
  return acc / refits;
}

ScoreErrorEstimate epsilon_sn_estimate(const ScoreModel& model, const Potential& p,
                                       const SamplerConfig& cfg) {
  if (p.dim != model.features.dim || p.dim != cfg.dim)
    throw input_error("epsilon_sn: dimension mismatch");
  std::vector<double> per_traj(cfg.n, 0.0);
  const BatchScore drive = model.as_batch_score();
  const StepObserver observer = [&](long, double t_fwd, const Eigen::Ref<const Eigen::MatrixXd>& y,
                                    const Eigen::Ref<const Eigen::MatrixXd>& s) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const Eigen::VectorXd exact = mixture_score(p, t_fwd, y.row(i).transpose());
      per_traj[static_cast<std::size_t>(i)] +=
          cfg.gamma * (exact - s.row(i).transpose()).squaredNorm();
    }
  };
  backward_em_observed(cfg, drive, observer);
  double s1 = 0.0, s2 = 0.0;
  for (double v : per_traj) {
    s1 += v;
    s2 += v * v;
  }
  ScoreErrorEstimate est;
  est.trajectories = cfg.n;
  est.value = s1 / cfg.n;
  const double var = std::max(0.0, (s2 - cfg.n * est.value * est.value) / (cfg.n - 1));
  est.stderr_mc = std::sqrt(var / cfg.n);
  return est;
}

}  // namespace semiscore
