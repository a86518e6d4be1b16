#include "semiscore/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "semiscore/errors.hpp"
#include "semiscore/quadrature.hpp"
#include "semiscore/rng.hpp"

namespace semiscore {

namespace {

double sgn0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Radial part of U for the rotation-invariant families, plus the 1-D
// per-coordinate potential of the separable ones.
double radial_potential(const Potential& p, double r) {
  switch (p.family) {
    case Family::symmetric_modified_half_normal:
      return p.xi * r * r + r;
    case Family::double_well:
      return r * r * r * r - r * r;
    case Family::elastic_net:
      return r * r + r;  // one coordinate
    case Family::max_norm:
      return std::max(r, r * r);
    case Family::max_norm_nonconvex:
      return std::max(r, r * r) - 0.5 * r * r;
    default:
      throw input_error("radial_potential: family is not radial");
  }
}

// Integrand r^{k} exp(-U_rad(r)). Cutoff B keeps the dropped tail below
// 1e-12 of the total: U' >= 1 past r = 2, so the tail is < 2 g(B) once
// B >= 2(d-1).
double radial_cutoff(const Potential& p, int k) {
  double B = std::max(4.0, 2.0 * (p.dim + 1));
  const auto g = [&](double r) { return std::pow(r, k) * std::exp(-radial_potential(p, r)); };
  double total = integrate_gl(g, 0.0, B, 32, 16);
  while (2.0 * g(B) >= 1e-12 * total && B < 1e4) {
    B *= 1.5;
    total = integrate_gl(g, 0.0, B, 32, 16);
  }
  return B;
}

// Piecewise-linear inverse CDF of a density proportional to g on [0, B].
struct QuantileTable {
  std::vector<double> x, cdf;

  static QuantileTable build(const std::function<double(double)>& g, double B) {
    constexpr int kPoints = 1 << 14;
    QuantileTable t;
    t.x.resize(kPoints);
    t.cdf.resize(kPoints);
    std::vector<double> f(kPoints);
    const double h = B / (kPoints - 1);
    for (int i = 0; i < kPoints; ++i) {
      t.x[i] = i * h;
      f[i] = g(t.x[i]);
    }
    t.cdf[0] = 0.0;
    for (int i = 1; i < kPoints; ++i) t.cdf[i] = t.cdf[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    const double z = t.cdf.back();
    if (!(z > 0.0) || !std::isfinite(z)) throw numeric_error("quantile table: degenerate mass");
    for (auto& c : t.cdf) c /= z;
    return t;
  }

  double operator()(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.begin()) return x.front();
    if (it == cdf.end()) return x.back();
    const std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    const double c0 = cdf[i - 1], c1 = cdf[i];
    const double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    return x[i - 1] + w * (x[i] - x[i - 1]);
  }
};

void check_mixture(const Potential& p) {
  const auto I = static_cast<Eigen::Index>(p.weights.size());
  if (I == 0) throw input_error("mixture: no components");
  if (p.means.rows() != I || static_cast<Eigen::Index>(p.stds.size()) != I)
    throw input_error("mixture: weights/means/stds length mismatch");
  if (p.means.cols() != p.dim) throw input_error("mixture: means do not match dim");
  double wsum = 0.0;
  for (double w : p.weights) {
    if (!(w > 0.0)) throw input_error("mixture: weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw input_error("mixture: weights must sum to 1");
  for (double s : p.stds)
    if (!(s > 0.0)) throw input_error("mixture: stds must be positive");
}

// log sum_i w_i exp(a_i), guarded.
double log_sum_exp(const Eigen::VectorXd& a, const std::vector<double>& w) {
  const double m = a.maxCoeff();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) acc += w[i] * std::exp(a[i] - m);
  return m + std::log(acc);
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::gaussian_mixture: return "gaussian_mixture";
    case Family::symmetric_modified_half_normal: return "symmetric_modified_half_normal";
    case Family::double_well: return "double_well";
    case Family::elastic_net: return "elastic_net";
    case Family::max_norm: return "max_norm";
    case Family::max_norm_nonconvex: return "max_norm_nonconvex";
  }
  throw input_error("family_name: unknown family");
}

Family family_from_name(const std::string& name) {
  for (Family f : {Family::gaussian_mixture, Family::symmetric_modified_half_normal,
                   Family::double_well, Family::elastic_net, Family::max_norm,
                   Family::max_norm_nonconvex})
    if (family_name(f) == name) return f;
  throw input_error("unknown potential family: " + name);
}

Potential Potential::from_json(const nlohmann::json& j) {
  Potential p;
  p.family = family_from_name(j.at("family").get<std::string>());
  p.dim = j.value("dim", 1);
  if (p.dim < 1) throw input_error("potential: dim must be >= 1");

  if (p.family == Family::gaussian_mixture) {
    p.weights = j.at("weights").get<std::vector<double>>();
    p.stds = j.at("stds").get<std::vector<double>>();
    const auto& jm = j.at("means");
    const auto I = static_cast<Eigen::Index>(p.weights.size());
    if (!jm.is_array() || jm.empty()) throw input_error("mixture: means must be a non-empty array");
    if (jm.front().is_array()) {
      p.dim = static_cast<int>(jm.front().size());
      p.means.resize(I, p.dim);
      for (Eigen::Index i = 0; i < I; ++i) {
        const auto row = jm.at(i).get<std::vector<double>>();
        if (static_cast<int>(row.size()) != p.dim) throw input_error("mixture: ragged means");
        for (int c = 0; c < p.dim; ++c) p.means(i, c) = row[c];
      }
    } else {
      p.dim = 1;
      p.means.resize(I, 1);
      for (Eigen::Index i = 0; i < I; ++i) p.means(i, 0) = jm.at(i).get<double>();
    }
    check_mixture(p);
  } else if (p.family == Family::symmetric_modified_half_normal) {
    p.xi = j.value("xi", 1.0);
    if (!(p.xi > 0.0)) throw input_error("half-normal: xi must be positive");
    if (p.dim != 1) throw input_error("half-normal: 1-D only");
  }

  if (j.contains("semiconvexity")) {
    const auto& s = j.at("semiconvexity");
    SemiconvexityParams sp;
    sp.K = s.at("K").get<double>();
    sp.mu = s.at("mu").get<double>();
    sp.R = s.at("R").get<double>();
    p.semiconvexity_override = sp;
  }
  return p;
}

nlohmann::json Potential::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family);
  j["dim"] = dim;
  if (family == Family::gaussian_mixture) {
    j["weights"] = weights;
    j["stds"] = stds;
    auto jm = nlohmann::json::array();
    for (Eigen::Index i = 0; i < means.rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < means.cols(); ++c) row.push_back(means(i, c));
      jm.push_back(row);
    }
    j["means"] = jm;
  } else if (family == Family::symmetric_modified_half_normal) {
    j["xi"] = xi;
  }
  if (semiconvexity_override) {
    j["semiconvexity"] = {{"K", semiconvexity_override->K},
                          {"mu", semiconvexity_override->mu},
                          {"R", semiconvexity_override->R}};
  }
  return j;
}

Potential Potential::benchmark_mixture() {
  Potential p;
  p.family = Family::gaussian_mixture;
  p.dim = 1;
  p.weights = {0.5, 0.5};
  p.means.resize(2, 1);
  p.means << 2.0, -2.0;
  p.stds = {3.0, 3.0};
  return p;
}

double potential_value(const Potential& p, const Eigen::VectorXd& x) {
  if (x.size() != p.dim) throw input_error("potential_value: wrong dimension");
  switch (p.family) {
    case Family::gaussian_mixture: {
      check_mixture(p);
      const auto I = p.means.rows();
      Eigen::VectorXd a(I);
      for (Eigen::Index i = 0; i < I; ++i) {
        const double s2 = p.stds[i] * p.stds[i];
        a[i] = -(x - p.means.row(i).transpose()).squaredNorm() / (2.0 * s2) -
               p.dim * std::log(p.stds[i]);
      }
      return -log_sum_exp(a, p.weights);
    }
    case Family::symmetric_modified_half_normal:
      return p.xi * x[0] * x[0] + std::abs(x[0]);
    case Family::double_well: {
      const double n2 = x.squaredNorm();
      return n2 * n2 - n2;
    }
    case Family::elastic_net:
      return x.squaredNorm() + x.lpNorm<1>();
    case Family::max_norm: {
      const double n = x.norm();
      return std::max(n, n * n);
    }
    case Family::max_norm_nonconvex: {
      const double n = x.norm();
      return std::max(n, n * n) - 0.5 * n * n;
    }
  }
  throw input_error("potential_value: unknown family");
}

Eigen::VectorXd subgradient(const Potential& p, const Eigen::VectorXd& x) {
  if (x.size() != p.dim) throw input_error("subgradient: wrong dimension");
  switch (p.family) {
    case Family::gaussian_mixture: {
      check_mixture(p);
      const auto I = p.means.rows();
      Eigen::VectorXd a(I);
      for (Eigen::Index i = 0; i < I; ++i) {
        const double s2 = p.stds[i] * p.stds[i];
        a[i] = std::log(p.weights[i]) -
               (x - p.means.row(i).transpose()).squaredNorm() / (2.0 * s2) -
               p.dim * std::log(p.stds[i]);
      }
      const double m = a.maxCoeff();
      double z = 0.0;
      Eigen::VectorXd g = Eigen::VectorXd::Zero(p.dim);
      for (Eigen::Index i = 0; i < I; ++i) {
        const double w = std::exp(a[i] - m);
        z += w;
        g += w * (x - p.means.row(i).transpose()) / (p.stds[i] * p.stds[i]);
      }
      return g / z;
    }
    case Family::symmetric_modified_half_normal: {
      Eigen::VectorXd g(1);
      g[0] = 2.0 * p.xi * x[0] + sgn0(x[0]);
      return g;
    }
    case Family::double_well:
      return (4.0 * x.squaredNorm() - 2.0) * x;
    case Family::elastic_net: {
      Eigen::VectorXd g = 2.0 * x;
      for (Eigen::Index i = 0; i < x.size(); ++i) g[i] += sgn0(x[i]);
      return g;
    }
    case Family::max_norm: {
      const double n = x.norm();
      if (n == 0.0) return Eigen::VectorXd::Zero(p.dim);  // minimal-norm element of the unit ball
      if (n <= 1.0) return x / n;                         // at the kink sphere the shortest selection
      return 2.0 * x;
    }
    case Family::max_norm_nonconvex: {
      Potential q = p;
      q.family = Family::max_norm;
      return subgradient(q, x) - x;
    }
  }
  throw input_error("subgradient: unknown family");
}

SemiconvexityParams semiconvexity_params(const Potential& p) {
  if (p.semiconvexity_override) return *p.semiconvexity_override;
  switch (p.family) {
    case Family::gaussian_mixture: {
      check_mixture(p);
      const auto I = p.means.rows();
      const double s2 = p.stds[0] * p.stds[0];
      if (I == 1) return {0.0, 1.0 / s2, 0.0};
      const bool symmetric_pair =
          I == 2 && std::abs(p.weights[0] - 0.5) < 1e-12 && std::abs(p.weights[1] - 0.5) < 1e-12 &&
          p.stds[0] == p.stds[1] &&
          (p.means.row(0) + p.means.row(1)).norm() < 1e-12 * (1.0 + p.means.row(0).norm());
      if (!symmetric_pair)
        throw input_error(
            "semiconvexity_params: closed forms cover one component or a symmetric "
            "equal-weight pair; supply a semiconvexity override otherwise");
      const double eta2 = p.means.row(0).squaredNorm();
      const double K = 2.0 * eta2 / (s2 * s2);
      const double mu = (s2 - 2.0 * eta2) / (s2 * s2);
      if (!(mu > 0.0))
        throw input_error("semiconvexity_params: modes too separated (s^2 <= 2|eta|^2)");
      // The certified convexity floor is (s2 - eta2)/s2^2 >= mu everywhere, so
      // the at-distance bound needs no minimum separation.
      return {K, mu, 0.0};
    }
    case Family::symmetric_modified_half_normal:
      return {0.0, 2.0 * p.xi, 0.0};
    case Family::double_well:
      // Pair profile r^2 - 2 (cubic monotonicity, tight at antipodal pairs).
      return {2.0, 1.0, std::sqrt(3.0)};
    case Family::elastic_net:
      return {0.0, 2.0, 0.0};
    case Family::max_norm:
      // Profile dips to 2/r on r in [1,2]; 1 is attained at r = 2.
      return {0.0, 1.0, 1.0};
    case Family::max_norm_nonconvex:
      // max_norm profile shifted down by 1.
      return {1.0, 0.5, 2.0};
  }
  throw input_error("semiconvexity_params: unknown family");
}

double second_moment(const Potential& p) {
  switch (p.family) {
    case Family::gaussian_mixture: {
      check_mixture(p);
      double m2 = 0.0;
      for (Eigen::Index i = 0; i < p.means.rows(); ++i)
        m2 += p.weights[i] * (p.means.row(i).squaredNorm() + p.dim * p.stds[i] * p.stds[i]);
      return m2;
    }
    case Family::elastic_net: {
      Potential q = p;
      q.dim = 1;
      const double B = radial_cutoff(q, 2);
      const auto g = [&](double r) { return std::exp(-(r * r + r)); };
      const double num = integrate_adaptive([&](double r) { return r * r * g(r); }, 0.0, B, 1e-14);
      const double den = integrate_adaptive(g, 0.0, B, 1e-14);
      return p.dim * num / den;
    }
    default: {
      // Rotation-invariant (and the 1-D half-normal): radial moments.
      const int d = p.dim;
      const double B = radial_cutoff(p, d + 1);
      const auto g = [&](double r) { return std::exp(-radial_potential(p, r)); };
      const double num = integrate_adaptive(
          [&](double r) { return std::pow(r, d + 1) * g(r); }, 0.0, B, 1e-14);
      const double den = integrate_adaptive(
          [&](double r) { return std::pow(r, d - 1) * g(r); }, 0.0, B, 1e-14);
      return num / den;
    }
  }
}

Eigen::MatrixXd sample_target(const Potential& p, int n, std::uint64_t seed) {
  if (n < 1) throw input_error("sample_target: n must be positive");
  Eigen::MatrixXd out(n, p.dim);

  switch (p.family) {
    case Family::gaussian_mixture: {
      check_mixture(p);
      std::vector<double> cum(p.weights.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < p.weights.size(); ++i) {
        acc += p.weights[i];
        cum[i] = acc;
      }
      cum.back() = 1.0;
      std::vector<double> z(p.dim);
      for (int i = 0; i < n; ++i) {
        CounterRng rng(seed, rng_stream(RngDomain::target, i));
        const double u = rng.uniform(0);
        const std::size_t c =
            std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        rng.fill_normal(1, z.data(), p.dim);
        for (int k = 0; k < p.dim; ++k)
          out(i, k) = p.means(static_cast<Eigen::Index>(c), k) + p.stds[c] * z[k];
      }
      return out;
    }

    case Family::symmetric_modified_half_normal: {
      // Proposal N(0, 1/(2 xi)), acceptance exp(-|z|). Two blocks per attempt.
      const double prop_std = 1.0 / std::sqrt(2.0 * p.xi);
      for (int i = 0; i < n; ++i) {
        CounterRng rng(seed, rng_stream(RngDomain::target, i));
        bool ok = false;
        for (int a = 0; a < 10000; ++a) {
          const double z = prop_std * rng.normal(2 * a);
          const double u = rng.uniform(2 * a + 1);
          if (u < std::exp(-std::abs(z))) {
            out(i, 0) = z;
            ok = true;
            break;
          }
        }
        if (!ok) throw numeric_error("half-normal sampler: acceptance starved after 10000 attempts");
      }
      return out;
    }

    case Family::elastic_net: {
      const auto g = [](double r) { return std::exp(-(r * r + r)); };
      Potential q = p;
      q.dim = 1;
      const QuantileTable table = QuantileTable::build(g, radial_cutoff(q, 0));
      for (int i = 0; i < n; ++i) {
        CounterRng rng(seed, rng_stream(RngDomain::target, i));
        for (int k = 0; k < p.dim; ++k) {
          const double r = table(rng.uniform(2 * k));
          out(i, k) = rng.uniform(2 * k + 1) < 0.5 ? -r : r;
        }
      }
      return out;
    }

    default: {
      // Radial families: inverse-CDF radius, uniform direction.
      const int d = p.dim;
      const auto g = [&](double r) {
        return std::pow(r, d - 1) * std::exp(-radial_potential(p, r));
      };
      const QuantileTable table = QuantileTable::build(g, radial_cutoff(p, d - 1));
      std::vector<double> z(d);
      for (int i = 0; i < n; ++i) {
        CounterRng rng(seed, rng_stream(RngDomain::target, i));
        const double r = table(rng.uniform(0));
        if (d == 1) {
          out(i, 0) = rng.uniform(1) < 0.5 ? -r : r;
        } else {
          rng.fill_normal(1, z.data(), d);
          double nz = 0.0;
          for (double v : z) nz += v * v;
          nz = std::sqrt(nz);
          if (nz == 0.0) nz = 1.0;
          for (int k = 0; k < d; ++k) out(i, k) = r * z[k] / nz;
        }
      }
      return out;
    }
  }
}

}  // namespace semiscore
