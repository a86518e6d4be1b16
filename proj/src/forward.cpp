#include "semiscore/forward.hpp"

#include <cmath>

#include "semiscore/errors.hpp"
#include "semiscore/quadrature.hpp"
#include "semiscore/rng.hpp"

namespace semiscore {

OuCoeffs ou_coeffs(double t) {
  if (t < 0.0) throw input_error("ou_coeffs: negative time");
  OuCoeffs c;
  c.m = std::exp(-t);
  c.sigma2 = -std::expm1(-2.0 * t);
  c.sigma = std::sqrt(c.sigma2);
  return c;
}

Eigen::MatrixXd sample_forward(const Potential& p, double t, int n, std::uint64_t seed) {
  const OuCoeffs c = ou_coeffs(t);
  Eigen::MatrixXd x = sample_target(p, n, seed);
  if (c.sigma2 == 0.0) return x;
  std::vector<double> z(p.dim);
  for (int i = 0; i < n; ++i) {
    CounterRng rng(seed, rng_stream(RngDomain::forward, i));
    rng.fill_normal(0, z.data(), p.dim);
    for (int k = 0; k < p.dim; ++k) x(i, k) = c.m * x(i, k) + c.sigma * z[k];
  }
  return x;
}

Eigen::VectorXd mixture_score(const Potential& p, double t, const Eigen::VectorXd& x) {
  if (p.family != Family::gaussian_mixture)
    throw input_error("mixture_score: gaussian_mixture targets only");
  if (x.size() != p.dim) throw input_error("mixture_score: wrong dimension");
  const OuCoeffs c = ou_coeffs(t);
  const auto I = p.means.rows();
  // Noised law is again a mixture: means m_t eta_i, variances m_t^2 s_i^2 + sigma_t^2.
  Eigen::VectorXd a(I);
  std::vector<double> var(I);
  for (Eigen::Index i = 0; i < I; ++i) {
    var[i] = c.m * c.m * p.stds[i] * p.stds[i] + c.sigma2;
    a[i] = std::log(p.weights[i]) -
           (x - c.m * p.means.row(i).transpose()).squaredNorm() / (2.0 * var[i]) -
           0.5 * p.dim * std::log(var[i]);
  }
  const double m = a.maxCoeff();
  double z = 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p.dim);
  for (Eigen::Index i = 0; i < I; ++i) {
    const double w = std::exp(a[i] - m);
    z += w;
    g -= w * (x - c.m * p.means.row(i).transpose()) / var[i];
  }
  return g / z;
}

MixtureScore1d::MixtureScore1d(const Potential& p, double t) {
  if (p.family != Family::gaussian_mixture || p.dim != 1)
    throw input_error("MixtureScore1d: 1-D gaussian_mixture targets only");
  const OuCoeffs c = ou_coeffs(t);
  const auto I = p.means.rows();
  two_mode_ = I == 2 && std::abs(p.weights[0] - 0.5) < 1e-12 &&
              std::abs(p.weights[1] - 0.5) < 1e-12 && p.stds[0] == p.stds[1] &&
              p.means(0, 0) == -p.means(1, 0);
  if (two_mode_) {
    v_ = c.m * c.m * p.stds[0] * p.stds[0] + c.sigma2;
    mean_ = c.m * p.means(0, 0);
    return;
  }
  mu_.resize(I);
  var_.resize(I);
  lw_.resize(I);
  for (Eigen::Index i = 0; i < I; ++i) {
    mu_[i] = c.m * p.means(i, 0);
    var_[i] = c.m * c.m * p.stds[i] * p.stds[i] + c.sigma2;
    lw_[i] = std::log(p.weights[i]) - 0.5 * std::log(var_[i]);
  }
}

double MixtureScore1d::operator()(double x) const {
  if (two_mode_) return -x / v_ + (mean_ / v_) * std::tanh(mean_ * x / v_);
  double m = -HUGE_VAL;
  const std::size_t I = mu_.size();
  std::vector<double> e(I);
  for (std::size_t i = 0; i < I; ++i) {
    e[i] = lw_[i] - (x - mu_[i]) * (x - mu_[i]) / (2.0 * var_[i]);
    m = std::max(m, e[i]);
  }
  double z = 0.0, g = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    const double w = std::exp(e[i] - m);
    z += w;
    g -= w * (x - mu_[i]) / var_[i];
  }
  return g / z;
}

namespace {

struct ScoreQuadrature {
  // Fixed design: 64 panels x 64 nodes = 2^12 evaluations on [-B, B],
  // B = max(10, 8 sqrt(E|X|^2)).
  static constexpr int kOrder = 64;
  static constexpr int kPanels = 64;

  static double cutoff(const Potential& p) {
    return std::max(10.0, 8.0 * std::sqrt(second_moment(p)));
  }

  // Returns (log integral of e^{-U(y)} phi_t(x - m y), posterior mean of y).
  static std::array<double, 2> moments(const Potential& p, double t, double x) {
    if (p.dim != 1) throw input_error("quadrature score: 1-D targets only");
    if (!(t > 0.0)) throw input_error("quadrature score: requires t > 0");
    const OuCoeffs c = ou_coeffs(t);
    const double B = cutoff(p);
    const auto& rule = gauss_legendre(kOrder);
    const double h = 2.0 * B / kPanels;

    double emax = -HUGE_VAL;
    std::array<double, kOrder * kPanels> expo, wq, yv;
    Eigen::VectorXd y1(1);
    int idx = 0;
    for (int pan = 0; pan < kPanels; ++pan) {
      const double mid = -B + (pan + 0.5) * h, s = 0.5 * h;
      for (int i = 0; i < kOrder; ++i, ++idx) {
        const double y = mid + s * rule.nodes[i];
        y1[0] = y;
        const double r = x - c.m * y;
        expo[idx] = -potential_value(p, y1) - r * r / (2.0 * c.sigma2);
        wq[idx] = s * rule.weights[i];
        yv[idx] = y;
        emax = std::max(emax, expo[idx]);
      }
    }
    if (!std::isfinite(emax)) throw numeric_error("quadrature score: degenerate integrand");
    double z = 0.0, zy = 0.0;
    for (int i = 0; i < idx; ++i) {
      const double w = wq[i] * std::exp(expo[i] - emax);
      z += w;
      zy += w * yv[i];
    }
    if (!(z > 0.0)) throw numeric_error("quadrature score: zero mass");
    return {emax + std::log(z), zy / z};
  }
};

}  // namespace

double quadrature_score_1d(const Potential& p, double t, double x) {
  const OuCoeffs c = ou_coeffs(t);
  const auto mz = ScoreQuadrature::moments(p, t, x);
  // d/dx log p_t(x) = -(x - m E[y | x]) / sigma^2.
  return -(x - c.m * mz[1]) / c.sigma2;
}

double quadrature_log_density_1d(const Potential& p, double t, double x) {
  return ScoreQuadrature::moments(p, t, x)[0];
}

}  // namespace semiscore
