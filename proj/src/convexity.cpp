#include "semiscore/convexity.hpp"

#include <cmath>
#include <functional>

#include "semiscore/errors.hpp"
#include "semiscore/rng.hpp"

namespace semiscore {

namespace {

// D = mu + (1 - mu) e^{-2t}; positive for all t >= 0 iff mu > 0 (for mu >= 1
// it is bounded below by 1... by min(1, mu)).
double denom(double t, double mu) { return mu + (1.0 - mu) * std::exp(-2.0 * t); }

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw numeric_error("bisect: endpoints do not bracket a root");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double f_tanh(double L, double r) {
  if (L < 0.0) throw input_error("f_tanh: L must be nonnegative");
  if (r < 0.0) throw input_error("f_tanh: r must be nonnegative");
  const double s = std::sqrt(L);
  return 2.0 * s * std::tanh(0.5 * r * s);
}

double beta_os(double t, double mu, double L) {
  if (t < 0.0) throw input_error("beta_os: negative time");
  const double D = denom(t, mu);
  if (!(D > 0.0)) throw input_error("beta_os: mu + (1-mu) e^{-2t} <= 0, bound undefined");
  const double e = std::exp(-2.0 * t);
  return mu / D - e * L / (D * D);
}

double beta_os_kmu(double t, double mu, double K) {
  return beta_os(t, mu, K + mu);
}

double beta_integral(double t, double mu, double K) {
  if (t < 0.0) throw input_error("beta_integral: negative time");
  if (!(mu > 0.0)) throw input_error("beta_integral: mu must be positive");
  if (K < 0.0) throw input_error("beta_integral: K must be nonnegative");
  const double D = denom(t, mu);  // A = e^{2t} D
  const double logA = 2.0 * t + std::log(D);
  const double invA = std::exp(-2.0 * t) / D;
  return 0.5 * (logA + (K / mu + 1.0) * (invA - 1.0));
}

double beta_integral_range(double a, double b, double mu, double K) {
  return beta_integral(b, mu, K) - beta_integral(a, mu, K);
}

double t_bar(double mu, double K) {
  if (!(mu > 0.0)) throw input_error("t_bar: mu must be positive");
  if (K < 0.0) throw input_error("t_bar: K must be nonnegative");
  return 0.5 * std::log1p(K / (mu * mu));
}

double t_star(double mu, double K) {
  if (!(mu > 0.0)) throw input_error("t_star: mu must be positive");
  if (K < 0.0) throw input_error("t_star: K must be nonnegative");
  if (K == 0.0) return 0.0;
  // The integral decreases until tbar and increases afterwards, so the unique
  // positive root sits in (tbar, infinity); the log term grows like t.
  const double tb = t_bar(mu, K);
  double hi = tb + 1.0;
  while (beta_integral(hi, mu, K) <= 0.0) {
    hi = tb + 2.0 * (hi - tb);
    if (hi - tb > 1e6) throw numeric_error("t_star: no sign change found");
  }
  return bisect([&](double t) { return beta_integral(t, mu, K); }, tb, hi, 1e-10);
}

double r0_threshold(double mu, double L) {
  if (!(mu > 0.0)) throw input_error("r0_threshold: mu must be positive");
  if (!(L > 0.0)) throw input_error("r0_threshold: L must be positive");
  if (mu >= L) return 0.0;  // every radius certifies
  const double target = mu / L;  // tanh(z)/z decreases from 1 to 0
  double hi = 1.0;
  while (std::tanh(hi) / hi > target) hi *= 2.0;
  double lo = 0.5 * hi;
  while (lo > 0.0 && std::tanh(lo) / lo <= target) lo *= 0.5;
  const double z0 = bisect([&](double z) { return std::tanh(z) / z - target; }, lo, hi, 1e-10);
  return 2.0 * z0 / std::sqrt(L);
}

double mu_tilde(double mu, double L, double R) {
  if (R < 0.0) throw input_error("mu_tilde: R must be nonnegative");
  if (R == 0.0) return mu - L;  // limit of f_L(R)/R
  return mu - f_tanh(L, R) / R;
}

std::vector<KappaPoint> empirical_kappa(const Potential& p, const std::vector<double>& radii,
                                        int pairs, std::uint64_t seed) {
  if (pairs < 1) throw input_error("empirical_kappa: pairs must be positive");
  const Eigen::MatrixXd base = sample_target(p, pairs, seed);
  std::vector<KappaPoint> out;
  out.reserve(radii.size());
  std::vector<double> z(p.dim);
  for (double r : radii) {
    if (!(r > 0.0)) throw input_error("empirical_kappa: radii must be positive");
    double worst = HUGE_VAL;
    for (int i = 0; i < pairs; ++i) {
      CounterRng rng(seed, rng_stream(RngDomain::pairs, i));
      Eigen::VectorXd u(p.dim);
      if (p.dim == 1) {
        u[0] = rng.uniform(0) < 0.5 ? -1.0 : 1.0;
      } else {
        rng.fill_normal(0, z.data(), p.dim);
        for (int k = 0; k < p.dim; ++k) u[k] = z[k];
        const double nz = u.norm();
        u /= nz == 0.0 ? 1.0 : nz;
      }
      const Eigen::VectorXd x = base.row(i).transpose();
      const Eigen::VectorXd xb = x + r * u;
      const double inner = (subgradient(p, x) - subgradient(p, xb)).dot(x - xb);
      worst = std::min(worst, inner / (r * r));
    }
    out.push_back({r, worst});
  }
  return out;
}

}  // namespace semiscore
