#pragma once

// Mean-reverting noising process dX = -X dt + sqrt(2) dB started at the target
// law: X_t = m_t X_0 + sigma_t Z with m_t = e^{-t}, sigma_t^2 = 1 - e^{-2t}.

#include <Eigen/Dense>
#include <cstdint>

#include "semiscore/potentials.hpp"

namespace semiscore {

struct OuCoeffs {
  double m;       // e^{-t}
  double sigma2;  // 1 - e^{-2t}
  double sigma;
};

OuCoeffs ou_coeffs(double t);

// Draws of X_t (target draw plus scaled noise), one row per sample.
Eigen::MatrixXd sample_forward(const Potential& p, double t, int n, std::uint64_t seed);

// Gradient of log density of X_t for mixture targets; exact for every t >= 0.
Eigen::VectorXd mixture_score(const Potential& p, double t, const Eigen::VectorXd& x);

// Precomputed per-t form of the above, cheap enough for integrator loops.
// Only the symmetric two-mode case gets the tanh fast path; the general case
// falls back to responsibility sums.
class MixtureScore1d {
 public:
  MixtureScore1d(const Potential& p, double t);
  double operator()(double x) const;

 private:
  bool two_mode_;
  double v_, mean_;                  // symmetric pair: common variance, m_t * eta
  std::vector<double> mu_, var_, lw_;  // general case
};

// Score of the 1-D noised density by Gauss-Legendre over the target variable,
// log-domain. Refuses t <= 0 (the smoothing kernel degenerates).
double quadrature_score_1d(const Potential& p, double t, double x);

// log p_t(x) up to an x-independent constant, same quadrature grid. Exposed so
// finite differences of it can cross-check the score.
double quadrature_log_density_1d(const Potential& p, double t, double x);

}  // namespace semiscore
