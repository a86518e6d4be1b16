#pragma once

// Weak convexity machinery: the tanh comparison profile, the time-dependent
// one-sided (OS) monotonicity bound for the noised score, its closed-form
// integral, and the times where the integral turns positive.

#include <cstdint>
#include <vector>

#include "semiscore/potentials.hpp"

namespace semiscore {

// f_L(r) = 2 sqrt(L) tanh(r sqrt(L) / 2); the semiconvex comparison envelope.
double f_tanh(double L, double r);

// One-sided bound beta_t = mu/D - e^{-2t} L / D^2 with D = mu + (1-mu) e^{-2t}.
// Valid while D > 0; rejects configurations where D vanishes.
double beta_os(double t, double mu, double L);

// Same with the proxy L = K + mu (only (K, mu) certified, no sharp L).
double beta_os_kmu(double t, double mu, double K);

// \int_0^t beta_os_kmu ds, closed form:
//   B(t) = 1/2 [ ln A + (K/mu + 1)(1/A - 1) ],  A = mu (e^{2t} - 1) + 1,
// evaluated via ln A = 2t + ln(mu + (1-mu) e^{-2t}) so it never overflows.
double beta_integral(double t, double mu, double K);

// \int_a^b beta_os_kmu.
double beta_integral_range(double a, double b, double mu, double K);

// Zero crossing of beta_os_kmu: tbar = ln sqrt(1 + K / mu^2).
double t_bar(double mu, double K);

// First positive time where the integral turns positive; 0 when K = 0 (the
// integral is positive for every t > 0). Bisection to 1e-10.
double t_star(double mu, double K);

// Smallest radius past which the tanh profile certifies positive curvature:
// R0 = 2 z0 / sqrt(L) with tanh(z0)/z0 = mu/L. Returns 0 when mu >= L (any
// radius works).
double r0_threshold(double mu, double L);

// Effective strong-convexity level mu - f_L(R)/R (continuously mu - L at R=0).
double mu_tilde(double mu, double L, double R);

struct KappaPoint {
  double r;
  double value;  // min over sampled pairs of <h(x)-h(xbar), x-xbar> / r^2
};

// Monte-Carlo lower envelope of the pair profile: x from the target law,
// xbar = x + r u with u uniform on the sphere.
std::vector<KappaPoint> empirical_kappa(const Potential& p, const std::vector<double>& radii,
                                        int pairs, std::uint64_t seed);

}  // namespace semiscore
