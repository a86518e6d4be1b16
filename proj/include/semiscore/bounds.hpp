#pragma once

// Closed-form error certificates for the backward sampler: moment bounds for
// the discretized reverse process, the four-term Wasserstein-2 budget (early
// stopping, ergodic convergence, score error, discretization), and the
// parameter thresholds that guarantee a prescribed accuracy delta.
//
// Every exponential is handled in log space. A value whose log exceeds the
// double range is reported saturated (+inf) rather than silently clipped; at
// large horizons the certified constants genuinely are that big.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace semiscore {

struct BoundInputs {
  int dim = 1;
  double e_x0_sq = 1.0;  // E|X_0|^2 of the target
  double K = 0.0;        // convexity defect
  double mu = 1.0;       // convexity level at long range
  double T = 1.0;
  double epsilon = 1e-2;
  double gamma = 1e-3;
  double alpha = 1.0;  // one-sided Holder exponent of the drift in time
  double zeta = 0.5;   // free Young-inequality parameter, in (0, 1)
  double k1 = 0.0;     // drift time modulus
  double k3 = 0.0;     // drift space Lipschitz level
  double k4 = 0.0;     // drift Hessian level
  double k_total = 0.0;
  double eps_al = 0.0;        // parameter estimation error E|theta_hat - theta*|^2
  double theta_star_sq = 0.0;  // |theta*|^2
  double eps_sn = 0.0;        // along-path score error
  double e_theta4 = 0.0;      // E|theta_hat|^4, needed by the fourth-moment bounds

  // When set, used in place of log(gamma) / log(eps_sn); lets callers feed
  // values whose linear representation underflowed.
  std::optional<double> log_gamma;
  std::optional<double> log_eps_sn;

  static BoundInputs from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

enum class DiscretizationRate {
  sqrt_gamma,  // generic drift: fourth term scales as gamma^(1/2)
  holder,      // smooth-in-space drift: fourth term scales as gamma^alpha
};

// Uniform p-th moment bound for the discretized reverse process, p in {2, 4}.
double em_moment_bound_log(const BoundInputs& in, int p);
double em_moment_bound(const BoundInputs& in, int p);  // exp, saturating

// One-step overshoot moment bound: E|Y_t - Y_{floor(t/gamma) gamma}|^p divided
// by gamma^(p/2) is at most this. p in {2, 4}.
double em_overshoot_bound_log(const BoundInputs& in, int p);
double em_overshoot_bound(const BoundInputs& in, int p);

// Prefactors of the four budget terms. The first two never overflow; the last
// two are log-valued.
double c_early_stop(const BoundInputs& in);
double c_convergence(const BoundInputs& in);
double c_score_error_log(const BoundInputs& in);
double c_discretization_log(const BoundInputs& in, DiscretizationRate rate);

struct BoundTerm {
  std::string name;
  double log_value = 0.0;
  double value = 0.0;  // exp(log_value), +inf once past the double range
  bool saturated = false;
};

struct BoundBreakdown {
  DiscretizationRate rate = DiscretizationRate::sqrt_gamma;
  std::array<BoundTerm, 4> terms;  // early_stop, convergence, score_error, discretization
  double total = 0.0;              // exact sum of the four term values
  bool saturated = false;
  nlohmann::json to_json() const;
};

// The four-term W2 budget at the given inputs.
BoundBreakdown w2_error_budget(const BoundInputs& in,
                               DiscretizationRate rate = DiscretizationRate::sqrt_gamma);

// Accuracy thresholds: running the sampler with epsilon < epsilon_delta,
// T > t_delta, score error below eps_sn_delta and step below gamma_delta
// certifies W2 below delta. The time-dependent thresholds are evaluated
// self-consistently at the plug point (T = t_delta + 1, epsilon =
// epsilon_delta / 2), reported alongside.
struct DeltaThresholds {
  double delta = 0.0;
  double epsilon_delta = 0.0;
  double t_delta = 0.0;
  double t_bar = 0.0;  // lower end of the bisection bracket
  double plug_T = 0.0;
  double plug_epsilon = 0.0;
  double eps_sn_delta = 0.0;  // linear values; 0 when the log underflows
  double gamma_delta = 0.0;
  double gamma_tilde_delta = 0.0;
  double log_eps_sn_delta = 0.0;
  double log_gamma_delta = 0.0;
  double log_gamma_tilde_delta = 0.0;
  nlohmann::json to_json() const;
};

DeltaThresholds delta_thresholds(const BoundInputs& in, double delta);

}  // namespace semiscore
