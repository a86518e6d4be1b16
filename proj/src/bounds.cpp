#include "semiscore/bounds.hpp"

#include <cmath>
#include <limits>

#include "semiscore/convexity.hpp"
#include "semiscore/errors.hpp"

namespace semiscore {

namespace {

constexpr double kLogMax = 709.0;  // exp saturates to +inf past this
constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_exp(double lg, bool* saturated = nullptr) {
  if (lg > kLogMax) {
    if (saturated) *saturated = true;
    return kInf;
  }
  return std::exp(lg);
}

// log(e^a + e^b); tolerates -inf on either side.
double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

void check_common(const BoundInputs& in) {
  if (in.dim < 1) throw input_error("bounds: dim must be positive");
  if (!(in.e_x0_sq >= 0.0)) throw input_error("bounds: E|X0|^2 must be nonnegative");
  if (!(in.zeta > 0.0) || !(in.zeta < 1.0)) throw input_error("bounds: zeta must lie in (0,1)");
  if (!(in.alpha > 0.0) || in.alpha > 1.0) throw input_error("bounds: alpha must lie in (0,1]");
  if (!(in.T > 0.0)) throw input_error("bounds: T must be positive");
  if (in.k1 < 0 || in.k3 < 0 || in.k4 < 0 || in.k_total < 0 || in.eps_al < 0 ||
      in.theta_star_sq < 0 || in.eps_sn < 0 || in.e_theta4 < 0)
    throw input_error("bounds: regularity constants must be nonnegative");
}

void check_window(const BoundInputs& in) {
  if (!(in.epsilon > 0.0) || !(in.epsilon < 1.0) || !(in.epsilon < in.T))
    throw input_error("bounds: epsilon must lie in (0, min(T, 1))");
}

void check_gamma(const BoundInputs& in) {
  if (in.log_gamma) {
    if (!(*in.log_gamma < 0.0)) throw input_error("bounds: log_gamma must be negative");
    return;
  }
  if (!(in.gamma > 0.0) || !(in.gamma < 1.0))
    throw input_error("bounds: gamma must lie in (0, 1)");
}

// Moment slot of the estimated drift parameters: E|theta_hat|^p is controlled
// by 2 eps_al + 2 |theta*|^2 for p = 2 and supplied directly for p = 4.
double theta_slot(const BoundInputs& in, int p) {
  if (p == 2) return 1.0 + 2.0 * in.eps_al + 2.0 * in.theta_star_sq;
  return 1.0 + in.e_theta4;
}

double y0_moment(const BoundInputs& in, int p) {
  const double d = in.dim;
  return p == 2 ? d : d * (d + 2.0);  // standard Gaussian start
}

double pow_int(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double moment_log_at(const BoundInputs& in, int p, double t) {
  const double d = in.dim;
  const double kp = pow_int(in.k_total, p);
  const double tap = 1.0 + std::pow(in.T, in.alpha * p);
  const double expo = t * (3.0 * p - 1.0 - 2.0 / p + pow_int(2.0, 2 * p - 1) * kp * tap);
  const double drift_term = pow_int(2.0, 3 * p - 2) * kp * t * theta_slot(in, p) * tap;
  const double noise_term = (2.0 / p) * std::pow(p * d + p * (p - 2.0), p / 2.0) * t;
  return expo + std::log(y0_moment(in, p) + drift_term + noise_term);
}

double overshoot_log_at(const BoundInputs& in, int p) {
  const double lcem = moment_log_at(in, p, in.T);
  const double kp = pow_int(in.k_total, p);
  const double tap = 1.0 + std::pow(in.T, in.alpha * p);
  // 2^(p-1) ( C_em (1 + 2^(3p-2) K^p tap) + 2^(4p-3) K^p tap slot ) + (d p (p-1))^(p/2)
  const double lead = (p - 1) * std::log(2.0);
  const double a = lead + lcem + std::log1p(pow_int(2.0, 3 * p - 2) * kp * tap);
  const double cross = pow_int(2.0, 4 * p - 3) * kp * tap * theta_slot(in, p);
  const double b = cross > 0.0 ? lead + std::log(cross) : -kInf;
  const double tail = (p / 2.0) * std::log(in.dim * p * (p - 1.0));
  return log_add(log_add(a, b), tail);
}

void check_p(int p) {
  if (p != 2 && p != 4) throw input_error("bounds: moment order must be 2 or 4");
}

// log of the bracketed factor of the sqrt-rate discretization prefactor:
//   sqrt(C_ose2) (1 + 2 k3 (1 + 2 T^alpha)) + 2 sqrt2 k1 sqrt(1 + 8 eps_al + 8 |theta*|^2)
double log_bracket_sqrt_rate(const BoundInputs& in) {
  const double lose2 = overshoot_log_at(in, 2);
  const double a = 0.5 * lose2 + std::log1p(2.0 * in.k3 * (1.0 + 2.0 * std::pow(in.T, in.alpha)));
  const double b =
      in.k1 > 0.0
          ? std::log(2.0 * std::sqrt(2.0) * in.k1) +
                0.5 * std::log1p(8.0 * in.eps_al + 8.0 * in.theta_star_sq)
          : -kInf;
  return log_add(a, b);
}

// log of the big bracket of the Holder-rate prefactor (before its square root).
double log_bracket_holder(const BoundInputs& in) {
  const double t2a = std::pow(in.T, 2.0 * in.alpha);
  const double hess = 1.0 + 8.0 * in.k3 * in.k3 * (1.0 + 4.0 * t2a);
  const double slot2 = theta_slot(in, 2);
  const double lcem2 = moment_log_at(in, 2, in.T);
  const double lose2 = overshoot_log_at(in, 2);
  const double lose4 = overshoot_log_at(in, 4);
  const double kt2 = in.k_total * in.k_total;

  const double b1 = in.k4 > 0.0
                        ? std::log(in.k4 * in.k4 / in.zeta * (1.0 + 4.0 * t2a)) + lose4
                        : -kInf;
  const double b2 = std::log(4.0 * in.dim * hess);
  const double b3 = in.k1 > 0.0
                        ? std::log(2.0 / in.zeta * in.k1 * in.k1 *
                                   (1.0 + 8.0 * (in.eps_al + in.theta_star_sq)))
                        : -kInf;
  const double inner_a = std::log1p(16.0 * kt2 * (1.0 + t2a)) + lcem2;
  const double inner_b = kt2 > 0.0
                             ? std::log(32.0 * kt2 * (1.0 + t2a) * slot2)
                             : -kInf;
  const double b4 = std::log(4.0 / in.zeta * in.dim * hess) + log_add(inner_a, inner_b);
  const double pair_a = 0.5 * std::log(hess) + 0.5 * lose2;
  const double pair_b =
      in.k1 > 0.0
          ? std::log(2.0 * in.k1) + 0.5 * std::log1p(8.0 * in.eps_al + 8.0 * in.theta_star_sq)
          : -kInf;
  const double b5 = std::log(2.0) + log_add(pair_a, pair_b) +
                    std::log(in.dim * std::sqrt(2.0)) + 0.5 * std::log(hess);
  return log_add(log_add(log_add(b1, b2), log_add(b3, b4)), b5);
}

double log_c3_at(const BoundInputs& in, double T, double eps) {
  const double ib = beta_integral_range(eps, T, in.mu, in.K);
  return 0.5 * std::log(2.0 / in.zeta) + (1.0 + in.zeta) * (T - eps) - 2.0 * ib;
}

double log_c4_sqrt_at(const BoundInputs& in, double T, double eps) {
  BoundInputs at = in;
  at.T = T;
  const double rate = 1.0 + 1.5 * in.zeta + 2.0 * in.k3 * (1.0 + 2.0 * std::pow(T, in.alpha));
  return -0.5 * std::log(in.zeta) + 0.5 * std::log(T - eps) + rate * (T - eps) +
         log_bracket_sqrt_rate(at);
}

double log_c4_holder_at(const BoundInputs& in, double T, double eps) {
  BoundInputs at = in;
  at.T = T;
  const double t2a = std::pow(T, 2.0 * in.alpha);
  const double rate =
      1.0 + in.zeta +
      in.k3 * (1.0 + 2.0 * std::pow(T, in.alpha) + 4.0 * in.k3 * (1.0 + 4.0 * t2a));
  return 0.5 * std::log(2.0) + 2.0 * rate * (T - eps) + 0.5 * std::log(T - eps) +
         0.5 * log_bracket_holder(at);
}

BoundTerm make_term(const char* name, double lg) {
  BoundTerm t;
  t.name = name;
  t.log_value = lg;
  t.value = safe_exp(lg, &t.saturated);
  return t;
}

}  // namespace

BoundInputs BoundInputs::from_json(const nlohmann::json& j) {
  BoundInputs in;
  in.dim = j.value("dim", 1);
  in.e_x0_sq = j.at("e_x0_sq").get<double>();
  in.K = j.at("K").get<double>();
  in.mu = j.at("mu").get<double>();
  in.T = j.at("T").get<double>();
  in.epsilon = j.at("epsilon").get<double>();
  in.gamma = j.at("gamma").get<double>();
  in.alpha = j.value("alpha", 1.0);
  in.zeta = j.value("zeta", 0.5);
  in.k1 = j.value("k1", 0.0);
  in.k3 = j.value("k3", 0.0);
  in.k4 = j.value("k4", 0.0);
  in.k_total = j.value("k_total", 0.0);
  in.eps_al = j.value("eps_al", 0.0);
  in.theta_star_sq = j.value("theta_star_sq", 0.0);
  in.eps_sn = j.value("eps_sn", 0.0);
  in.e_theta4 = j.value("e_theta4", 0.0);
  if (j.contains("log_gamma")) in.log_gamma = j.at("log_gamma").get<double>();
  if (j.contains("log_eps_sn")) in.log_eps_sn = j.at("log_eps_sn").get<double>();
  return in;
}

nlohmann::json BoundInputs::to_json() const {
  nlohmann::json j{{"dim", dim},       {"e_x0_sq", e_x0_sq},
                   {"K", K},           {"mu", mu},
                   {"T", T},           {"epsilon", epsilon},
                   {"gamma", gamma},   {"alpha", alpha},
                   {"zeta", zeta},     {"k1", k1},
                   {"k3", k3},         {"k4", k4},
                   {"k_total", k_total}, {"eps_al", eps_al},
                   {"theta_star_sq", theta_star_sq}, {"eps_sn", eps_sn},
                   {"e_theta4", e_theta4}};
  if (log_gamma) j["log_gamma"] = *log_gamma;
  if (log_eps_sn) j["log_eps_sn"] = *log_eps_sn;
  return j;
}

double em_moment_bound_log(const BoundInputs& in, int p) {
  check_common(in);
  check_p(p);
  return moment_log_at(in, p, in.T);
}

double em_moment_bound(const BoundInputs& in, int p) {
  return safe_exp(em_moment_bound_log(in, p));
}

double em_overshoot_bound_log(const BoundInputs& in, int p) {
  check_common(in);
  check_p(p);
  return overshoot_log_at(in, p);
}

double em_overshoot_bound(const BoundInputs& in, int p) {
  return safe_exp(em_overshoot_bound_log(in, p));
}

double c_early_stop(const BoundInputs& in) {
  check_common(in);
  return 2.0 * (std::sqrt(in.e_x0_sq) + std::sqrt(static_cast<double>(in.dim)));
}

double c_convergence(const BoundInputs& in) {
  check_common(in);
  return std::sqrt(2.0) * (std::sqrt(in.e_x0_sq) + std::sqrt(static_cast<double>(in.dim)));
}

double c_score_error_log(const BoundInputs& in) {
  check_common(in);
  check_window(in);
  return log_c3_at(in, in.T, in.epsilon);
}

double c_discretization_log(const BoundInputs& in, DiscretizationRate rate) {
  check_common(in);
  check_window(in);
  return rate == DiscretizationRate::sqrt_gamma ? log_c4_sqrt_at(in, in.T, in.epsilon)
                                                : log_c4_holder_at(in, in.T, in.epsilon);
}

nlohmann::json BoundBreakdown::to_json() const {
  nlohmann::json jt = nlohmann::json::object();
  for (const auto& t : terms)
    jt[t.name] = {{"value", t.saturated ? nlohmann::json("inf") : nlohmann::json(t.value)},
                  {"log_value", t.log_value},
                  {"saturated", t.saturated}};
  return nlohmann::json{
      {"rate", rate == DiscretizationRate::sqrt_gamma ? "sqrt_gamma" : "holder"},
      {"terms", jt},
      {"total", saturated ? nlohmann::json("inf") : nlohmann::json(total)},
      {"saturated", saturated}};
}

BoundBreakdown w2_error_budget(const BoundInputs& in, DiscretizationRate rate) {
  check_common(in);
  check_window(in);
  check_gamma(in);
  if (!(in.mu > 0.0)) throw input_error("bounds: mu must be positive");

  const double ib = beta_integral_range(in.epsilon, in.T, in.mu, in.K);
  const double log_eps_sn = in.log_eps_sn ? *in.log_eps_sn : std::log(in.eps_sn);
  const double log_gamma = in.log_gamma ? *in.log_gamma : std::log(in.gamma);

  BoundBreakdown out;
  out.rate = rate;
  out.terms[0] =
      make_term("early_stop", std::log(c_early_stop(in)) + 0.5 * std::log(in.epsilon));
  out.terms[1] =
      make_term("convergence", std::log(c_convergence(in)) - 2.0 * ib - in.epsilon);
  out.terms[2] = make_term("score_error", log_c3_at(in, in.T, in.epsilon) + 0.5 * log_eps_sn);
  const double lc4 = rate == DiscretizationRate::sqrt_gamma
                         ? log_c4_sqrt_at(in, in.T, in.epsilon)
                         : log_c4_holder_at(in, in.T, in.epsilon);
  const double gpow = rate == DiscretizationRate::sqrt_gamma ? 0.5 : in.alpha;
  out.terms[3] = make_term("discretization", lc4 + gpow * log_gamma);

  out.total = 0.0;
  for (const auto& t : out.terms) {
    out.total += t.value;
    out.saturated = out.saturated || t.saturated;
  }
  return out;
}

nlohmann::json DeltaThresholds::to_json() const {
  return nlohmann::json{{"delta", delta},
                        {"epsilon_delta", epsilon_delta},
                        {"t_delta", t_delta},
                        {"t_bar", t_bar},
                        {"plug_T", plug_T},
                        {"plug_epsilon", plug_epsilon},
                        {"eps_sn_delta", eps_sn_delta},
                        {"gamma_delta", gamma_delta},
                        {"gamma_tilde_delta", gamma_tilde_delta},
                        {"log_eps_sn_delta", log_eps_sn_delta},
                        {"log_gamma_delta", log_gamma_delta},
                        {"log_gamma_tilde_delta", log_gamma_tilde_delta}};
}

DeltaThresholds delta_thresholds(const BoundInputs& in, double delta) {
  check_common(in);
  if (!(delta > 0.0)) throw input_error("thresholds: delta must be positive");
  if (!(in.mu > 0.0)) throw input_error("thresholds: mu must be positive");

  DeltaThresholds th;
  th.delta = delta;
  const double root_sum = std::sqrt(in.e_x0_sq) + std::sqrt(static_cast<double>(in.dim));
  th.epsilon_delta = delta * delta / (64.0 * root_sum * root_sum);
  th.plug_epsilon = 0.5 * th.epsilon_delta;
  th.t_bar = t_bar(in.mu, in.K);

  // Horizon threshold: the convergence term drops below delta/4 once
  //   ln A_T + (K/mu + 1)/A_T > ln(4 sqrt2 root_sum / delta)
  //                             + 2 int_0^eps beta + K/mu + 1 - eps,
  // with A_T = mu (e^{2T} - 1) + 1. The left side increases for T past the
  // sign change of beta, so bisection on [t_bar, t_bar + 200] suffices for
  // every representable delta.
  const double kmu1 = in.K / in.mu + 1.0;
  const double rhs = std::log(4.0 * std::sqrt(2.0) * root_sum / delta) +
                     2.0 * beta_integral(th.plug_epsilon, in.mu, in.K) + kmu1 -
                     th.plug_epsilon;
  const auto lhs = [&](double T) {
    const double D = in.mu + (1.0 - in.mu) * std::exp(-2.0 * T);
    const double logA = 2.0 * T + std::log(D);
    const double invA = std::exp(-2.0 * T) / D;
    return logA + kmu1 * invA;
  };
  double lo = th.t_bar, hi = th.t_bar + 200.0;
  if (lhs(hi) < rhs)
    throw numeric_error("thresholds: horizon bracket exhausted at t_bar + 200 (delta too small)");
  if (lhs(lo) >= rhs) {
    th.t_delta = lo;  // already accurate at the bracket base
  } else {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (lhs(mid) < rhs ? lo : hi) = mid;
    }
    th.t_delta = 0.5 * (lo + hi);
  }
  th.plug_T = th.t_delta + 1.0;

  BoundInputs at = in;
  at.T = th.plug_T;
  const double span = th.plug_T - th.plug_epsilon;
  const double ib = beta_integral_range(th.plug_epsilon, th.plug_T, in.mu, in.K);

  th.log_eps_sn_delta = std::log(delta * delta * in.zeta / 32.0) -
                        2.0 * (1.0 + in.zeta) * span + 4.0 * ib;
  const double rate2 =
      1.0 + 1.5 * in.zeta + 2.0 * in.k3 * (1.0 + 2.0 * std::pow(th.plug_T, in.alpha));
  th.log_gamma_delta = std::log(delta * delta * in.zeta / 16.0) - std::log(span) -
                       2.0 * rate2 * span - 2.0 * log_bracket_sqrt_rate(at);
  const double t2a = std::pow(th.plug_T, 2.0 * in.alpha);
  const double rate4 =
      1.0 + in.zeta +
      in.k3 * (1.0 + 2.0 * std::pow(th.plug_T, in.alpha) + 4.0 * in.k3 * (1.0 + 4.0 * t2a));
  const double raw = (1.0 / in.alpha) * std::log(delta / (4.0 * std::sqrt(2.0))) -
                     (0.5 / in.alpha) * std::log(span) - (2.0 / in.alpha) * rate4 * span -
                     (0.5 / in.alpha) * log_bracket_holder(at);
  th.log_gamma_tilde_delta = std::min(raw, 0.0);  // step sizes above 1 are never used

  th.eps_sn_delta = std::exp(th.log_eps_sn_delta);
  th.gamma_delta = std::exp(th.log_gamma_delta);
  th.gamma_tilde_delta = std::exp(th.log_gamma_tilde_delta);
  return th;
}

}  // namespace semiscore
