#pragma once

// Linear-in-parameter score approximation. Features are tensor products of a
// Chebyshev basis in scaled time tau = 2t/T - 1 with frozen ridge units in x:
// random tanh(w.x + b) units, optionally the raw coordinates (so targets with
// an exactly linear score are representable). Parameters enter linearly, so
// regularity constants follow from the frozen weights:
//   time:    |T_j'| <= j^2 on [-1,1]  ->  per-feature slope 2 j^2 / T
//   space:   per-unit slope |w| (tanh) or 1 (linear)
//   smooth:  |tanh''| <= 4/(3 sqrt 3)
// Constants involving a unit bound treat tanh units globally and linear units
// on |x| <= x_ref; a pure-tanh set is globally valid.

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "semiscore/potentials.hpp"
#include "semiscore/sampler.hpp"

namespace semiscore {

struct FeatureSet {
  int dim = 1;
  double T = 1.0;
  int cheb_degree = 0;  // time basis T_0 .. T_degree
  Eigen::MatrixXd w;    // tanh units x dim
  Eigen::VectorXd b;
  bool linear_units = false;
  double x_ref = 12.0;  // validity radius for linear-unit constants

  static FeatureSet make(int dim, double T, int cheb_degree, int tanh_units, bool linear_units,
                         std::uint64_t seed, double w_scale = 0.6, double b_scale = 4.0);

  int units() const { return static_cast<int>(w.rows()) + (linear_units ? dim : 0); }
  int count() const { return (cheb_degree + 1) * units(); }

  // Ridge-unit values rho(x) (length units()).
  void unit_values(const Eigen::VectorXd& x, Eigen::VectorXd& rho) const;
  // Chebyshev values at clamped tau.
  void time_basis(double t, Eigen::VectorXd& c) const;
  void features(double t, const Eigen::VectorXd& x, Eigen::VectorXd& phi) const;

  nlohmann::json to_json() const;
  static FeatureSet from_json(const nlohmann::json& j);
};

struct RegularityConstants {
  double k1, k2, k3, k4, k_total;
};

struct ScoreModel {
  FeatureSet features;
  Eigen::MatrixXd theta;  // dim x count
  double alpha = 1.0;     // time-Hoelder exponent of the family
  double ridge = 0.0;     // regularization actually applied in the fit
  double fit_residual = -1.0;  // mean squared residual per sample

  Eigen::VectorXd eval(double t, const Eigen::VectorXd& x) const;
  // Same features under a caller-supplied parameter matrix.
  Eigen::VectorXd eval_with(const Eigen::MatrixXd& th, double t,
                            const Eigen::VectorXd& x) const;

  RegularityConstants constants() const;
  double theta_norm() const { return theta.norm(); }

  // Batch adapter for the integrator; collapses the time basis once per step.
  BatchScore as_batch_score() const;

  nlohmann::json to_json() const;
  static ScoreModel from_json(const nlohmann::json& j);
};

struct FitData {
  Eigen::VectorXd t;
  Eigen::MatrixXd x;  // n x dim
  Eigen::MatrixXd y;  // n x dim, exact score targets
};

// Pairs (t_i, X_{t_i}) with t stratified over [eps, T] and exact noised-score
// targets; mixture targets only (the exact score is closed-form there).
FitData make_training_data(const Potential& p, double T, double eps, int n, std::uint64_t seed);

// Ridge least squares on the feature expansion. Data rows are sorted into a
// canonical order first so the accumulation is permutation-invariant bit for
// bit. ridge_rel scales the mean Gram diagonal; the applied value is reported
// on the model.
ScoreModel fit_score_model(const FeatureSet& fs, const FitData& data, double ridge_rel = 1e-10);

// Large fixed-design fit standing in for the infinite-data solution.
ScoreModel reference_model(const FeatureSet& fs, const Potential& p, double T, double eps,
                           int n_points = 1000000, double ridge_rel = 1e-10);

// Mean squared parameter distance to the reference over refit seeds.
double epsilon_al_estimate(const FeatureSet& fs, const Potential& p, double T, double eps,
                           int n_data, int refits, const ScoreModel& reference,
                           double ridge_rel = 1e-10, std::uint64_t seed0 = 1);

struct ScoreErrorEstimate {
  double value = 0.0;    // E sum_j gamma |exact - model|^2 along the driven path
  double stderr_mc = 0.0;
  int trajectories = 0;
};

// Monte-Carlo estimate of the along-path squared score error, integrating on
// the same grid the sampler uses and driving with the model itself.
ScoreErrorEstimate epsilon_sn_estimate(const ScoreModel& model, const Potential& p,
                                       const SamplerConfig& cfg);

}  // namespace semiscore
