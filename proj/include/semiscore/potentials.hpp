#pragma once

// Target potential families U with non-smooth terms. Gradients are replaced by
// the minimal-norm subgradient at kinks (0 at the bottom of |.|-type kinks),
// which keeps every selection monotone-compatible with the convex pieces.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace semiscore {

enum class Family {
  gaussian_mixture,
  symmetric_modified_half_normal,  // xi x^2 + |x|, 1-D
  double_well,                     // |x|^4 - |x|^2
  elastic_net,                     // |x|^2 + sum_i |x_i|
  max_norm,                        // max(|x|, |x|^2)
  max_norm_nonconvex,              // max(|x|, |x|^2) - |x|^2 / 2
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// (K, mu, R): -K lower monotonicity bound for pairs closer than R, mu-strong
// monotonicity for pairs at distance >= R.
struct SemiconvexityParams {
  double K = 0.0;
  double mu = 0.0;
  double R = 0.0;
};

struct Potential {
  Family family = Family::gaussian_mixture;
  int dim = 1;

  // gaussian_mixture: isotropic components, equal-length arrays.
  std::vector<double> weights;
  Eigen::MatrixXd means;  // components x dim
  std::vector<double> stds;

  // symmetric_modified_half_normal
  double xi = 1.0;

  // Optional user-supplied (K, mu, R); required for mixtures the closed forms
  // do not cover, otherwise overrides the built-in values.
  std::optional<SemiconvexityParams> semiconvexity_override;

  static Potential from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Two equal-weight 1-D modes at +-2 with per-mode variance 9.
  static Potential benchmark_mixture();
};

double potential_value(const Potential& p, const Eigen::VectorXd& x);
Eigen::VectorXd subgradient(const Potential& p, const Eigen::VectorXd& x);
SemiconvexityParams semiconvexity_params(const Potential& p);

// E|X|^2 under exp(-U)/Z: closed form for mixtures, 1-D (or radial/separable)
// quadrature otherwise.
double second_moment(const Potential& p);

// n draws, one row per sample. Deterministic in (p, n, seed).
Eigen::MatrixXd sample_target(const Potential& p, int n, std::uint64_t seed);

}  // namespace semiscore
