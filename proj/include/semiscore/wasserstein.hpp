#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace semiscore {

// Quadratic transport distance between two empirical 1-D clouds via sorted
// (order-statistic) coupling. Unequal counts are handled by evaluating both
// empirical quantile functions on a common midpoint grid.
double w2_quantile_1d(std::vector<double> a, std::vector<double> b);

// Exact empirical distance in any dimension: min-cost perfect matching under
// squared Euclidean cost (shortest augmenting paths). Requires equal counts,
// n <= 2048.
double w2_assignment(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Closed form for isotropic Gaussians N(m, s^2 I).
double w2_gaussian_isotropic(const Eigen::VectorXd& m1, double s1,
                             const Eigen::VectorXd& m2, double s2);

struct W2Report {
  double value = 0.0;
  double stderr_boot = 0.0;
  int n_a = 0, n_b = 0;
  int bootstrap = 0;
};

// Resamples both clouds with replacement; stderr of the recomputed distance.
// method: 0 quantile (1-D), 1 assignment.
W2Report w2_bootstrap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int method,
                      int replicates, std::uint64_t seed);

}  // namespace semiscore
