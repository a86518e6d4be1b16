#pragma once

// Euler-Maruyama integrator for the time-reversed denoising dynamics
//   Y_{j+1} = Y_j + gamma (Y_j + 2 s(T - t_j, Y_j)) + sqrt(2 gamma) Z_{j+1},
// started from a standard normal and stopped at t_J, J = floor((T-eps)/gamma).
// Noise is keyed on (seed, trajectory, step): batches replay bit-exactly for
// any thread count and any trajectory subset.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace semiscore {

struct SamplerConfig {
  double T = 8.0;
  double epsilon = 1e-2;  // early-stopping gap, in (0, T)
  double gamma = 1e-3;    // step size, any value in (0, 1)
  int n = 1;              // trajectories
  int dim = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  double divergence_guard = 1e8;  // |state| beyond this aborts the trajectory
};

// J = floor((T - eps)/gamma), with a one-ulp-scale nudge so exact ratios do
// not fall to J-1 through rounding.
long step_count(double T, double epsilon, double gamma);

// {0, gamma, ..., J gamma}.
std::vector<double> time_grid(double T, double epsilon, double gamma);

// Batch drift evaluation: fill out(i) = s(t_forward, y(i)) for every row.
// Matrices are n x dim slices.
using BatchScore =
    std::function<void(double t_forward, const Eigen::Ref<const Eigen::MatrixXd>& y,
                       Eigen::Ref<Eigen::MatrixXd> out)>;

struct BackwardResult {
  Eigen::MatrixXd samples;  // n x dim; rows of diverged trajectories are NaN
  struct Divergence {
    std::int64_t trajectory;
    long step;
    double magnitude;
  };
  std::vector<Divergence> diverged;
  long steps = 0;
};

BackwardResult backward_em(const SamplerConfig& cfg, const BatchScore& score);

// Per-step hook on a single-threaded run: called after evaluating the score,
// before the step is applied. Used for along-path functionals.
using StepObserver = std::function<void(long step, double t_forward,
                                        const Eigen::Ref<const Eigen::MatrixXd>& y,
                                        const Eigen::Ref<const Eigen::MatrixXd>& s)>;

BackwardResult backward_em_observed(const SamplerConfig& cfg, const BatchScore& score,
                                    const StepObserver& observer);

}  // namespace semiscore
