#pragma once

// Experiment orchestration: convergence sweeps over (gamma, epsilon, T) grids
// with replicate-paired baseline correction, log-log rate regression, and the
// target-potential property suite.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "semiscore/potentials.hpp"
#include "semiscore/sampler.hpp"
#include "semiscore/scorenet.hpp"

namespace semiscore {

struct ExperimentSpec {
  Potential potential;
  std::vector<double> gammas{1e-2};
  std::vector<double> epsilons{1e-2};
  std::vector<double> horizons{8.0};
  int n = 10000;
  int replicates = 1;
  std::string score = "exact";  // "exact" (closed-form mixture) or "model"
  std::string model_path;       // informational; the caller resolves it
  std::optional<ScoreModel> model;
  std::string w2_method = "quantile";  // or "assignment"
  bool measure_eps_sn = false;
  std::uint64_t seed = 0;
  int threads = 1;

  static ExperimentSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;  // canonical form, used for config hashing
};

struct SweepRow {
  double gamma = 0, epsilon = 0, T = 0;
  int replicate = 0;
  int n = 0;
  double w2_raw = 0;       // sampler output vs a fresh target draw
  double w2_baseline = 0;  // two independent target draws of the same size
  double w2_corrected = 0; // max(raw - baseline, 0)
  double eps_sn = -1;      // along-path score error; -1 when not measured
  long steps = 0;
  int diverged = 0;
};

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double stderr_slope = 0;
  int points = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  RateFit gamma_rate;
  bool has_rate = false;
};

// Least squares of log(y) on log(x); pairs with nonpositive entries are
// dropped. Needs at least three surviving points and two distinct x.
RateFit fit_rate_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Exact mixture score as a sampler drift.
BatchScore exact_mixture_batch(const Potential& p);

// Runs the full grid x replicate matrix. Jobs are dispatched to a pool of
// spec.threads workers; rows come back in grid order regardless of scheduling.
// Trajectory noise and target draws are paired per replicate across grid
// points (common random numbers), so grid contrasts are low-variance.
SweepResult run_sweep(const ExperimentSpec& spec);

// Pair-separation property suite for the built-in potential families:
// global one-sided bound -K, strong convexity mu past the radius R, and
// subgradient sanity. Returns per-family results; "passed" aggregates.
nlohmann::json verify_assumptions(int pairs, std::uint64_t seed);

}  // namespace semiscore
