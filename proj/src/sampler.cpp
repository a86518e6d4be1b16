#include "semiscore/sampler.hpp"

#include <cmath>
#include <thread>

#include "semiscore/errors.hpp"
#include "semiscore/rng.hpp"

namespace semiscore {

namespace {

void check_config(const SamplerConfig& cfg) {
  if (!(cfg.T > 0.0)) throw input_error("sampler: T must be positive");
  if (!(cfg.epsilon > 0.0) || cfg.epsilon >= cfg.T)
    throw input_error("sampler: epsilon must lie in (0, T)");
  if (!(cfg.gamma > 0.0) || cfg.gamma >= 1.0)
    throw input_error("sampler: gamma must lie in (0, 1)");
  if (cfg.n < 1) throw input_error("sampler: n must be positive");
  if (cfg.dim < 1) throw input_error("sampler: dim must be positive");
}

// Counter layout inside a trajectory stream: block 0 seeds the start state,
// step j uses blocks at (j+1) << 21. Supports dim up to 2^22.
constexpr std::uint64_t kStepShift = 21;

struct Slice {
  Eigen::MatrixXd y, s;
  std::vector<BackwardResult::Divergence> diverged;
  std::vector<char> dead;
};

void run_slice(const SamplerConfig& cfg, const BatchScore& score, int lo, int hi,
               Eigen::MatrixXd& samples, std::vector<BackwardResult::Divergence>& diverged,
               const StepObserver* observer, long J) {
  const int rows = hi - lo;
  const int d = cfg.dim;
  Slice sl;
  sl.y.resize(rows, d);
  sl.s.resize(rows, d);
  sl.dead.assign(rows, 0);
  std::vector<double> z(d);

  for (int i = 0; i < rows; ++i) {
    CounterRng rng(cfg.seed, rng_stream(RngDomain::trajectory, lo + i));
    rng.fill_normal(0, z.data(), d);
    for (int k = 0; k < d; ++k) sl.y(i, k) = z[k];
  }

  const double root = std::sqrt(2.0 * cfg.gamma);
  for (long j = 0; j < J; ++j) {
    const double t_fwd = cfg.T - j * cfg.gamma;
    score(t_fwd, sl.y, sl.s);
    if (observer) (*observer)(j, t_fwd, sl.y, sl.s);
    const std::uint64_t base = static_cast<std::uint64_t>(j + 1) << kStepShift;
    for (int i = 0; i < rows; ++i) {
      if (sl.dead[i]) continue;
      CounterRng rng(cfg.seed, rng_stream(RngDomain::trajectory, lo + i));
      rng.fill_normal(base, z.data(), d);
      double mag2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double yk = sl.y(i, k);
        const double next = yk + cfg.gamma * (yk + 2.0 * sl.s(i, k)) + root * z[k];
        sl.y(i, k) = next;
        mag2 += next * next;
      }
      if (!std::isfinite(mag2) || mag2 > cfg.divergence_guard * cfg.divergence_guard) {
        sl.dead[i] = 1;
        sl.diverged.push_back({lo + i, j, std::sqrt(mag2)});
        for (int k = 0; k < d; ++k) sl.y(i, k) = std::nan("");
      }
    }
  }

  samples.middleRows(lo, rows) = sl.y;
  if (!sl.diverged.empty())
    diverged.insert(diverged.end(), sl.diverged.begin(), sl.diverged.end());
}

BackwardResult run(const SamplerConfig& cfg, const BatchScore& score,
                   const StepObserver* observer) {
  check_config(cfg);
  const long J = step_count(cfg.T, cfg.epsilon, cfg.gamma);
  BackwardResult res;
  res.steps = J;
  res.samples.resize(cfg.n, cfg.dim);

  int threads = observer ? 1 : std::max(1, cfg.threads);
  threads = std::min<int>(threads, cfg.n);
  if (threads == 1) {
    run_slice(cfg, score, 0, cfg.n, res.samples, res.diverged, observer, J);
    return res;
  }

  std::vector<std::vector<BackwardResult::Divergence>> div(threads);
  std::vector<std::thread> pool;
  const int chunk = (cfg.n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk, hi = std::min(cfg.n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, t, lo, hi] {
      run_slice(cfg, score, lo, hi, res.samples, div[t], nullptr, J);
    });
  }
  for (auto& th : pool) th.join();
  for (auto& v : div) res.diverged.insert(res.diverged.end(), v.begin(), v.end());
  return res;
}

}  // namespace

long step_count(double T, double epsilon, double gamma) {
  if (!(gamma > 0.0) || gamma >= 1.0) throw input_error("step_count: gamma must lie in (0, 1)");
  if (!(epsilon > 0.0) || epsilon >= T) throw input_error("step_count: epsilon must lie in (0, T)");
  const double r = (T - epsilon) / gamma;
  return static_cast<long>(std::floor(r + r * 1e-12 + 1e-12));
}

std::vector<double> time_grid(double T, double epsilon, double gamma) {
  const long J = step_count(T, epsilon, gamma);
  std::vector<double> t(J + 1);
  for (long j = 0; j <= J; ++j) t[j] = j * gamma;
  return t;
}

BackwardResult backward_em(const SamplerConfig& cfg, const BatchScore& score) {
  return run(cfg, score, nullptr);
}

BackwardResult backward_em_observed(const SamplerConfig& cfg, const BatchScore& score,
                                    const StepObserver& observer) {
  return run(cfg, score, &observer);
}

}  // namespace semiscore
