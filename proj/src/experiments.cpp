#include "semiscore/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "semiscore/convexity.hpp"
#include "semiscore/errors.hpp"
#include "semiscore/forward.hpp"
#include "semiscore/wasserstein.hpp"

namespace semiscore {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<double> finite_column(const Eigen::MatrixXd& m) {
  std::vector<double> v;
  v.reserve(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (std::isfinite(m(i, 0))) v.push_back(m(i, 0));
  return v;
}

double w2_between(const std::string& method, const Eigen::MatrixXd& a,
                  const Eigen::MatrixXd& b) {
  if (method == "quantile") {
    if (a.cols() != 1 || b.cols() != 1)
      throw input_error("sweep: quantile distance needs 1-D samples");
    return w2_quantile_1d(finite_column(a), finite_column(b));
  }
  if (method == "assignment") {
    const Eigen::Index k = std::min(a.rows(), b.rows());
    return w2_assignment(a.topRows(k), b.topRows(k));
  }
  throw input_error("sweep: unknown distance method " + method);
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  s.potential = Potential::from_json(j.at("potential"));
  if (j.contains("gammas")) s.gammas = j.at("gammas").get<std::vector<double>>();
  if (j.contains("epsilons")) s.epsilons = j.at("epsilons").get<std::vector<double>>();
  if (j.contains("horizons")) s.horizons = j.at("horizons").get<std::vector<double>>();
  s.n = j.value("n", 10000);
  s.replicates = j.value("replicates", 1);
  s.score = j.value("score", std::string("exact"));
  s.model_path = j.value("model_path", std::string());
  s.w2_method = j.value("w2_method", std::string("quantile"));
  s.measure_eps_sn = j.value("measure_eps_sn", false);
  s.seed = j.value("seed", std::uint64_t{0});
  s.threads = j.value("threads", 1);
  if (s.gammas.empty() || s.epsilons.empty() || s.horizons.empty())
    throw input_error("sweep: empty grid");
  if (s.replicates < 1) throw input_error("sweep: replicates must be >= 1");
  if (s.n < 2) throw input_error("sweep: need at least two samples");
  if (s.score != "exact" && s.score != "model")
    throw input_error("sweep: score must be 'exact' or 'model'");
  return s;
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json j{{"potential", potential.to_json()},
                   {"gammas", gammas},
                   {"epsilons", epsilons},
                   {"horizons", horizons},
                   {"n", n},
                   {"replicates", replicates},
                   {"score", score},
                   {"model_path", model_path},
                   {"w2_method", w2_method},
                   {"measure_eps_sn", measure_eps_sn},
                   {"seed", seed},
                   {"threads", threads}};
  if (model) j["model"] = model->to_json();
  return j;
}

RateFit fit_rate_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw input_error("rate fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  RateFit fit;
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 3) throw input_error("rate fit: fewer than three usable points");
  const double n = fit.points;
  double mx = 0, my = 0;
  for (int i = 0; i < fit.points; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < fit.points; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw input_error("rate fit: needs at least two distinct x");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (int i = 0; i < fit.points; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  fit.stderr_slope = fit.points > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return fit;
}

BatchScore exact_mixture_batch(const Potential& p) {
  if (p.family != Family::gaussian_mixture)
    throw input_error("exact drift: closed-form score needs a mixture target");
  Potential pot = p;
  if (pot.dim == 1) {
    return [pot](double t, const Eigen::Ref<const Eigen::MatrixXd>& y,
                 Eigen::Ref<Eigen::MatrixXd> out) {
      const MixtureScore1d s(pot, t);
      for (Eigen::Index i = 0; i < y.rows(); ++i) out(i, 0) = s(y(i, 0));
    };
  }
  return [pot](double t, const Eigen::Ref<const Eigen::MatrixXd>& y,
               Eigen::Ref<Eigen::MatrixXd> out) {
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      out.row(i) = mixture_score(pot, t, y.row(i).transpose()).transpose();
  };
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  if (spec.score == "model" && !spec.model)
    throw input_error("sweep: score = 'model' but no model was loaded");
  if (spec.score == "exact" && spec.potential.family != Family::gaussian_mixture)
    throw input_error("sweep: exact score needs a mixture target");
  if (spec.measure_eps_sn && (spec.score != "model"))
    throw input_error("sweep: eps_sn measurement applies to model-driven runs");

  struct Job {
    double T, epsilon, gamma;
    int replicate;
  };
  std::vector<Job> jobs;
  for (double T : spec.horizons)
    for (double eps : spec.epsilons)
      for (double g : spec.gammas)
        for (int r = 0; r < spec.replicates; ++r) jobs.push_back({T, eps, g, r});

  const BatchScore drive =
      spec.score == "exact" ? exact_mixture_batch(spec.potential) : spec.model->as_batch_score();

  // Target draw and its same-law twin, shared across the grid per replicate.
  std::vector<Eigen::MatrixXd> ref(spec.replicates), twin(spec.replicates);
  std::vector<double> baseline(spec.replicates);
  for (int r = 0; r < spec.replicates; ++r) {
    ref[r] = sample_target(spec.potential, spec.n, mix_seed(spec.seed, 2 * r));
    twin[r] = sample_target(spec.potential, spec.n, mix_seed(spec.seed, 2 * r + 1));
    baseline[r] = w2_between(spec.w2_method, ref[r], twin[r]);
  }

  std::vector<SweepRow> rows(jobs.size());
  const int pool = std::max(1, std::min<int>(spec.threads, static_cast<int>(jobs.size())));
  const int inner = jobs.size() == 1 ? std::max(1, spec.threads) : 1;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string fail_what;
  std::mutex fail_mu;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) return;
      const Job& job = jobs[i];
      try {
        SamplerConfig cfg;
        cfg.T = job.T;
        cfg.epsilon = job.epsilon;
        cfg.gamma = job.gamma;
        cfg.n = spec.n;
        cfg.dim = spec.potential.dim;
        cfg.seed = mix_seed(spec.seed, 1000003ull + job.replicate);
        cfg.threads = inner;
        const BackwardResult res = backward_em(cfg, drive);

        SweepRow row;
        row.gamma = job.gamma;
        row.epsilon = job.epsilon;
        row.T = job.T;
        row.replicate = job.replicate;
        row.n = spec.n;
        row.steps = res.steps;
        row.diverged = static_cast<int>(res.diverged.size());
        row.w2_raw = w2_between(spec.w2_method, res.samples, ref[job.replicate]);
        row.w2_baseline = baseline[job.replicate];
        row.w2_corrected = std::max(row.w2_raw - row.w2_baseline, 0.0);
        if (spec.measure_eps_sn) {
          SamplerConfig scfg = cfg;
          scfg.n = std::min(spec.n, 2000);  // score-error integral needs fewer paths
          scfg.threads = 1;
          row.eps_sn = epsilon_sn_estimate(*spec.model, spec.potential, scfg).value;
        }
        rows[i] = row;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!failed.exchange(true)) fail_what = e.what();
      }
    }
  };

  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failed.load()) throw numeric_error("sweep job failed: " + fail_what);

  SweepResult out;
  out.rows = std::move(rows);
  std::vector<double> gx, wy;
  for (const auto& row : out.rows) {
    gx.push_back(row.gamma);
    wy.push_back(row.w2_corrected);
  }
  int distinct = 1;
  for (std::size_t i = 1; i < spec.gammas.size(); ++i)
    if (spec.gammas[i] != spec.gammas[0]) ++distinct;
  if (distinct >= 2) {
    try {
      out.gamma_rate = fit_rate_loglog(gx, wy);
      out.has_rate = true;
    } catch (const input_error&) {
      out.has_rate = false;  // degenerate data (e.g. all corrected values zero)
    }
  }
  return out;
}

namespace {

struct FamilyCase {
  std::string name;
  Potential p;
};

std::vector<FamilyCase> builtin_cases() {
  std::vector<FamilyCase> cases;
  cases.push_back({"two_mode_mixture", Potential::benchmark_mixture()});

  Potential hn;
  hn.family = Family::symmetric_modified_half_normal;
  hn.dim = 1;
  hn.xi = 1.0;
  cases.push_back({"symmetric_modified_half_normal", hn});

  Potential dw;
  dw.family = Family::double_well;
  dw.dim = 1;
  cases.push_back({"double_well", dw});

  Potential en;
  en.family = Family::elastic_net;
  en.dim = 2;
  cases.push_back({"elastic_net", en});

  Potential mn;
  mn.family = Family::max_norm;
  mn.dim = 2;
  cases.push_back({"max_norm", mn});

  Potential mnc;
  mnc.family = Family::max_norm_nonconvex;
  mnc.dim = 2;
  cases.push_back({"max_norm_nonconvex", mnc});
  return cases;
}

}  // namespace

nlohmann::json verify_assumptions(int pairs, std::uint64_t seed) {
  constexpr double kTol = 1e-9;
  nlohmann::json out;
  bool all_ok = true;
  int case_index = 0;
  for (const auto& c : builtin_cases()) {
    const SemiconvexityParams sc = semiconvexity_params(c.p);
    std::vector<double> inside, outside;
    if (sc.R > 0.0)
      for (double f : {0.15, 0.4, 0.65, 0.9}) inside.push_back(f * sc.R);
    const double base = sc.R > 0.0 ? sc.R : 0.05;
    for (double f : {1.02, 1.2, 1.7, 2.5, 4.0}) outside.push_back(base * f + (sc.R > 0.0 ? 0.0 : f));
    std::vector<double> all = inside;
    all.insert(all.end(), outside.begin(), outside.end());

    const auto profile = empirical_kappa(c.p, all, pairs, seed + 11 * case_index);
    double global_min = profile.front().value;
    double outside_min = std::numeric_limits<double>::infinity();
    for (const auto& pt : profile) {
      global_min = std::min(global_min, pt.value);
      if (pt.r > sc.R) outside_min = std::min(outside_min, pt.value);
    }
    const bool global_ok = global_min >= -sc.K - kTol;
    const bool outside_ok = outside_min >= sc.mu - kTol;

    // Subgradient sanity on target draws: finite, and finite potential value.
    const Eigen::MatrixXd xs = sample_target(c.p, 64, seed + 1000 + case_index);
    bool grad_ok = true;
    for (Eigen::Index i = 0; i < xs.rows() && grad_ok; ++i) {
      const Eigen::VectorXd g = subgradient(c.p, xs.row(i).transpose());
      grad_ok = g.allFinite() && std::isfinite(potential_value(c.p, xs.row(i).transpose()));
    }

    const bool ok = global_ok && outside_ok && grad_ok;
    all_ok = all_ok && ok;
    out[c.name] = {{"K", sc.K},
                   {"mu", sc.mu},
                   {"R", sc.R},
                   {"global_min_kappa", global_min},
                   {"outside_min_kappa", outside_min},
                   {"global_one_sided_ok", global_ok},
                   {"outside_strong_convexity_ok", outside_ok},
                   {"subgradient_ok", grad_ok},
                   {"passed", ok}};
    ++case_index;
  }
  out["passed"] = all_ok;
  out["pairs"] = pairs;
  return out;
}

}  // namespace semiscore
