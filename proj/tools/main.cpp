// Command line front end: potential constants, score profiles, sampling,
// score-model fitting, transport distances, error certificates, convergence
// sweeps, and the target-assumption property suite.
//
// Exit codes: 0 success, 2 invalid input or violated invariant, 3 numerical
// failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "semiscore/bounds.hpp"
#include "semiscore/convexity.hpp"
#include "semiscore/errors.hpp"
#include "semiscore/experiments.hpp"
#include "semiscore/forward.hpp"
#include "semiscore/potentials.hpp"
#include "semiscore/report.hpp"
#include "semiscore/sampler.hpp"
#include "semiscore/scorenet.hpp"
#include "semiscore/wasserstein.hpp"

namespace {

using nlohmann::json;
using namespace semiscore;

struct GlobalOpts {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir = ".";
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return (std::filesystem::path(g.out_dir) / name).string();
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// Numeric rows of a CSV; '#' comment lines and the header row are skipped.
Eigen::MatrixXd read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    bool ok = true;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used])))
          ++used;
        if (used != field.size()) throw std::invalid_argument(field);
        row.push_back(v);
      } catch (const std::exception&) {
        ok = false;
        break;
      }
    }
    if (ok && !row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw input_error("no numeric rows in " + path);
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw input_error("ragged csv " + path);
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = rows[i][c];
  }
  return m;
}

Potential potential_from_args(const std::string& config, const std::string& family, int dim) {
  if (!config.empty()) return Potential::from_json(read_json_file(config));
  if (family.empty()) return Potential::benchmark_mixture();
  Potential p;
  p.family = family_from_name(family);
  p.dim = dim;
  if (p.family == Family::gaussian_mixture) return Potential::benchmark_mixture();
  return p;
}

BatchScore resolve_score(const std::string& src, const Potential& p,
                         std::optional<ScoreModel>& model_out) {
  if (src == "exact") return exact_mixture_batch(p);
  const std::string prefix = "model:";
  if (src.rfind(prefix, 0) == 0) {
    model_out = ScoreModel::from_json(read_json_file(src.substr(prefix.size())));
    if (model_out->features.dim != p.dim)
      throw input_error("score model dimension does not match the target");
    return model_out->as_batch_score();
  }
  throw input_error("score must be 'exact' or 'model:<path>'");
}

int cmd_constants(const GlobalOpts& g, const std::string& config, const std::string& family,
                  int dim) {
  const Potential p = potential_from_args(config, family, dim);
  const SemiconvexityParams sc = semiconvexity_params(p);
  const double L = sc.K + sc.mu;
  json j{{"family", family_name(p.family)},
         {"dim", p.dim},
         {"K", sc.K},
         {"mu", sc.mu},
         {"R", sc.R},
         {"L_proxy", L},
         {"mu_tilde", mu_tilde(sc.mu, L, sc.R)},
         {"second_moment", second_moment(p)}};
  if (sc.mu > 0.0) {
    j["t_bar"] = t_bar(sc.mu, sc.K);
    j["t_star"] = t_star(sc.mu, sc.K);
    j["r0"] = r0_threshold(sc.mu, L);
    j["one_sided_bound_at_0"] = beta_os_kmu(0.0, sc.mu, sc.K);
  }
  (void)g;
  emit(j);
  return 0;
}

int cmd_score_profile(const GlobalOpts& g, const std::string& config) {
  Potential p = Potential::benchmark_mixture();
  if (!config.empty()) p = Potential::from_json(read_json_file(config));
  if (p.family != Family::gaussian_mixture || p.dim != 1)
    throw input_error("score-profile needs a 1-D mixture target");
  const SemiconvexityParams sc = semiconvexity_params(p);
  const double tb = t_bar(sc.mu, sc.K);

  const std::vector<double> xs{-0.8, 0.5};
  const int nt = 500;
  const double t_hi = 10.0;

  json cfg{{"potential", p.to_json()}, {"x", xs}, {"t_points", nt}, {"t_hi", t_hi}};
  const std::uint64_t h = fnv1a64(cfg.dump());

  CsvWriter csv(out_path(g, "score_profile.csv"), {"t", "x", "score", "one_sided_bound"}, h);
  SvgPlot plot;
  plot.x_label = "t";
  plot.y_label = "score(t, x)";
  plot.vertical_marks = {tb};
  const char* colors[] = {"#1f6f8b", "#b5542e"};
  int ci = 0;
  for (double x : xs) {
    SvgSeries s;
    s.label = "x = " + format_double(x);
    s.color = colors[ci++ % 2];
    for (int i = 0; i < nt; ++i) {
      const double t = t_hi * i / (nt - 1);
      const MixtureScore1d sc1(p, t);
      const double v = sc1(x);
      csv.row_values({t, x, v, beta_os_kmu(t, sc.mu, sc.K)});
      s.x.push_back(t);
      s.y.push_back(v);
    }
    plot.series.push_back(std::move(s));
  }
  csv.close();
  write_svg_plot(out_path(g, "score_profile.svg"), plot);

  // At the far end of the horizon the noised law is standard Gaussian and the
  // score must collapse onto -x.
  for (double x : xs) {
    const MixtureScore1d sc1(p, t_hi);
    if (std::abs(sc1(x) + x) > 1e-3)
      throw input_error("score at the terminal time does not collapse to -x");
  }
  emit(json{{"t_bar", tb},
            {"csv", out_path(g, "score_profile.csv")},
            {"svg", out_path(g, "score_profile.svg")}});
  return 0;
}

int cmd_sample(const GlobalOpts& g, const std::string& config, const std::string& score) {
  const json j = read_json_file(config);
  const Potential p = Potential::from_json(j.at("potential"));
  SamplerConfig cfg;
  cfg.T = j.value("T", 8.0);
  cfg.epsilon = j.value("epsilon", 1e-2);
  cfg.gamma = j.value("gamma", 1e-3);
  cfg.n = j.value("n", 1000);
  cfg.dim = p.dim;
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.threads = j.value("threads", 1);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;

  std::optional<ScoreModel> model;
  const BatchScore drive = resolve_score(score, p, model);
  const BackwardResult res = backward_em(cfg, drive);

  json cfg_hashable{{"config", j}, {"score", score}};
  const std::uint64_t h = fnv1a64(cfg_hashable.dump());
  std::vector<std::string> cols;
  for (int k = 0; k < cfg.dim; ++k) cols.push_back("x" + std::to_string(k));
  CsvWriter csv(out_path(g, "samples.csv"), cols, h);
  std::vector<double> row(cfg.dim);
  for (Eigen::Index i = 0; i < res.samples.rows(); ++i) {
    for (int k = 0; k < cfg.dim; ++k) row[k] = res.samples(i, k);
    csv.row_values(row);
  }
  csv.close();
  emit(json{{"n", cfg.n},
            {"steps", res.steps},
            {"diverged", res.diverged.size()},
            {"csv", out_path(g, "samples.csv")}});
  return 0;
}

int cmd_fit(const GlobalOpts& g, const std::string& config) {
  const json j = read_json_file(config);
  const Potential p =
      j.contains("potential") ? Potential::from_json(j.at("potential")) : Potential::benchmark_mixture();
  const double T = j.value("T", 8.0);
  const double eps = j.value("epsilon", 1e-2);
  const int n_train = j.value("n_train", 20000);
  const double ridge_rel = j.value("ridge_rel", 1e-10);
  std::uint64_t seed = j.value("seed", std::uint64_t{1});
  if (g.seed) seed = *g.seed;

  FeatureSet fs = FeatureSet::make(
      p.dim, T, j.value("cheb_degree", 8), j.value("tanh_units", 24),
      j.value("linear_units", false), j.value("feature_seed", std::uint64_t{7}),
      j.value("w_scale", 0.6), j.value("b_scale", 4.0));

  const FitData data = make_training_data(p, T, eps, n_train, seed);
  ScoreModel model = fit_score_model(fs, data, ridge_rel);
  model.alpha = 1.0;

  json summary{{"fit_residual", model.fit_residual},
               {"ridge", model.ridge},
               {"features", fs.count()},
               {"theta_norm", model.theta_norm()}};
  const RegularityConstants rc = model.constants();
  summary["constants"] = {
      {"k1", rc.k1}, {"k2", rc.k2}, {"k3", rc.k3}, {"k4", rc.k4}, {"k_total", rc.k_total}};

  if (j.value("estimate_errors", false)) {
    const int n_ref = j.value("n_reference", 200000);
    const int refits = j.value("refits", 4);
    const ScoreModel ref = reference_model(fs, p, T, eps, n_ref, ridge_rel);
    summary["eps_al"] = epsilon_al_estimate(fs, p, T, eps, n_train, refits, ref, ridge_rel,
                                            seed + 101);
    summary["theta_star_sq"] = ref.theta.squaredNorm();
    SamplerConfig scfg;
    scfg.T = T;
    scfg.epsilon = eps;
    scfg.gamma = j.value("gamma", 1e-2);
    scfg.n = j.value("eps_sn_paths", 1000);
    scfg.dim = p.dim;
    scfg.seed = seed + 707;
    const ScoreErrorEstimate sn = epsilon_sn_estimate(model, p, scfg);
    summary["eps_sn"] = sn.value;
    summary["eps_sn_stderr"] = sn.stderr_mc;
  }

  std::ofstream out(out_path(g, "model.json"));
  out << model.to_json().dump(2) << "\n";
  out.close();
  summary["model"] = out_path(g, "model.json");
  emit(summary);
  return 0;
}

int cmd_w2(const GlobalOpts& g, const std::string& file_a, const std::string& file_b,
           const std::string& method, int bootstrap) {
  const Eigen::MatrixXd a = read_numeric_csv(file_a);
  const Eigen::MatrixXd b = read_numeric_csv(file_b);
  json j;
  if (bootstrap > 0) {
    const W2Report rep =
        w2_bootstrap(a, b, method == "assignment" ? 1 : 0, bootstrap, g.seed.value_or(0));
    j = {{"w2", rep.value},
         {"stderr_boot", rep.stderr_boot},
         {"n_a", rep.n_a},
         {"n_b", rep.n_b},
         {"bootstrap", rep.bootstrap}};
  } else if (method == "assignment") {
    if (a.rows() != b.rows()) throw input_error("assignment distance needs equal sample counts");
    j = {{"w2", w2_assignment(a, b)}, {"n_a", a.rows()}, {"n_b", b.rows()}};
  } else if (method == "quantile") {
    if (a.cols() != 1 || b.cols() != 1) throw input_error("quantile distance is 1-D only");
    std::vector<double> va(a.col(0).begin(), a.col(0).end());
    std::vector<double> vb(b.col(0).begin(), b.col(0).end());
    j = {{"w2", w2_quantile_1d(va, vb)}, {"n_a", a.rows()}, {"n_b", b.rows()}};
  } else {
    throw input_error("method must be quantile or assignment");
  }
  emit(j);
  return 0;
}

int cmd_bounds(const GlobalOpts& g, const std::string& inputs, const std::string& rate,
               double delta) {
  const BoundInputs in = BoundInputs::from_json(read_json_file(inputs));
  const DiscretizationRate r =
      rate == "holder" ? DiscretizationRate::holder : DiscretizationRate::sqrt_gamma;
  const BoundBreakdown b = w2_error_budget(in, r);
  json j = b.to_json();
  j["moment_bounds"] = {{"p2", em_moment_bound(in, 2)},
                        {"p2_log", em_moment_bound_log(in, 2)},
                        {"p4", em_moment_bound(in, 4)},
                        {"p4_log", em_moment_bound_log(in, 4)},
                        {"overshoot_p2_log", em_overshoot_bound_log(in, 2)},
                        {"overshoot_p4_log", em_overshoot_bound_log(in, 4)}};
  if (delta > 0.0) j["thresholds"] = delta_thresholds(in, delta).to_json();
  (void)g;
  emit(j);
  return 0;
}

int cmd_sweep(const GlobalOpts& g, const std::string& config) {
  ExperimentSpec spec = ExperimentSpec::from_json(read_json_file(config));
  if (g.seed) spec.seed = *g.seed;
  if (g.threads) spec.threads = *g.threads;
  if (spec.score == "model") {
    if (spec.model_path.empty()) throw input_error("sweep: model score needs model_path");
    spec.model = ScoreModel::from_json(read_json_file(spec.model_path));
  }
  const SweepResult res = run_sweep(spec);

  const std::uint64_t h = fnv1a64(spec.to_json().dump());
  CsvWriter csv(out_path(g, "sweep.csv"),
                {"gamma", "epsilon", "T", "replicate", "n", "steps", "diverged", "w2_raw",
                 "w2_baseline", "w2_corrected", "eps_sn"},
                h);
  for (const auto& row : res.rows)
    csv.row_values({row.gamma, row.epsilon, row.T, static_cast<double>(row.replicate),
                    static_cast<double>(row.n), static_cast<double>(row.steps),
                    static_cast<double>(row.diverged), row.w2_raw, row.w2_baseline,
                    row.w2_corrected, row.eps_sn});
  csv.close();

  json j{{"rows", res.rows.size()}, {"csv", out_path(g, "sweep.csv")}};
  if (res.has_rate) {
    j["gamma_rate"] = {{"slope", res.gamma_rate.slope},
                       {"stderr", res.gamma_rate.stderr_slope},
                       {"intercept", res.gamma_rate.intercept},
                       {"points", res.gamma_rate.points}};
    SvgPlot plot;
    plot.x_label = "gamma";
    plot.y_label = "corrected W2";
    plot.log_x = true;
    plot.log_y = true;
    SvgSeries s;
    s.label = "measured";
    s.color = "#1f6f8b";
    for (const auto& row : res.rows) {
      s.x.push_back(row.gamma);
      s.y.push_back(row.w2_corrected);
    }
    plot.series.push_back(std::move(s));
    write_svg_plot(out_path(g, "sweep.svg"), plot);
    j["svg"] = out_path(g, "sweep.svg");
  }
  emit(j);
  return 0;
}

int cmd_verify(const GlobalOpts& g, int pairs) {
  const json j = verify_assumptions(pairs, g.seed.value_or(0));
  emit(j);
  return j.at("passed").get<bool>() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiconvex score-based sampler laboratory"};
  app.require_subcommand(1);
  GlobalOpts g;
  std::uint64_t seed_val = 0;
  int threads_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "Override config seeds");
  auto* threads_opt = app.add_option("--threads", threads_val, "Worker threads");
  app.add_option("--out", g.out_dir, "Output directory");

  std::string config, family = "", score = "exact", rate = "sqrt", method = "quantile";
  std::string file_a, file_b, inputs;
  int dim = 1, bootstrap = 0, pairs = 10000;
  double delta = 0.0;

  auto* c_const = app.add_subcommand("constants", "Convexity constants of a target potential");
  c_const->add_option("--config", config, "Potential JSON file");
  c_const->add_option("--family", family, "Built-in family name");
  c_const->add_option("--dim", dim, "Dimension for built-in families");

  auto* c_prof = app.add_subcommand("score-profile", "Score vs time at fixed positions");
  c_prof->add_option("--config", config, "Potential JSON file");

  auto* c_sample = app.add_subcommand("sample", "Run the backward integrator");
  c_sample->add_option("--config", config, "Sampler JSON file")->required();
  c_sample->add_option("--score", score, "exact | model:<path>");

  auto* c_fit = app.add_subcommand("fit", "Fit a score model on forward draws");
  c_fit->add_option("--config", config, "Fit JSON file")->required();

  auto* c_w2 = app.add_subcommand("w2", "Transport distance between two sample CSVs");
  c_w2->add_option("a", file_a, "First CSV")->required();
  c_w2->add_option("b", file_b, "Second CSV")->required();
  c_w2->add_option("--method", method, "quantile | assignment");
  c_w2->add_option("--bootstrap", bootstrap, "Bootstrap replicates for a stderr");

  auto* c_bounds = app.add_subcommand("bounds", "Error budget from certificate inputs");
  c_bounds->add_option("--inputs", inputs, "Inputs JSON file")->required();
  c_bounds->add_option("--rate", rate, "sqrt | holder");
  c_bounds->add_option("--delta", delta, "Also emit accuracy thresholds");

  auto* c_sweep = app.add_subcommand("sweep", "Grid sweep with rate regression");
  c_sweep->add_option("--config", config, "Experiment JSON file")->required();

  auto* c_verify = app.add_subcommand("verify-assumptions", "Target potential property suite");
  c_verify->add_option("--pairs", pairs, "Monte Carlo pairs per radius");

  // Let the global options (--seed, --threads, --out) appear after the
  // subcommand name as well.
  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed_val;
  if (*threads_opt) g.threads = threads_val;

  try {
    if (app.got_subcommand(c_const)) return cmd_constants(g, config, family, dim);
    if (app.got_subcommand(c_prof)) return cmd_score_profile(g, config);
    if (app.got_subcommand(c_sample)) return cmd_sample(g, config, score);
    if (app.got_subcommand(c_fit)) return cmd_fit(g, config);
    if (app.got_subcommand(c_w2)) return cmd_w2(g, file_a, file_b, method, bootstrap);
    if (app.got_subcommand(c_bounds)) return cmd_bounds(g, inputs, rate, delta);
    if (app.got_subcommand(c_sweep)) return cmd_sweep(g, config);
    if (app.got_subcommand(c_verify)) return cmd_verify(g, pairs);
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
