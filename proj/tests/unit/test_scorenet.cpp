#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "semiscore/errors.hpp"
#include "semiscore/scorenet.hpp"

using namespace semiscore;

namespace {

Potential unit_gaussian() {
  Potential p;
  p.family = Family::gaussian_mixture;
  p.dim = 1;
  p.weights = {1.0};
  p.means.resize(1, 1);
  p.means << 0.0;
  p.stds = {1.0};
  return p;
}

}  // namespace

TEST_SUITE("scorenet") {

TEST_CASE("feature set shapes and the time basis") {
  const FeatureSet fs = FeatureSet::make(2, 4.0, 3, 5, true, 42);
  CHECK(fs.w.rows() == 5);
  CHECK(fs.w.cols() == 2);
  CHECK(fs.b.size() == 5);
  CHECK(fs.units() == 7);
  CHECK(fs.count() == 28);

  Eigen::VectorXd c;
  fs.time_basis(4.0, c);
  REQUIRE(c.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(c[j] == 1.0);
  fs.time_basis(0.0, c);
  for (int j = 0; j < 4; ++j) CHECK(c[j] == (j % 2 == 0 ? 1.0 : -1.0));
  fs.time_basis(2.0, c);  // tau = 0
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 0.0);
  CHECK(c[2] == -1.0);
  CHECK(c[3] == 0.0);
  fs.time_basis(9.0, c);  // clamped to tau = 1
  CHECK(c[3] == 1.0);
}

TEST_CASE("feature layout is time-major over ridge units") {
  const FeatureSet fs = FeatureSet::make(1, 4.0, 2, 2, true, 21);
  Eigen::VectorXd x(1);
  x << 0.8;
  Eigen::VectorXd rho, c, phi;
  fs.unit_values(x, rho);
  REQUIRE(rho.size() == 3);
  CHECK(rho[0] == std::tanh(fs.w(0, 0) * 0.8 + fs.b[0]));
  CHECK(rho[1] == std::tanh(fs.w(1, 0) * 0.8 + fs.b[1]));
  CHECK(rho[2] == 0.8);  // raw coordinate comes after the tanh block
  fs.time_basis(1.0, c);
  fs.features(1.0, x, phi);
  REQUIRE(phi.size() == 9);
  for (int j = 0; j < 3; ++j)
    for (int u = 0; u < 3; ++u) CHECK(phi[j * 3 + u] == c[j] * rho[u]);
}

TEST_CASE("feature set and model survive a JSON round trip") {
  const FeatureSet fs = FeatureSet::make(2, 4.0, 2, 3, true, 7);
  const FeatureSet back = FeatureSet::from_json(fs.to_json());
  CHECK(back.dim == fs.dim);
  CHECK(back.T == fs.T);
  CHECK(back.cheb_degree == fs.cheb_degree);
  CHECK(back.linear_units == fs.linear_units);
  CHECK(back.x_ref == fs.x_ref);
  CHECK((back.w.array() == fs.w.array()).all());
  CHECK((back.b.array() == fs.b.array()).all());

  ScoreModel m;
  m.features = fs;
  m.theta.resize(2, fs.count());
  for (Eigen::Index r = 0; r < 2; ++r)
    for (int f = 0; f < fs.count(); ++f) m.theta(r, f) = 0.01 * (f + 1) * (r == 0 ? 1 : -1);
  m.alpha = 0.5;
  m.ridge = 1e-7;
  m.fit_residual = 0.25;
  const ScoreModel mb = ScoreModel::from_json(m.to_json());
  CHECK((mb.theta.array() == m.theta.array()).all());
  CHECK(mb.alpha == m.alpha);
  CHECK(mb.ridge == m.ridge);
  CHECK(mb.fit_residual == m.fit_residual);
  Eigen::VectorXd x(2);
  x << 0.3, -1.1;
  CHECK((mb.eval(1.3, x).array() == m.eval(1.3, x).array()).all());
}

TEST_CASE("regularity constants from frozen weights, by hand") {
  FeatureSet fs;
  fs.dim = 1;
  fs.T = 2.0;
  fs.cheb_degree = 1;
  fs.w.resize(1, 1);
  fs.w << 0.5;
  fs.b.resize(1);
  fs.b << 0.25;
  fs.linear_units = false;
  ScoreModel m;
  m.features = fs;
  m.theta.resize(1, 2);
  m.theta << 2.0, -3.0;
  const RegularityConstants c = m.constants();
  CHECK(c.k1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.k2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(c.k3 == doctest::Approx(std::sqrt(6.5)).epsilon(1e-14));
  // curvature constant 4 / (3 sqrt 3), unit slope 1/2, |theta|_1 = 5
  CHECK(c.k4 == doctest::Approx(4.0 / (3.0 * std::sqrt(3.0)) * 5.0 * 0.25).epsilon(1e-12));
  CHECK(c.k_total == doctest::Approx(c.k1 + c.k2 + c.k3).epsilon(1e-14));
}

TEST_CASE("a linear-score target is fit exactly by the raw coordinate unit") {
  const Potential p = unit_gaussian();  // noised variance is 1 at every t: score -x
  const FeatureSet fs = FeatureSet::make(1, 2.0, 0, 0, true, 9);
  const FitData data = make_training_data(p, 2.0, 0.05, 500, 3);
  for (Eigen::Index i = 0; i < data.t.size(); ++i) {
    CHECK(data.t[i] >= 0.05);
    CHECK(data.t[i] <= 2.0);
    CHECK(data.y(i, 0) == doctest::Approx(-data.x(i, 0)).epsilon(1e-12));
  }
  const ScoreModel m = fit_score_model(fs, data);
  CHECK(m.fit_residual < 1e-12);
  CHECK(m.theta(0, 0) == doctest::Approx(-1.0).epsilon(1e-6));

  const RegularityConstants c = m.constants();
  CHECK(c.k1 == 0.0);
  CHECK(c.k2 == 1.0);
  CHECK(c.k3 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(c.k4 == 0.0);

  // Along-path squared error of the fitted drift is at the ridge-bias floor.
  SamplerConfig cfg;
  cfg.T = 2.0;
  cfg.epsilon = 0.1;
  cfg.gamma = 0.05;
  cfg.n = 64;
  cfg.dim = 1;
  cfg.seed = 12;
  const ScoreErrorEstimate est = epsilon_sn_estimate(m, p, cfg);
  CHECK(est.trajectories == 64);
  CHECK(est.value < 1e-8);
  CHECK(est.stderr_mc >= 0.0);
}

TEST_CASE("fit is invariant to row order") {
  const Potential p = Potential::benchmark_mixture();
  const FeatureSet fs = FeatureSet::make(1, 2.0, 2, 6, true, 5);
  const FitData data = make_training_data(p, 2.0, 0.05, 300, 8);
  FitData shuffled = data;
  std::vector<Eigen::Index> perm(300);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(99));
  for (Eigen::Index i = 0; i < 300; ++i) {
    shuffled.t[i] = data.t[perm[static_cast<std::size_t>(i)]];
    shuffled.x.row(i) = data.x.row(perm[static_cast<std::size_t>(i)]);
    shuffled.y.row(i) = data.y.row(perm[static_cast<std::size_t>(i)]);
  }
  const ScoreModel m1 = fit_score_model(fs, data);
  const ScoreModel m2 = fit_score_model(fs, shuffled);
  CHECK((m1.theta.array() == m2.theta.array()).all());
  CHECK(m1.fit_residual == m2.fit_residual);
}

TEST_CASE("batch drift adapter matches pointwise evaluation") {
  const Potential p = Potential::benchmark_mixture();
  const FeatureSet fs = FeatureSet::make(1, 2.0, 2, 4, true, 15);
  const ScoreModel m = fit_score_model(fs, make_training_data(p, 2.0, 0.05, 400, 2));
  const BatchScore batch = m.as_batch_score();
  Eigen::MatrixXd y(5, 1), out(5, 1);
  y << -3.0, -0.7, 0.0, 1.2, 4.5;
  batch(0.8, y, out);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(out(i, 0) == doctest::Approx(m.eval(0.8, y.row(i).transpose())[0]).epsilon(1e-12));
  }
}

TEST_CASE("input validation") {
  const FeatureSet fs = FeatureSet::make(1, 2.0, 1, 2, false, 4);
  ScoreModel m;
  m.features = fs;
  m.theta = Eigen::MatrixXd::Zero(1, fs.count());
  Eigen::VectorXd x1(1), x2(2);
  x1 << 0.5;
  x2 << 0.5, 0.5;
  CHECK_THROWS_AS(m.eval(1.0, x2), input_error);
  CHECK_THROWS_AS(m.eval_with(Eigen::MatrixXd::Zero(1, 3), 1.0, x1), input_error);

  CHECK_THROWS_AS(FeatureSet::make(1, 2.0, 1, 0, false, 4), input_error);  // no units at all
  Potential hn;
  hn.family = Family::symmetric_modified_half_normal;
  hn.dim = 1;
  hn.xi = 1.0;
  CHECK_THROWS_AS(make_training_data(hn, 2.0, 0.05, 10, 1), input_error);
  CHECK_THROWS_AS(make_training_data(Potential::benchmark_mixture(), 2.0, 2.5, 10, 1),
                  input_error);

  FitData bad = make_training_data(Potential::benchmark_mixture(), 2.0, 0.05, 10, 1);
  bad.y.resize(9, 1);
  CHECK_THROWS_AS(fit_score_model(fs, bad), input_error);
}

}  // TEST_SUITE
