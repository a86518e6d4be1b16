#include <cmath>

#include "doctest.h"
#include "semiscore/errors.hpp"
#include "semiscore/potentials.hpp"

using namespace semiscore;

namespace {

Potential make_family(Family f, int dim) {
  Potential p;
  p.family = f;
  p.dim = dim;
  return p;
}

}  // namespace

TEST_SUITE("potentials") {

TEST_CASE("benchmark pair constants are the exact rationals") {
  const Potential p = Potential::benchmark_mixture();
  const auto sc = semiconvexity_params(p);
  CHECK(sc.K == 8.0 / 81.0);
  CHECK(sc.mu == 1.0 / 81.0);
  CHECK(sc.R == 0.0);
  CHECK(second_moment(p) == doctest::Approx(13.0).epsilon(1e-14));
}

TEST_CASE("pair separation levels for the built-in families") {
  auto sc = semiconvexity_params(make_family(Family::symmetric_modified_half_normal, 1));
  CHECK(sc.K == 0.0);
  CHECK(sc.mu == 2.0);
  CHECK(sc.R == 0.0);

  sc = semiconvexity_params(make_family(Family::double_well, 1));
  CHECK(sc.K == 2.0);
  CHECK(sc.mu == 1.0);
  CHECK(sc.R == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));

  sc = semiconvexity_params(make_family(Family::elastic_net, 2));
  CHECK(sc.K == 0.0);
  CHECK(sc.mu == 2.0);

  sc = semiconvexity_params(make_family(Family::max_norm, 2));
  CHECK(sc.K == 0.0);
  CHECK(sc.mu == 1.0);
  CHECK(sc.R == 1.0);

  sc = semiconvexity_params(make_family(Family::max_norm_nonconvex, 2));
  CHECK(sc.K == 1.0);
  CHECK(sc.mu == 0.5);
  CHECK(sc.R == 2.0);
}

TEST_CASE("over-separated symmetric pairs are rejected") {
  Potential p = Potential::benchmark_mixture();
  p.stds = {1.0, 1.0};  // s^2 = 1 < 2 eta^2 = 8
  CHECK_THROWS_AS(semiconvexity_params(p), input_error);
}

TEST_CASE("asymmetric mixtures need an explicit override") {
  Potential p = Potential::benchmark_mixture();
  p.weights = {0.3, 0.7};
  CHECK_THROWS_AS(semiconvexity_params(p), input_error);
  p.semiconvexity_override = SemiconvexityParams{0.2, 0.05, 0.0};
  const auto sc = semiconvexity_params(p);
  CHECK(sc.K == 0.2);
  CHECK(sc.mu == 0.05);
}

TEST_CASE("minimal-norm subgradient selections at the kinks") {
  Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
  CHECK(subgradient(make_family(Family::symmetric_modified_half_normal, 1), zero1)[0] == 0.0);
  CHECK(subgradient(make_family(Family::elastic_net, 2), zero2).norm() == 0.0);
  CHECK(subgradient(make_family(Family::max_norm, 2), zero2).norm() == 0.0);

  // On the unit sphere the max-norm kink keeps the shortest selection x/|x|.
  Eigen::VectorXd e1(2);
  e1 << 1.0, 0.0;
  CHECK((subgradient(make_family(Family::max_norm, 2), e1) - e1).norm() == 0.0);
  // Past it the quadratic branch takes over.
  CHECK((subgradient(make_family(Family::max_norm, 2), 2.0 * e1) - 4.0 * e1).norm() == 0.0);
}

TEST_CASE("subgradient matches finite differences away from kinks") {
  const double h = 1e-6;
  for (Family f : {Family::symmetric_modified_half_normal, Family::double_well,
                   Family::elastic_net, Family::max_norm, Family::max_norm_nonconvex}) {
    const int d = (f == Family::symmetric_modified_half_normal || f == Family::double_well) ? 1 : 2;
    const Potential p = make_family(f, d);
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x[k] = 0.37 + 0.57 * k;  // off every kink sphere
    const Eigen::VectorXd g = subgradient(p, x);
    for (int k = 0; k < d; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (potential_value(p, xp) - potential_value(p, xm)) / (2.0 * h);
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("second moments match independent quadrature references") {
  Potential hn = make_family(Family::symmetric_modified_half_normal, 1);
  CHECK(second_moment(hn) == doctest::Approx(0.2918235896753253).epsilon(1e-9));
  CHECK(second_moment(make_family(Family::double_well, 1)) ==
        doctest::Approx(0.5208986482435779).epsilon(1e-9));
  CHECK(second_moment(make_family(Family::elastic_net, 2)) ==
        doctest::Approx(0.5836471793506506).epsilon(1e-9));
  CHECK(second_moment(make_family(Family::double_well, 2)) ==
        doctest::Approx(0.7889781813726314).epsilon(1e-9));
}

TEST_CASE("sampler moments agree with the quadrature moments") {
  const int n = 40000;
  for (Family f : {Family::symmetric_modified_half_normal, Family::double_well}) {
    const Potential p = make_family(f, 1);
    const Eigen::MatrixXd x = sample_target(p, n, 31);
    const double m2 = x.array().square().mean();
    CHECK(m2 == doctest::Approx(second_moment(p)).epsilon(0.03));
  }
  const Potential en = make_family(Family::elastic_net, 2);
  const Eigen::MatrixXd x = sample_target(en, n, 32);
  CHECK(x.array().square().rowwise().sum().mean() ==
        doctest::Approx(second_moment(en)).epsilon(0.03));
}

TEST_CASE("benchmark target draws populate both modes deterministically") {
  const Potential p = Potential::benchmark_mixture();
  const Eigen::MatrixXd a = sample_target(p, 20000, 7);
  const Eigen::MatrixXd b = sample_target(p, 20000, 7);
  CHECK((a.array() == b.array()).all());
  CHECK(std::abs(a.mean()) < 0.08);
  CHECK(a.array().square().mean() == doctest::Approx(13.0).epsilon(0.05));
  CHECK((a.array() < 0.0).count() > 8000);
  CHECK((a.array() > 0.0).count() > 8000);
}

TEST_CASE("json round trip preserves every field") {
  Potential p = Potential::benchmark_mixture();
  p.semiconvexity_override = SemiconvexityParams{0.1, 0.2, 0.3};
  const Potential q = Potential::from_json(p.to_json());
  CHECK(q.family == p.family);
  CHECK(q.dim == p.dim);
  CHECK(q.weights == p.weights);
  CHECK(q.stds == p.stds);
  CHECK((q.means.array() == p.means.array()).all());
  REQUIRE(q.semiconvexity_override.has_value());
  CHECK(q.semiconvexity_override->K == 0.1);
  CHECK(q.semiconvexity_override->mu == 0.2);
  CHECK(q.semiconvexity_override->R == 0.3);

  Potential hn = make_family(Family::symmetric_modified_half_normal, 1);
  hn.xi = 2.5;
  const Potential hq = Potential::from_json(hn.to_json());
  CHECK(hq.xi == 2.5);
  CHECK(hq.family == Family::symmetric_modified_half_normal);
}

TEST_CASE("mixture construction rejects malformed inputs") {
  nlohmann::json j{{"family", "gaussian_mixture"},
                   {"weights", {0.5, 0.6}},
                   {"means", {2.0, -2.0}},
                   {"stds", {3.0, 3.0}}};
  CHECK_THROWS_AS(Potential::from_json(j), input_error);  // weights sum to 1.1
  j["weights"] = {0.5, 0.5};
  j["stds"] = {3.0, -3.0};
  CHECK_THROWS_AS(Potential::from_json(j), input_error);
  j["stds"] = {3.0, 3.0};
  CHECK(Potential::from_json(j).dim == 1);
  CHECK_THROWS_AS(family_from_name("not_a_family"), input_error);
}

}  // TEST_SUITE
