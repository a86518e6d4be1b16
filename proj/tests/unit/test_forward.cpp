#include <cmath>

#include "doctest.h"
#include "semiscore/errors.hpp"
#include "semiscore/forward.hpp"

using namespace semiscore;

TEST_SUITE("forward") {

TEST_CASE("noising coefficients") {
  const OuCoeffs c0 = ou_coeffs(0.0);
  CHECK(c0.m == 1.0);
  CHECK(c0.sigma2 == 0.0);
  const OuCoeffs c = ou_coeffs(std::log(2.0));
  CHECK(c.m == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.sigma2 == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(c.sigma == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
  CHECK_THROWS_AS(ou_coeffs(-0.1), input_error);
}

TEST_CASE("two-mode closed form and the generic responsibility sum agree") {
  const Potential p = Potential::benchmark_mixture();
  Eigen::VectorXd x1(1);
  for (double t : {0.0, 0.05, 0.7, 3.2, 9.0}) {
    const double m = std::exp(-t);
    const double v = 1.0 + 8.0 * m * m;
    const double mean = 2.0 * m;
    const MixtureScore1d fast(p, t);
    for (double x = -10.0; x <= 10.0; x += 0.37) {
      const double ref = -x / v + (mean / v) * std::tanh(mean * x / v);
      x1[0] = x;
      CHECK(std::abs(mixture_score(p, t, x1)[0] - ref) < 1e-12);
      CHECK(std::abs(fast(x) - ref) < 1e-12);
    }
  }
}

TEST_CASE("general mixtures: fast path equals the vector form") {
  Potential p;
  p.family = Family::gaussian_mixture;
  p.dim = 1;
  p.weights = {0.2, 0.5, 0.3};
  p.means.resize(3, 1);
  p.means << -1.0, 0.5, 3.0;
  p.stds = {0.8, 1.5, 0.6};
  Eigen::VectorXd x1(1);
  for (double t : {0.1, 1.0, 4.0}) {
    const MixtureScore1d s(p, t);
    for (double x = -6.0; x <= 6.0; x += 0.61) {
      x1[0] = x;
      CHECK(s(x) == doctest::Approx(mixture_score(p, t, x1)[0]).epsilon(1e-13));
    }
  }
}

TEST_CASE("score collapses to the standard normal score at long times") {
  const Potential p = Potential::benchmark_mixture();
  Eigen::VectorXd x1(1);
  for (double x : {-0.8, 0.5, 4.0}) {
    x1[0] = x;
    CHECK(std::abs(mixture_score(p, 10.0, x1)[0] + x) < 1e-3);
  }
}

TEST_CASE("quadrature oracle and log-density finite differences") {
  const Potential p = Potential::benchmark_mixture();
  Eigen::VectorXd x1(1);
  const double h = 1e-4;
  for (double t : {0.1, 0.8, 3.0}) {
    for (double x : {-4.2, -0.8, 0.5, 2.9}) {
      x1[0] = x;
      const double s = mixture_score(p, t, x1)[0];
      CHECK(std::abs(quadrature_score_1d(p, t, x) - s) < 1e-7);
      const double fd = (quadrature_log_density_1d(p, t, x + h) -
                         quadrature_log_density_1d(p, t, x - h)) /
                        (2.0 * h);
      CHECK(std::abs(fd - s) < 1e-6);
    }
  }
  CHECK_THROWS_AS(quadrature_score_1d(p, 0.0, 0.5), input_error);
}

TEST_CASE("quadrature oracle covers non-mixture targets") {
  // Half-normal target: no closed form available, but the score of the noised
  // law must still integrate the density: compare against a second finite
  // difference of its own log density (self-consistency) and check symmetry.
  Potential p;
  p.family = Family::symmetric_modified_half_normal;
  p.dim = 1;
  p.xi = 1.0;
  const double s = quadrature_score_1d(p, 0.5, 1.3);
  const double sm = quadrature_score_1d(p, 0.5, -1.3);
  CHECK(s == doctest::Approx(-sm).epsilon(1e-9));  // even density, odd score
  const double h = 1e-4;
  const double fd = (quadrature_log_density_1d(p, 0.5, 1.3 + h) -
                     quadrature_log_density_1d(p, 0.5, 1.3 - h)) /
                    (2.0 * h);
  CHECK(s == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("forward draws interpolate target and Gaussian moments") {
  const Potential p = Potential::benchmark_mixture();
  const int n = 40000;
  const double t = 0.3;
  const Eigen::MatrixXd x = sample_forward(p, t, n, 11);
  const double m2 = std::exp(-2.0 * t) * 13.0 + (1.0 - std::exp(-2.0 * t));
  CHECK(x.array().square().mean() == doctest::Approx(m2).epsilon(0.03));
  CHECK(std::abs(x.mean()) < 0.08);
  // t = 0 returns raw target draws.
  const Eigen::MatrixXd x0 = sample_forward(p, 0.0, 100, 11);
  const Eigen::MatrixXd tgt = sample_target(p, 100, 11);
  CHECK((x0.array() == tgt.array()).all());
}

}  // TEST_SUITE
