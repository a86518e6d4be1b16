#include <cmath>

#include "doctest.h"
#include "semiscore/errors.hpp"
#include "semiscore/quadrature.hpp"

using namespace semiscore;

TEST_SUITE("quadrature") {

TEST_CASE("nodes are symmetric and weights sum to two") {
  for (int order : {2, 5, 8, 16, 64}) {
    const auto& rule = gauss_legendre(order);
    REQUIRE(static_cast<int>(rule.nodes.size()) == order);
    double wsum = 0.0;
    for (int i = 0; i < order; ++i) {
      wsum += rule.weights[i];
      CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[order - 1 - i]).epsilon(1e-14));
      if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
  }
}

// Order-n Gauss rules integrate polynomials of degree 2n-1 exactly.
TEST_CASE("polynomial exactness up to degree 2n-1") {
  const int order = 8;
  const auto& rule = gauss_legendre(order);
  for (int k = 0; k <= 15; ++k) {
    double acc = 0.0;
    for (int i = 0; i < order; ++i) acc += rule.weights[i] * std::pow(rule.nodes[i], k);
    const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
    CHECK(std::abs(acc - exact) < 1e-13);
  }
}

TEST_CASE("composite rule on a smooth integrand") {
  const double val = integrate_gl([](double x) { return std::exp(x); }, 0.0, 1.0, 16, 4);
  CHECK(val == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
}

TEST_CASE("adaptive integration hits frozen references") {
  const double s = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-11);
  CHECK(std::abs(s - 2.0) < 1e-9);
  // int_0^1 exp(-x^2) dx = sqrt(pi)/2 erf(1)
  const double g = integrate_adaptive([](double x) { return std::exp(-x * x); }, 0.0, 1.0, 1e-11);
  CHECK(std::abs(g - 0.74682413281242702) < 1e-9);
  CHECK(integrate_adaptive([](double x) { return x; }, 2.0, 2.0, 1e-11) == 0.0);
}

TEST_CASE("adaptive depth guard fires on a hostile integrand") {
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / std::sqrt(std::abs(x)); },
                                     -1.0, 1.0, 1e-14, 8),
                  numeric_error);
}

TEST_CASE("invalid orders and panel counts are rejected") {
  CHECK_THROWS_AS(gauss_legendre(0), input_error);
  CHECK_THROWS_AS(integrate_gl([](double) { return 1.0; }, 0.0, 1.0, 4, 0), input_error);
}

}  // TEST_SUITE
