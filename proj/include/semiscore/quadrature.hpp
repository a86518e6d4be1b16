#pragma once

#include <functional>
#include <vector>

namespace semiscore {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

// Nodes by Newton iteration on the Legendre recurrence; cached per order.
const GaussLegendreRule& gauss_legendre(int order);

// Composite Gauss-Legendre over [a, b] split into equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int order, int panels);

// Adaptive Simpson with interval bisection; independent of the closed forms it
// is used to cross-check. tol is absolute.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_depth = 48);

}  // namespace semiscore
