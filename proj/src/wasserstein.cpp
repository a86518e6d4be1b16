#include "semiscore/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semiscore/errors.hpp"
#include "semiscore/rng.hpp"

namespace semiscore {

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  auto idx = static_cast<std::ptrdiff_t>(q * n);
  idx = std::clamp<std::ptrdiff_t>(idx, 0, n - 1);
  return s[static_cast<std::size_t>(idx)];
}

// Min-cost perfect matching, shortest augmenting paths with dual potentials.
double assignment_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, n);  // column -> row, n = unmatched sentinel
  std::vector<int> way(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    match[n] = i;
    int j0 = n;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 < 0) throw numeric_error("assignment: no augmenting column");
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          if (j < n) v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != n);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != n);
  }
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += cost(match[j], j);
  return total;
}

}  // namespace

double w2_quantile_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw input_error("w2_quantile_1d: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    return std::sqrt(acc / a.size());
  }
  // Unequal counts: both quantile functions on the finer midpoint grid.
  const std::size_t m = std::max(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double q = (k + 0.5) / m;
    const double d = quantile_sorted(a, q) - quantile_sorted(b, q);
    acc += d * d;
  }
  return std::sqrt(acc / m);
}

double w2_assignment(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw input_error("w2_assignment: sample counts differ");
  if (a.cols() != b.cols()) throw input_error("w2_assignment: dimensions differ");
  const auto n = a.rows();
  if (n < 1 || n > 2048) throw input_error("w2_assignment: n must be in [1, 2048]");
  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cost(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return std::sqrt(assignment_cost(cost) / static_cast<double>(n));
}

double w2_gaussian_isotropic(const Eigen::VectorXd& m1, double s1,
                             const Eigen::VectorXd& m2, double s2) {
  if (m1.size() != m2.size()) throw input_error("w2_gaussian_isotropic: dimension mismatch");
  const double ds = s1 - s2;
  return std::sqrt((m1 - m2).squaredNorm() + m1.size() * ds * ds);
}

W2Report w2_bootstrap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int method,
                      int replicates, std::uint64_t seed) {
  if (replicates < 2) throw input_error("w2_bootstrap: need at least 2 replicates");
  const auto eval = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (method == 0) {
      if (x.cols() != 1) throw input_error("w2_bootstrap: quantile method is 1-D");
      std::vector<double> xa(x.data(), x.data() + x.rows());
      std::vector<double> yb(y.data(), y.data() + y.rows());
      return w2_quantile_1d(std::move(xa), std::move(yb));
    }
    return w2_assignment(x, y);
  };

  W2Report rep;
  rep.n_a = static_cast<int>(a.rows());
  rep.n_b = static_cast<int>(b.rows());
  rep.bootstrap = replicates;
  rep.value = eval(a, b);

  double s1 = 0.0, s2 = 0.0;
  Eigen::MatrixXd ra(a.rows(), a.cols()), rb(b.rows(), b.cols());
  for (int r = 0; r < replicates; ++r) {
    CounterRng rng(seed, rng_stream(RngDomain::bootstrap, r));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const auto k = static_cast<Eigen::Index>(rng.uniform(i) * a.rows());
      ra.row(i) = a.row(std::min(k, a.rows() - 1));
    }
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      const auto k = static_cast<Eigen::Index>(rng.uniform(a.rows() + i) * b.rows());
      rb.row(i) = b.row(std::min(k, b.rows() - 1));
    }
    const double w = eval(ra, rb);
    s1 += w;
    s2 += w * w;
  }
  const double mean = s1 / replicates;
  const double var = std::max(0.0, (s2 - replicates * mean * mean) / (replicates - 1));
  rep.stderr_boot = std::sqrt(var);
  return rep;
}

}  // namespace semiscore
