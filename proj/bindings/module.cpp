// Python surface for the sampler laboratory: convexity constants, forward
// coefficients, the benchmark mixture score, the backward integrator, 1-D
// transport distance, and the error-budget evaluator.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semiscore/bounds.hpp"
#include "semiscore/convexity.hpp"
#include "semiscore/experiments.hpp"
#include "semiscore/forward.hpp"
#include "semiscore/potentials.hpp"
#include "semiscore/sampler.hpp"
#include "semiscore/wasserstein.hpp"

namespace py = pybind11;
using namespace semiscore;

namespace {

py::dict constants_dict(const Potential& p) {
  const SemiconvexityParams sc = semiconvexity_params(p);
  py::dict d;
  d["K"] = sc.K;
  d["mu"] = sc.mu;
  d["R"] = sc.R;
  d["L_proxy"] = sc.K + sc.mu;
  d["second_moment"] = second_moment(p);
  if (sc.mu > 0.0) {
    d["t_bar"] = t_bar(sc.mu, sc.K);
    d["t_star"] = t_star(sc.mu, sc.K);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(semiscore, m) {
  m.doc() = "Backward-diffusion sampling on semiconvex targets";

  m.def("benchmark_constants", [] { return constants_dict(Potential::benchmark_mixture()); },
        "Convexity constants of the built-in two-mode benchmark target");

  m.def(
      "family_constants",
      [](const std::string& name, int dim) {
        Potential p;
        p.family = family_from_name(name);
        p.dim = dim;
        if (p.family == Family::gaussian_mixture) p = Potential::benchmark_mixture();
        return constants_dict(p);
      },
      py::arg("family"), py::arg("dim") = 1);

  m.def("t_bar", &t_bar, py::arg("mu"), py::arg("K"),
        "Time where the one-sided score bound crosses zero");
  m.def("t_star", &t_star, py::arg("mu"), py::arg("K"),
        "Time where the integrated bound turns positive");
  m.def("one_sided_bound", &beta_os_kmu, py::arg("t"), py::arg("mu"), py::arg("K"));
  m.def("one_sided_bound_integral", &beta_integral, py::arg("t"), py::arg("mu"), py::arg("K"));
  m.def("contraction_radius", &r0_threshold, py::arg("mu"), py::arg("L"));

  m.def(
      "forward_moments",
      [](double t) {
        const OuCoeffs c = ou_coeffs(t);
        return py::make_tuple(c.m, c.sigma2);
      },
      py::arg("t"), "Mean decay and noise variance of the forward process at time t");

  m.def(
      "benchmark_score",
      [](double t, const Eigen::VectorXd& x) {
        const Potential p = Potential::benchmark_mixture();
        const MixtureScore1d s(p, t);
        Eigen::VectorXd out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = s(x[i]);
        return out;
      },
      py::arg("t"), py::arg("x"), "Exact noised score of the benchmark mixture, vectorized");

  m.def(
      "sample_backward",
      [](double T, double epsilon, double gamma, int n, std::uint64_t seed, int threads) {
        const Potential p = Potential::benchmark_mixture();
        SamplerConfig cfg;
        cfg.T = T;
        cfg.epsilon = epsilon;
        cfg.gamma = gamma;
        cfg.n = n;
        cfg.dim = 1;
        cfg.seed = seed;
        cfg.threads = threads;
        const BackwardResult res = backward_em(cfg, exact_mixture_batch(p));
        return res.samples;
      },
      py::arg("T") = 8.0, py::arg("epsilon") = 1e-2, py::arg("gamma") = 1e-3,
      py::arg("n") = 1000, py::arg("seed") = 0, py::arg("threads") = 1,
      "Backward integrator on the benchmark target with the exact score");

  m.def(
      "sample_target",
      [](int n, std::uint64_t seed) {
        return sample_target(Potential::benchmark_mixture(), n, seed);
      },
      py::arg("n"), py::arg("seed") = 0, "Direct draws from the benchmark target");

  m.def(
      "w2",
      [](std::vector<double> a, std::vector<double> b) {
        return w2_quantile_1d(std::move(a), std::move(b));
      },
      py::arg("a"), py::arg("b"), "Quadratic transport distance between 1-D clouds");

  m.def(
      "error_budget",
      [](int dim, double e_x0_sq, double K, double mu, double T, double epsilon, double gamma,
         double alpha, double zeta, double k1, double k3, double k4, double k_total,
         double eps_al, double theta_star_sq, double eps_sn, double e_theta4,
         const std::string& rate) {
        BoundInputs in;
        in.dim = dim;
        in.e_x0_sq = e_x0_sq;
        in.K = K;
        in.mu = mu;
        in.T = T;
        in.epsilon = epsilon;
        in.gamma = gamma;
        in.alpha = alpha;
        in.zeta = zeta;
        in.k1 = k1;
        in.k3 = k3;
        in.k4 = k4;
        in.k_total = k_total;
        in.eps_al = eps_al;
        in.theta_star_sq = theta_star_sq;
        in.eps_sn = eps_sn;
        in.e_theta4 = e_theta4;
        const BoundBreakdown b = w2_error_budget(
            in, rate == "holder" ? DiscretizationRate::holder : DiscretizationRate::sqrt_gamma);
        py::dict terms;
        for (const auto& t : b.terms) {
          py::dict td;
          td["value"] = t.value;
          td["log_value"] = t.log_value;
          td["saturated"] = t.saturated;
          terms[t.name.c_str()] = td;
        }
        py::dict out;
        out["terms"] = terms;
        out["total"] = b.total;
        out["saturated"] = b.saturated;
        return out;
      },
      py::arg("dim") = 1, py::arg("e_x0_sq") = 1.0, py::arg("K") = 0.0, py::arg("mu") = 1.0,
      py::arg("T") = 8.0, py::arg("epsilon") = 1e-2, py::arg("gamma") = 1e-3,
      py::arg("alpha") = 1.0, py::arg("zeta") = 0.5, py::arg("k1") = 0.0, py::arg("k3") = 0.0,
      py::arg("k4") = 0.0, py::arg("k_total") = 0.0, py::arg("eps_al") = 0.0,
      py::arg("theta_star_sq") = 0.0, py::arg("eps_sn") = 0.0, py::arg("e_theta4") = 0.0,
      py::arg("rate") = "sqrt", "Four-term Wasserstein error budget");
}
