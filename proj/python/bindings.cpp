#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "gwspeed/coupled_walk.hpp"
#include "gwspeed/errors.hpp"
#include "gwspeed/harness.hpp"
#include "gwspeed/regeneration.hpp"
#include "gwspeed/speed.hpp"
#include "gwspeed/thresholds.hpp"

namespace py = pybind11;
using namespace gwspeed;

namespace {

py::dict estimate_dict(const SpeedEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["method"] = to_string(e.method);
  d["n"] = e.n;
  d["beta"] = e.beta;
  d["dist"] = e.dist;
  d["warning"] = e.warning;
  return d;
}

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  return d;
}

py::dict report_dict(const ThresholdReport& r) {
  py::dict d;
  d["beta1"] = r.beta1;
  d["beta0"] = r.beta0;
  d["delta"] = r.delta;
  d["c_delta"] = r.c_delta;
  d["branch"] = r.branch;
  d["ratio_a"] = r.ratio_a;
  d["ratio_b"] = r.ratio_b;
  d["ratio_a_exact"] = r.ratio_a_exact;
  d["ratio_b_exact"] = r.ratio_b_exact;
  d["num_a"] = r.num_a;
  d["num_b"] = r.num_b;
  d["den"] = r.den;
  d["den_independent"] = r.den_independent;
  return d;
}

py::dict diagnostics_dict(const RegenDiagnostics& g) {
  py::dict d;
  d["attempts"] = g.attempts;
  d["accepted"] = g.accepted;
  d["blocks"] = g.blocks;
  d["duration_over_3k2"] = g.duration_over_3k2;
  d["duration_over_4k1"] = g.duration_over_4k1;
  d["obs_k1_violations"] = g.obs_k1_violations;
  d["obs_k2_violations"] = g.obs_k2_violations;
  d["odd_gaps"] = g.odd_gaps;
  d["super_violations"] = g.super_violations;
  d["late_returns"] = g.late_returns;
  d["first_3k2_counterexample"] = g.first_3k2_counterexample;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Biased random walks on Galton-Watson trees";
  m.attr("__version__") = version_string();

  // Library errors surface as Python exceptions named after the C++ class.
  // Later registrations are tried first, so the base class goes first.
  const auto& base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<PreconditionError>(m, "PreconditionError", base);
  py::register_exception<InvalidDistribution>(m, "InvalidDistribution", base);
  py::register_exception<DominanceViolation>(m, "DominanceViolation", base);
  py::register_exception<DegenerateCoupling>(m, "DegenerateCoupling", base);
  py::register_exception<SeriesDivergent>(m, "SeriesDivergent", base);

  py::class_<ProgenyDistribution>(m, "Progeny")
      .def(py::init([](const std::string& literal) { return ProgenyDistribution::parse(literal); }),
           py::arg("literal"))
      .def_static("from_pairs", &ProgenyDistribution::from_pairs)
      .def_static("point_mass", &ProgenyDistribution::point_mass)
      .def_property_readonly("support",
                             [](const ProgenyDistribution& p) {
                               return std::vector<int>(p.support().begin(), p.support().end());
                             })
      .def_property_readonly("mass",
                             [](const ProgenyDistribution& p) {
                               return std::vector<double>(p.mass().begin(), p.mass().end());
                             })
      .def_property_readonly("mean", &ProgenyDistribution::mean)
      .def("cdf", &ProgenyDistribution::cdf)
      .def("sample",
           [](const ProgenyDistribution& p, std::size_t n, std::uint64_t seed) {
             Stream rng = derive_stream(seed, 0);
             std::vector<int> out(n);
             for (auto& z : out) z = p.sample(rng);
             return out;
           },
           py::arg("n"), py::arg("seed"))
      .def("__eq__", [](const ProgenyDistribution& a, const ProgenyDistribution& b) { return a == b; })
      .def("__repr__", [](const ProgenyDistribution& p) { return "Progeny('" + p.literal() + "')"; })
      .def("__str__", &ProgenyDistribution::literal);

  m.def("dominates", &dominates, py::arg("p1"), py::arg("p2"));
  m.def("alpha", &alpha, py::arg("p"));
  m.def("ell_fold_check", &ell_fold_check, py::arg("p1"), py::arg("p2"), py::arg("ell"));
  m.def(
      "quantile_coupling",
      [](const ProgenyDistribution& p1, const ProgenyDistribution& p2) {
        std::vector<std::tuple<int, int, double>> out;
        const MonotoneCoupling coupling = quantile_couple(p1, p2);
        for (const auto& c : coupling.pairs()) out.emplace_back(c.z1, c.z2, c.prob);
        return out;
      },
      py::arg("p1"), py::arg("p2"), "(z1, z2, prob) rows of the inverse-CDF coupling");

  m.def(
      "beta1",
      [](const ProgenyDistribution& p1, const ProgenyDistribution& p2, double c_delta, double delta) {
        return report_dict(beta1(quantile_couple(p1, p2), c_delta, delta));
      },
      py::arg("p1"), py::arg("p2"), py::arg("c_delta") = 1.0, py::arg("delta") = 0.01);
  m.def(
      "lower_bound_gap",
      [](const ProgenyDistribution& p1, const ProgenyDistribution& p2, double beta, double c) {
        const LowerBound b = lower_bound_gap(quantile_couple(p1, p2), beta, c);
        py::dict d;
        d["value"] = b.value;
        d["form_a"] = b.form_a;
        d["form_b"] = b.form_b;
        return d;
      },
      py::arg("p1"), py::arg("p2"), py::arg("beta"), py::arg("c") = 1.0);
  m.def(
      "numeric_threshold",
      [](const ProgenyDistribution& p1, const ProgenyDistribution& p2, double c, double beta_max) {
        return numeric_threshold(quantile_couple(p1, p2), c, beta_max);
      },
      py::arg("p1"), py::arg("p2"), py::arg("c") = 1.0, py::arg("beta_max") = 1e6);
  m.def("ell_threshold", &ell_threshold, py::arg("beta1"), py::arg("ell"), py::arg("delta") = 0.01);
  m.def("ell_constant", &ell_constant);
  m.def(
      "find_k",
      [](const ProgenyDistribution& p1, const ProgenyDistribution& p2, double beta, std::uint64_t n,
         std::uint64_t seed, int workers, int k_max) {
        FindKOptions o;
        o.k_max = k_max;
        FindKResult r;
        {
          py::gil_scoped_release release;
          r = find_k(p1, p2, beta, n, {seed, workers}, o);
        }
        py::dict d;
        d["k"] = r.k ? py::object(py::int_(*r.k)) : py::object(py::none());
        d["mean_condition"] = r.mean_condition;
        d["warning"] = r.warning;
        std::vector<std::tuple<int, double, double, double>> steps;
        for (const auto& s : r.steps) steps.emplace_back(s.k, s.ratio_a.value, s.ratio_a.std_error, s.upper);
        d["steps"] = steps;
        return d;
      },
      py::arg("p1"), py::arg("p2"), py::arg("beta"), py::arg("n_samples"), py::arg("seed"),
      py::arg("workers") = 1, py::arg("k_max") = 6);

  m.def("closed_form_regular", &closed_form_regular, py::arg("b"), py::arg("beta"));
  m.def(
      "speed_ergodic",
      [](const ProgenyDistribution& p, double beta, std::uint64_t steps, std::uint64_t walks,
         std::uint64_t seed, int workers) {
        SpeedEstimate e;
        {
          py::gil_scoped_release release;
          e = speed_ergodic(p, beta, steps, walks, {seed, workers});
        }
        return estimate_dict(e);
      },
      py::arg("p"), py::arg("beta"), py::arg("n_steps"), py::arg("n_walks"), py::arg("seed"),
      py::arg("workers") = 1);
  m.def(
      "speed_aidekon",
      [](const ProgenyDistribution& p, double beta, std::uint64_t samples, std::uint64_t seed, int workers,
         double gap_tol) {
        AidekonOptions o;
        o.gap_tol = gap_tol;
        SpeedEstimate e;
        {
          py::gil_scoped_release release;
          e = speed_aidekon(p, beta, samples, {seed, workers}, o);
        }
        return estimate_dict(e);
      },
      py::arg("p"), py::arg("beta"), py::arg("n_samples"), py::arg("seed"), py::arg("workers") = 1,
      py::arg("gap_tol") = 1e-8);
  m.def(
      "speed_regen",
      [](const ProgenyDistribution& p1, const ProgenyDistribution& p2, double beta, std::uint64_t blocks,
         std::uint64_t seed, int workers) {
        RegenSpeed r;
        {
          py::gil_scoped_release release;
          r = speed_regen(CouplingSources::quantile(p1, p2), {beta, 1}, blocks, {seed, workers});
        }
        py::dict d;
        d["v1"] = estimate_dict(r.v1);
        d["v2"] = estimate_dict(r.v2);
        d["gap"] = estimate_dict(r.gap);
        d["diff"] = estimate_dict(r.diff);
        d["duration"] = estimate_dict(r.duration);
        d["diagnostics"] = diagnostics_dict(r.diagnostics);
        return d;
      },
      py::arg("p1"), py::arg("p2"), py::arg("beta"), py::arg("n_blocks"), py::arg("seed"), py::arg("workers") = 1);
  m.def(
      "acceptance_rate",
      [](const ProgenyDistribution& p1, const ProgenyDistribution& p2, double beta, std::uint64_t attempts,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        return estimate_acceptance(CouplingSources::quantile(p1, p2), {beta, 1}, attempts, {seed, 1}).rate;
      },
      py::arg("p1"), py::arg("p2"), py::arg("beta"), py::arg("attempts"), py::arg("seed"));
  m.def(
      "audit_tables",
      [](int zmax, std::vector<double> betas, double tol) {
        const AuditReport r = audit_tables(zmax, betas, tol);
        py::dict d;
        d["pairs_checked"] = r.pairs_checked;
        d["max_tiling_gap"] = r.max_tiling_gap;
        d["max_marginal_error"] = r.max_marginal_error;
        return d;
      },
      py::arg("zmax"), py::arg("betas"), py::arg("tol") = 1e-12);

  m.def(
      "run_experiment",
      [](const std::string& kind, const std::filesystem::path& config, std::optional<std::uint64_t> seed,
         std::optional<int> workers, std::optional<std::filesystem::path> out) {
        RunOptions o{seed, workers, out};
        RunResult r;
        {
          py::gil_scoped_release release;
          std::ostringstream log;
          r = run_experiment(kind, Config::load(config), o, log);
        }
        py::dict d;
        d["exit_code"] = r.exit_code;
        d["message"] = r.message;
        d["out_dir"] = r.out_dir;
        d["summary"] = r.summary.dump();
        d["manifest"] = r.manifest.dump();
        return d;
      },
      py::arg("kind"), py::arg("config"), py::arg("seed") = py::none(), py::arg("workers") = py::none(),
      py::arg("out") = py::none(), "Runs one CLI experiment; summary and manifest are JSON strings.");
}
