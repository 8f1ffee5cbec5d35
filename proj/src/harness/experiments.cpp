#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>

#include "gwspeed/coupled_walk.hpp"
#include "gwspeed/errors.hpp"
#include "gwspeed/harness.hpp"
#include "gwspeed/regeneration.hpp"
#include "gwspeed/speed.hpp"
#include "gwspeed/thresholds.hpp"
#include "output.hpp"
#include "rational.hpp"

namespace gwspeed {

const char* version_string() {
#ifdef GWSPEED_VERSION
  return GWSPEED_VERSION;
#else
  return "unknown";
#endif
}

namespace {

using nlohmann::json;
using harness::CsvTable;
using harness::num;
using harness::PlotSpec;
using harness::Series;
namespace fs = std::filesystem;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Decimal or p/q.
double parse_number(const std::string& key, const std::string& s) {
  try {
    return detail::to_double(detail::parse_rational(s));
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + s + "' is not a number");
  }
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Context {
  Context(const Config& config, std::string kind, std::uint64_t s, int w, fs::path dir, std::ostream& os)
      : cfg(config), section(std::move(kind)), seed(s), workers(w), out(std::move(dir)), log(os) {}

  const Config& cfg;
  std::string section;
  std::uint64_t seed = 0;
  int workers = 1;
  fs::path out;
  std::ostream& log;
  json summary = json::object();
  json task_seeds = json::array();
  std::vector<std::string> files;
  std::string message;

  std::string key(const std::string& k) const { return section + "." + k; }

  /// Parallelism for one independent job (one grid point); its master seed
  /// is derived from the run seed and recorded in the manifest.
  Parallelism job(const std::string& label, std::uint64_t index) {
    const std::uint64_t s = derived_seed(seed, index);
    task_seeds.push_back({{"task", label}, {"index", index}, {"seed", std::to_string(s)}});
    return {s, workers};
  }

  /// Rejects typos once every parameter has been read, before any work.
  void parameters_done() const {
    std::set<std::string> other;
    for (const auto& k : experiment_kinds()) {
      if (k != section) other.insert(k);
    }
    cfg.reject_unused(other);
  }

  void csv(const std::string& name, const CsvTable& t) {
    t.write(out / name);
    summary["files"][name] = {{"rows", t.rows()}};
    files.push_back(name);
  }

  void svg(const std::string& name, const PlotSpec& spec, const std::vector<Series>& series) {
    harness::write_svg(out / name, spec, series);
    files.push_back(name);
  }

  void json_file(const std::string& name, const json& j) {
    std::ofstream(out / name) << j.dump(2) << '\n';
    files.push_back(name);
  }
};

RegenOptions regen_options(const Context& c) {
  RegenOptions o;
  o.margin = static_cast<int>(c.cfg.integer(c.key("margin"), o.margin));
  o.horizon = c.cfg.integer(c.key("horizon"), o.horizon);
  o.task_blocks = c.cfg.count(c.key("task_blocks"), o.task_blocks);
  o.blocks_per_trajectory = c.cfg.count(c.key("blocks_per_trajectory"), o.blocks_per_trajectory);
  if (o.margin < 1 || o.horizon < 1) throw ConfigError("margin and horizon must be >= 1");
  return o;
}

CouplingSources pair_sources(const Context& c) {
  const ProgenyDistribution p1 = c.cfg.dist(c.key("p1"));
  const ProgenyDistribution p2 = c.cfg.dist(c.key("p2"));
  if (!c.cfg.has(c.key("coupling"))) return CouplingSources::quantile(p1, p2);
  fs::path path = c.cfg.text(c.key("coupling"));
  if (path.is_relative() && !c.cfg.source().empty()) path = c.cfg.source().parent_path() / path;
  return {p1, p2, MonotoneCoupling::load_csv(path, p1, p2)};
}

std::vector<double> betas_above_one(const Context& c) {
  const auto betas = c.cfg.reals(c.key("betas"));
  for (double b : betas) {
    if (!(b > 1.0)) throw ConfigError(c.key("betas") + " values must be > 1");
  }
  return betas;
}

// ---------------------------------------------------------------------------

void run_speed(Context& c) {
  const ProgenyDistribution p = c.cfg.dist(c.key("dist"));
  const auto betas = c.cfg.reals(c.key("betas"));
  std::vector<std::string> methods{"ergodic"};
  if (c.cfg.has(c.key("methods"))) methods = c.cfg.list(c.key("methods"));
  const auto steps = c.cfg.count(c.key("steps"), 10'000);
  const auto walks = c.cfg.count(c.key("walks"), 100);
  const auto samples = c.cfg.count(c.key("samples"), 10'000);
  const auto blocks = c.cfg.count(c.key("blocks"), 10'000);
  AidekonOptions ao;
  ao.depth = static_cast<int>(c.cfg.integer(c.key("depth"), ao.depth));
  ao.gap_tol = c.cfg.real(c.key("gap_tol"), ao.gap_tol);
  ao.escape.depth_cap = static_cast<int>(c.cfg.integer(c.key("depth_cap"), ao.escape.depth_cap));
  ao.escape.vertex_cap = c.cfg.count(c.key("vertex_cap"), ao.escape.vertex_cap);
  const RegenOptions ro = regen_options(c);
  for (double b : betas) {
    if (!(b > 0)) throw ConfigError(c.key("betas") + " values must be > 0");
  }
  for (const auto& m : methods) {
    if (m != "ergodic" && m != "aidekon" && m != "regen" && m != "closed_form") {
      throw ConfigError(c.key("methods") + ": unknown method '" + m + "'");
    }
    if (m == "closed_form" && p.support().size() != 1) {
      throw ConfigError("closed_form needs a point-mass distribution");
    }
  }
  c.parameters_done();

  CsvTable t({"method", "beta", "dist", "value", "stderr", "n"});
  json warnings = json::array();
  std::vector<Series> plot;
  std::uint64_t index = 0;
  for (const auto& m : methods) {
    Series s{m, {}, {}, {}};
    for (double beta : betas) {
      const Parallelism par = c.job(m + " beta=" + num(beta), index++);
      SpeedEstimate e;
      if (m == "ergodic") {
        e = speed_ergodic(p, beta, steps, walks, par);
      } else if (m == "aidekon") {
        e = speed_aidekon(p, beta, samples, par, ao);
      } else if (m == "regen") {
        e = speed_regen(CouplingSources::quantile(p, p), {beta, 1}, blocks, par, ro).v1;
      } else {
        e.value = closed_form_regular(p.min_support(), beta);
        e.method = SpeedMethod::closed_form;
        e.n = 0;
      }
      t.add({m, num(beta), p.literal(), num(e.value), num(e.std_error), num(e.n)});
      if (!e.warning.empty()) warnings.push_back({{"method", m}, {"beta", beta}, {"warning", e.warning}});
      s.x.push_back(beta);
      s.y.push_back(e.value);
      s.err.push_back(e.std_error);
      c.log << m << " beta=" << beta << " v=" << e.value << " se=" << e.std_error << '\n';
    }
    plot.push_back(std::move(s));
  }
  c.csv("speed.csv", t);
  c.summary["dist"] = p.literal();
  c.summary["warnings"] = warnings;
  c.svg("speed.svg", {"speed v(beta) of " + p.literal(), "beta", "speed", false, false}, plot);
  c.message = "OK " + std::to_string(t.rows()) + " speed rows";
}

void run_compare(Context& c) {
  const CouplingSources src = pair_sources(c);
  const auto betas = betas_above_one(c);
  const auto blocks = c.cfg.count(c.key("blocks"), 100'000);
  const int d = static_cast<int>(c.cfg.integer(c.key("d"), 1));
  const RegenOptions ro = regen_options(c);
  c.parameters_done();

  CsvTable t({"beta", "v1", "v1_se", "v2", "v2_se", "gap", "gap_se", "diff", "diff_se", "blocks"});
  Series gap{"gap per block", {}, {}, {}}, diff{"v1 - v2", {}, {}, {}};
  std::uint64_t positive = 0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double beta = betas[i];
    const RegenSpeed r = speed_regen(src, {beta, d}, blocks, c.job("beta=" + num(beta), i), ro);
    t.add({num(beta), num(r.v1.value), num(r.v1.std_error), num(r.v2.value), num(r.v2.std_error),
           num(r.gap.value), num(r.gap.std_error), num(r.diff.value), num(r.diff.std_error), num(r.v1.n)});
    positive += r.gap.value > 0;
    gap.x.push_back(beta);
    gap.y.push_back(r.gap.value);
    gap.err.push_back(r.gap.std_error);
    diff.x.push_back(beta);
    diff.y.push_back(r.diff.value);
    diff.err.push_back(r.diff.std_error);
    c.log << "beta=" << beta << " gap=" << r.gap.value << " se=" << r.gap.std_error << '\n';
  }
  c.csv("compare.csv", t);
  c.summary["p1"] = src.first.literal();
  c.summary["p2"] = src.second.literal();
  c.summary["positive_gap_rows"] = positive;
  c.svg("gap.svg", {"coupled gap, " + src.first.literal() + " vs " + src.second.literal(), "beta", "gap", false, true},
        {gap, diff});
  c.message = "OK " + std::to_string(positive) + "/" + std::to_string(t.rows()) + " rows with positive gap";
}

void run_audit(Context& c) {
  const int zmax = static_cast<int>(c.cfg.integer(c.key("zmax"), 20));
  std::vector<std::string> beta_text{"1.5", "2", "5.76", "8", "50"};
  if (c.cfg.has(c.key("betas"))) beta_text = c.cfg.list(c.key("betas"));
  const double tol = c.cfg.real(c.key("tol"), 1e-12);
  const bool exact = c.cfg.flag(c.key("exact"), false);
  const int d = static_cast<int>(c.cfg.integer(c.key("d"), 1));
  std::vector<double> betas;
  for (const auto& s : beta_text) betas.push_back(parse_number(c.key("betas"), s));
  c.parameters_done();

  const AuditReport r = exact ? audit_tables_exact(zmax, beta_text, d) : audit_tables(zmax, betas, tol, d);
  CsvTable t({"zmax", "betas", "exact", "pairs_checked", "eta3_ge_eta4", "eta3_lt_eta4", "first_has_fewer",
              "max_tiling_gap", "max_marginal_error"});
  std::string joined;
  for (const auto& s : beta_text) joined += (joined.empty() ? "" : " ") + s;
  t.add({num(zmax), joined, exact ? "true" : "false", num(std::uint64_t{r.pairs_checked}),
         num(std::uint64_t{r.eta3_ge_eta4}), num(std::uint64_t{r.eta3_lt_eta4}),
         num(std::uint64_t{r.first_has_fewer}), num(r.max_tiling_gap), num(r.max_marginal_error)});
  c.csv("audit.csv", t);
  const double max_err = std::max(r.max_tiling_gap, r.max_marginal_error);
  c.summary["max_err"] = max_err;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", tol);
  c.message = exact ? std::string("PASS exact") : std::string("PASS max_err<") + buf;
}

struct StatsState {
  MeanAccumulator duration, gap;
  RatioAccumulator v1, v2;
  std::vector<std::uint64_t> hist;
};

void run_regen_stats(Context& c) {
  const CouplingSources src = pair_sources(c);
  const auto betas = betas_above_one(c);
  const auto blocks = c.cfg.count(c.key("blocks"), 100'000);
  const int d = static_cast<int>(c.cfg.integer(c.key("d"), 1));
  const std::int64_t step_log = c.cfg.integer(c.key("step_log"), 0);
  const RegenOptions ro = regen_options(c);
  c.parameters_done();

  CsvTable t({"beta", "blocks", "acceptance", "duration", "duration_se", "gap", "gap_se", "v1", "v2",
              "duration_over_3k2", "duration_over_4k1", "max_excess_3k2", "obs_k1_violations",
              "obs_k2_violations", "odd_gaps", "super_violations", "late_returns"});
  CsvTable tail({"beta", "k", "count", "pmf"});
  std::vector<Series> tail_plot;
  json per_beta = json::array();
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double beta = betas[i];
    const auto parts = harvest_tasks<StatsState>(src, {beta, d}, blocks, c.job("beta=" + num(beta), i), ro,
                                                 [](StatsState& s, const RegenBlock& b) {
                                                   const auto dur = static_cast<double>(b.duration);
                                                   s.duration.add(dur);
                                                   s.gap.add(static_cast<double>(b.gap()));
                                                   s.v1.add(static_cast<double>(b.dx1), dur);
                                                   s.v2.add(static_cast<double>(b.dx2), dur);
                                                   if (s.hist.size() <= static_cast<std::size_t>(b.k)) {
                                                     s.hist.resize(static_cast<std::size_t>(b.k) + 1);
                                                   }
                                                   ++s.hist[static_cast<std::size_t>(b.k)];
                                                 });
    StatsState all;
    RegenDiagnostics diag;
    for (const auto& [s, dg] : parts) {
      all.duration.merge(s.duration);
      all.gap.merge(s.gap);
      all.v1.merge(s.v1);
      all.v2.merge(s.v2);
      if (all.hist.size() < s.hist.size()) all.hist.resize(s.hist.size());
      for (std::size_t k = 0; k < s.hist.size(); ++k) all.hist[k] += s.hist[k];
      diag.merge(dg);
    }
    const Estimate dur = all.duration.estimate(), gap = all.gap.estimate();
    t.add({num(beta), num(diag.blocks), num(diag.acceptance_rate()), num(dur.value), num(dur.std_error),
           num(gap.value), num(gap.std_error), num(all.v1.estimate().value), num(all.v2.estimate().value),
           num(diag.duration_over_3k2), num(diag.duration_over_4k1), num(diag.max_excess_3k2),
           num(diag.obs_k1_violations), num(diag.obs_k2_violations), num(diag.odd_gaps),
           num(diag.super_violations), num(diag.late_returns)});
    Series s{"beta=" + num(beta), {}, {}, {}};
    for (std::size_t k = 0; k < all.hist.size(); ++k) {
      const double pmf = static_cast<double>(all.hist[k]) / static_cast<double>(diag.blocks);
      tail.add({num(beta), num(static_cast<std::uint64_t>(k)), num(all.hist[k]), num(pmf)});
      s.x.push_back(static_cast<double>(k));
      s.y.push_back(pmf);
    }
    tail_plot.push_back(std::move(s));
    const auto [rate, rate_se] = fit_geometric_rate(all.hist);
    per_beta.push_back({{"beta", beta},
                        {"fitted_rate", rate},
                        {"fitted_rate_se", rate_se},
                        {"bound_rate", 27.0 / (4.0 * (1.0 + beta))},
                        {"first_3k2_counterexample", diag.first_3k2_counterexample}});
    c.log << "beta=" << beta << " blocks=" << diag.blocks << " over_3k2=" << diag.duration_over_3k2
          << " over_4k1=" << diag.duration_over_4k1 << '\n';
  }
  c.csv("regen_stats.csv", t);
  c.csv("tail_B.csv", tail);
  c.summary["tail"] = per_beta;
  c.svg("tail_B.svg", {"P(|B| = k)", "k", "probability", true, false}, tail_plot);

  if (step_log > 0) {
    Stream rng = derive_stream(c.job("step_log", betas.size()).seed, 0);
    CoupledWalk w(src, {betas.front(), d});
    std::vector<StepRecord> steps;
    for (std::int64_t n = 0; n < step_log; ++n) steps.push_back(w.step(rng));
    std::ofstream os(c.out / "steps.csv", std::ios::binary);
    write_step_log(os, steps);
    c.summary["files"]["steps.csv"] = {{"rows", steps.size()}};
    c.files.push_back("steps.csv");
  }
  c.message = "OK " + std::to_string(t.rows()) + " beta rows";
}

void run_threshold(Context& c) {
  const CouplingSources src = pair_sources(c);
  const std::string mode = c.cfg.text(c.key("mode"), "formula");
  const double delta = c.cfg.real(c.key("delta"), 0.01);
  const double const_c = c.cfg.real(c.key("c"), 1.0);
  const std::string c_delta_text = c.cfg.text(c.key("c_delta"), "1");
  const double beta_max = c.cfg.real(c.key("beta_max"), 1e6);
  const int ell = static_cast<int>(c.cfg.integer(c.key("ell"), 1));
  const int d = static_cast<int>(c.cfg.integer(c.key("d"), 2));
  std::vector<double> grid;
  if (c.cfg.has(c.key("grid"))) grid = c.cfg.reals(c.key("grid"));
  if (mode != "formula" && mode != "numeric" && mode != "ell" && mode != "dscaled") {
    throw ConfigError(c.key("mode") + " must be formula, numeric, ell or dscaled");
  }
  c.parameters_done();

  json out;
  ThresholdReport r = beta1(src.joint, 1.0, delta);
  double c_delta = 1.0;
  double numeric = std::numeric_limits<double>::quiet_NaN();
  if (mode == "numeric" || c_delta_text == "derived") numeric = numeric_threshold(src.joint, const_c, beta_max);
  if (c_delta_text == "derived") {
    // The smallest c_delta for which beta1 reaches the series threshold.
    const double m = std::min(r.ratio_a, r.ratio_b);
    if (!(m > 0) || !std::isfinite(numeric)) throw DegenerateCoupling("c_delta cannot be derived: min ratio is 0");
    c_delta = numeric / m;
  } else {
    c_delta = parse_number(c.key("c_delta"), c_delta_text);
  }
  r = beta1(src.joint, c_delta, delta);
  out["p1"] = src.first.literal();
  out["p2"] = src.second.literal();
  out["mode"] = mode;
  out["report"] = {{"beta1", r.beta1},
                   {"beta0", r.beta0},
                   {"delta", r.delta},
                   {"c_delta", r.c_delta},
                   {"c_delta_derived", c_delta_text == "derived"},
                   {"branch", r.branch},
                   {"ratio_a", r.ratio_a},
                   {"ratio_b", r.ratio_b},
                   {"ratio_a_exact", r.ratio_a_exact},
                   {"ratio_b_exact", r.ratio_b_exact},
                   {"num_a", r.num_a},
                   {"num_b", r.num_b},
                   {"den", r.den},
                   {"den_independent", r.den_independent}};
  double value = r.beta0;
  if (mode == "numeric") {
    value = numeric;
    out["c"] = const_c;
  } else if (mode == "ell") {
    if (!ell_fold_check(src.first, src.second, ell)) {
      throw CouplingUnavailable(std::to_string(ell) + "-fold domination does not hold");
    }
    value = ell_threshold(r.beta1, ell, delta);
    out["ell"] = ell;
    out["K"] = ell_constant();
  } else if (mode == "dscaled") {
    value = d_scaled_threshold(r, src.first, src.second, d);
    out["d"] = d;
  }
  out["threshold"] = finite_or_null(value);
  if (!std::isnan(numeric)) out["numeric_threshold"] = finite_or_null(numeric);
  c.json_file("threshold.json", out);
  c.summary["threshold"] = out["threshold"];

  if (!grid.empty()) {
    CsvTable t({"beta", "form_a", "form_b", "value"});
    Series fa{"form A", {}, {}, {}}, fb{"form B", {}, {}, {}};
    for (double b : grid) {
      const LowerBound lb = lower_bound_gap(r, b, const_c);
      t.add({num(b), num(lb.form_a), num(lb.form_b), num(lb.value)});
      fa.x.push_back(b);
      fa.y.push_back(lb.form_a);
      fb.x.push_back(b);
      fb.y.push_back(lb.form_b);
    }
    c.csv("lower_bound.csv", t);
    c.svg("lower_bound.svg", {"explicit lower bound on the gap", "beta", "bound", false, true}, {fa, fb});
  }
  c.message = "OK " + mode + " threshold " + (std::isfinite(value) ? num(value) : std::string("inf"));
}

void run_ell_check(Context& c) {
  const ProgenyDistribution p1 = c.cfg.dist(c.key("p1"));
  const ProgenyDistribution p2 = c.cfg.dist(c.key("p2"));
  std::vector<double> ells{1, 2, 3, 4};
  if (c.cfg.has(c.key("ells"))) ells = c.cfg.reals(c.key("ells"));
  const double delta = c.cfg.real(c.key("delta"), 0.01);
  const std::int64_t draws = c.cfg.integer(c.key("draws"), 0);
  c.parameters_done();

  const ThresholdReport r = beta1(quantile_couple(p1, p2), 1.0, delta);
  CsvTable t({"ell", "check", "beta1", "threshold", "draws", "violations"});
  for (std::size_t i = 0; i < ells.size(); ++i) {
    const int ell = static_cast<int>(ells[i]);
    if (ell < 1 || ell != ells[i]) throw ConfigError(c.key("ells") + " values must be positive integers");
    const bool ok = ell_fold_check(p1, p2, ell);
    std::uint64_t violations = 0;
    std::int64_t done = 0;
    if (ok && draws > 0) {
      const EllFoldCoupling coupling(p1, p2, ell);
      Stream rng = derive_stream(c.job("ell=" + std::to_string(ell), i).seed, 0);
      for (; done < draws; ++done) {
        const EllFoldDraw dr = coupling.sample(rng);
        violations += *std::min_element(dr.first.begin(), dr.first.end()) <
                      *std::max_element(dr.second.begin(), dr.second.end());
      }
    }
    t.add({num(ell), ok ? "true" : "false", num(r.beta1), ok ? num(ell_threshold(r.beta1, ell, delta)) : "",
           num(done), num(violations)});
  }
  c.csv("ell_check.csv", t);
  c.summary["K"] = ell_constant();
  c.message = "OK " + std::to_string(t.rows()) + " ell rows";
}

void run_gen_k(Context& c) {
  const ProgenyDistribution p1 = c.cfg.dist(c.key("p1"));
  const ProgenyDistribution p2 = c.cfg.dist(c.key("p2"));
  const double beta = c.cfg.real(c.key("beta"));
  const auto samples = c.cfg.count(c.key("samples"), 20'000);
  FindKOptions o;
  o.k_max = static_cast<int>(c.cfg.integer(c.key("k_max"), o.k_max));
  o.z = c.cfg.real(c.key("z"), o.z);
  o.c_delta = c.cfg.real(c.key("c_delta"), o.c_delta);
  o.task_samples = c.cfg.count(c.key("task_samples"), o.task_samples);
  o.population_cap = c.cfg.count(c.key("population_cap"), o.population_cap);
  c.parameters_done();

  const FindKResult r = find_k(p1, p2, beta, samples, c.job("find_k", 0), o);
  CsvTable t({"k", "ratio_a", "ratio_a_se", "upper"});
  for (const auto& s : r.steps) {
    t.add({num(s.k), num(s.ratio_a.value), num(s.ratio_a.std_error), num(s.upper)});
  }
  c.csv("gen_k.csv", t);
  c.summary["k"] = r.k ? json(*r.k) : json(nullptr);
  c.summary["mean_condition"] = r.mean_condition;
  c.summary["warning"] = r.warning;
  c.message = r.k ? "OK k=" + std::to_string(*r.k) : "NotFound up to k_max=" + std::to_string(o.k_max);
}

}  // namespace

RunResult run_experiment(const std::string& kind, const Config& config, const RunOptions& options,
                         std::ostream& log) {
  RunResult result;
  json manifest = {{"tool", "gwspeed"},
                   {"version", version_string()},
                   {"kind", kind},
                   {"config_file", config.source().string()},
                   {"config_text", config.raw()},
                   {"started_at", utc_now()},
                   {"complete", false}};
  // Command-line overrides still count as reading the [run] keys they shadow.
  for (const char* k : {"run.out", "run.seed", "run.workers"}) {
    if (config.has(k)) config.text(k);
  }
  fs::path out = options.out ? *options.out : fs::path(config.text("run.out", "gwspeed-out/" + kind));
  result.out_dir = out;

  std::optional<Context> ctx;
  try {
    std::uint64_t seed = 0;
    if (options.seed) {
      seed = *options.seed;
    } else if (config.has("run.seed")) {
      const std::string s = config.text("run.seed");
      std::size_t pos = 0;
      try {
        seed = std::stoull(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != s.size() || s.empty() || s.front() == '-') throw ConfigError("run.seed must be a 64-bit unsigned integer");
    } else {
      throw ConfigError("a seed is required (--seed or run.seed); there is no clock-based default");
    }
    int workers = 1;
    if (options.workers) {
      workers = *options.workers;
    } else if (config.has("run.workers")) {
      workers = static_cast<int>(config.integer("run.workers", 1));
    } else if (const char* env = std::getenv("GWSPEED_WORKERS")) {
      try {
        workers = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("GWSPEED_WORKERS='") + env + "' is not an integer");
      }
    }
    if (workers < 1) throw ConfigError("workers must be >= 1");
    manifest["seed"] = std::to_string(seed);
    manifest["workers"] = workers;
    fs::create_directories(out);

    ctx.emplace(config, kind, seed, workers, out, log);
    ctx->summary["kind"] = kind;
    ctx->summary["files"] = json::object();
    if (kind == "speed") {
      run_speed(*ctx);
    } else if (kind == "compare") {
      run_compare(*ctx);
    } else if (kind == "coupling-audit") {
      run_audit(*ctx);
    } else if (kind == "regen-stats") {
      run_regen_stats(*ctx);
    } else if (kind == "threshold") {
      run_threshold(*ctx);
    } else if (kind == "ell-check") {
      run_ell_check(*ctx);
    } else if (kind == "gen-k") {
      run_gen_k(*ctx);
    } else {
      throw ConfigError("unknown experiment kind '" + kind + "'");
    }
    manifest["complete"] = true;
    result.message = ctx->message;
  } catch (const AuditFailure& e) {
    result.exit_code = exit_code(e.category());
    result.message = std::string("FAIL ") + e.what();
  } catch (const Error& e) {
    result.exit_code = exit_code(e.category());
    result.message = std::string("error [") + kind + "]: " + e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    result.exit_code = 2;
    result.message = std::string("error [") + kind + "]: " + e.what();
  }
  manifest["exit_code"] = result.exit_code;
  manifest["message"] = result.message;
  manifest["finished_at"] = utc_now();

  json resolved = json::object();
  for (const auto& [k, v] : config.values()) resolved[k] = v;
  manifest["config"] = resolved;

  if (ctx) {
    ctx->json_file("summary.json", ctx->summary);
    manifest["task_seeds"] = ctx->task_seeds;
    json outputs = json::array();
    for (const auto& f : ctx->files) {
      json entry = {{"file", f}, {"sha256", sha256_file(out / f)}};
      if (ctx->summary["files"].contains(f)) entry["rows"] = ctx->summary["files"][f]["rows"];
      outputs.push_back(entry);
    }
    manifest["outputs"] = outputs;
    result.summary = ctx->summary;
    std::ofstream(out / "manifest.json") << manifest.dump(2) << '\n';
  }
  result.manifest = manifest;
  return result;
}

}  // namespace gwspeed
