#include "gwspeed/speed.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gwspeed/errors.hpp"

namespace gwspeed {

const char* to_string(SpeedMethod m) {
  switch (m) {
    case SpeedMethod::ergodic:
      return "ergodic";
    case SpeedMethod::regen_ratio:
      return "regen";
    case SpeedMethod::aidekon:
      return "aidekon";
    case SpeedMethod::closed_form:
      return "closed_form";
  }
  return "?";
}

SpeedEstimate speed_ergodic(const ProgenyDistribution& p, double beta, std::uint64_t n_steps,
                            std::uint64_t n_walks, Parallelism par) {
  if (!(beta > 0)) throw PreconditionError("beta must be > 0");
  if (n_steps < 1 || n_walks < 1) throw PreconditionError("n_steps and n_walks must be >= 1");
  const auto ratios = run_tasks(n_walks, par.workers, [&](std::size_t i) {
    Stream rng = derive_stream(par.seed, i);
    BiasedWalk w(p, beta);
    for (std::uint64_t s = 0; s < n_steps; ++s) w.step(rng);
    return static_cast<double>(w.depth()) / static_cast<double>(n_steps);
  });
  MeanAccumulator acc;
  for (double r : ratios) acc.add(r);
  SpeedEstimate e;
  e.value = acc.mean();
  e.std_error = acc.estimate().std_error;
  e.method = SpeedMethod::ergodic;
  e.n = n_walks;
  e.beta = beta;
  e.dist = p.literal();
  if (beta * p.mean() <= 1.0) e.warning = "beta <= 1/mean: walk is not transient";
  if (n_steps < 1000) e.warning += (e.warning.empty() ? "" : "; ") + std::string("n_steps < 1000");
  return e;
}

namespace {

struct RegenTally {
  RatioAccumulator v1, v2, diff;
  MeanAccumulator gap, duration;
};

}  // namespace

RegenSpeed speed_regen(const CouplingSources& sources, BiasParams params, std::uint64_t n_blocks,
                       Parallelism par, RegenOptions opts) {
  if (n_blocks < 1) throw PreconditionError("n_blocks must be >= 1");
  const auto parts = harvest_tasks<RegenTally>(
      sources, params, n_blocks, par, opts, [](RegenTally& t, const RegenBlock& b) {
        const auto dur = static_cast<double>(b.duration);
        t.v1.add(static_cast<double>(b.dx1), dur);
        t.v2.add(static_cast<double>(b.dx2), dur);
        t.diff.add(static_cast<double>(b.gap()), dur);
        t.gap.add(static_cast<double>(b.gap()));
        t.duration.add(dur);
      });
  RegenTally all;
  RegenSpeed out;
  for (const auto& [t, d] : parts) {
    all.v1.merge(t.v1);
    all.v2.merge(t.v2);
    all.diff.merge(t.diff);
    all.gap.merge(t.gap);
    all.duration.merge(t.duration);
    out.diagnostics.merge(d);
  }
  const auto fill = [&](SpeedEstimate& s, const RatioAccumulator& r, const ProgenyDistribution& p) {
    const Estimate e = r.estimate();
    s.value = e.value;
    s.std_error = e.std_error;
    s.method = SpeedMethod::regen_ratio;
    s.n = r.count();
    s.beta = params.beta;
    s.dist = p.literal();
  };
  fill(out.v1, all.v1, sources.first);
  fill(out.v2, all.v2, sources.second);
  out.gap = all.gap.estimate();
  out.diff = all.diff.estimate();
  out.duration = all.duration.estimate();
  return out;
}

double regular_escape(int b, double beta) {
  const double x = b * beta;
  return x > 1.0 ? (x - 1.0) / x : 0.0;
}

EscapeSample sample_escape(const ProgenyDistribution& p, double beta, int depth, double gap_tol,
                           Stream& rng, EscapeOptions opts) {
  if (depth < 1) throw PreconditionError("escape depth must be >= 1");
  if (!(beta * p.mean() > 1.0)) throw PreconditionError("escape sampling needs beta * mean > 1");
  if (!(beta * p.min_support() > 1.0)) {
    throw PreconditionError("escape sandwich needs beta * min_support > 1 for a positive lower bound");
  }
  const double lo_b = regular_escape(p.min_support(), beta);
  const double hi_b = regular_escape(p.max_support(), beta);

  // counts[d][j]: children of vertex j on level d; children of level-d
  // vertices are stored consecutively on level d + 1.
  std::vector<std::vector<int>> counts;
  std::uint64_t vertices = 1;
  std::size_t frontier = 1;
  auto grow = [&] {
    std::vector<int> level(frontier);
    std::size_t next = 0;
    for (auto& c : level) {
      c = p.sample(rng);
      next += static_cast<std::size_t>(c);
    }
    counts.push_back(std::move(level));
    frontier = next;
    vertices += next;
    if (vertices > opts.vertex_cap) {
      throw DepthCapExceeded("escape tree exceeded " + std::to_string(opts.vertex_cap) + " vertices");
    }
  };
  for (int d = 0; d < depth; ++d) grow();

  std::vector<double> lo, hi, lo_up, hi_up;
  for (;;) {
    if (lo_b == hi_b) return {lo_b, hi_b, static_cast<int>(counts.size())};
    lo.assign(frontier, lo_b);
    hi.assign(frontier, hi_b);
    for (std::size_t d = counts.size(); d-- > 0;) {
      const auto& level = counts[d];
      lo_up.resize(level.size());
      hi_up.resize(level.size());
      std::size_t c = 0;
      for (std::size_t j = 0; j < level.size(); ++j) {
        double sl = 0, sh = 0;
        for (int i = 0; i < level[j]; ++i, ++c) {
          sl += lo[c];
          sh += hi[c];
        }
        lo_up[j] = beta * sl / (1.0 + beta * sl);
        hi_up[j] = beta * sh / (1.0 + beta * sh);
      }
      lo.swap(lo_up);
      hi.swap(hi_up);
    }
    EscapeSample s{lo[0], hi[0], static_cast<int>(counts.size())};
    if (s.upper - s.lower <= gap_tol) return s;
    if (static_cast<int>(counts.size()) >= opts.depth_cap) {
      throw DepthCapExceeded("escape sandwich gap " + std::to_string(s.upper - s.lower) +
                             " above tolerance at depth " + std::to_string(counts.size()));
    }
    grow();
  }
}

SpeedEstimate speed_aidekon(const ProgenyDistribution& p, double beta, std::uint64_t n_samples,
                            Parallelism par, AidekonOptions opts) {
  if (!(beta * p.mean() > 1.0)) throw PreconditionError("Aidekon estimator needs beta * mean > 1");
  if (n_samples < 1) throw PreconditionError("n_samples must be >= 1");
  constexpr double kDenominatorFloor = 1e-12;
  struct Part {
    RatioAccumulator ratio;
    std::uint64_t flagged = 0;
  };
  const auto sizes = split_work(n_samples, opts.task_samples);
  const auto parts = run_tasks(sizes.size(), par.workers, [&](std::size_t t) {
    Stream rng = derive_stream(par.seed, t);
    Part part;
    std::vector<double> ys;
    for (std::uint64_t s = 0; s < sizes[t]; ++s) {
      const int z = p.sample(rng);
      ys.resize(static_cast<std::size_t>(z) + 1);
      double sum = 0;
      for (auto& y : ys) {
        y = sample_escape(p, beta, opts.depth, opts.gap_tol, rng, opts.escape).midpoint();
        sum += y;
      }
      const double den = 1.0 - beta + beta * sum;
      if (den < kDenominatorFloor) {
        ++part.flagged;
        continue;
      }
      part.ratio.add((beta * z - 1.0) * ys[0] / den, (beta * z + 1.0) * ys[0] / den);
    }
    return part;
  });
  Part all;
  for (const auto& part : parts) {
    all.ratio.merge(part.ratio);
    all.flagged += part.flagged;
  }
  const Estimate e = all.ratio.estimate();
  SpeedEstimate out;
  out.value = e.value;
  out.std_error = e.std_error + opts.gap_tol;
  out.method = SpeedMethod::aidekon;
  out.n = all.ratio.count();
  out.beta = beta;
  out.dist = p.literal();
  if (all.flagged > 0) {
    out.warning = std::to_string(all.flagged) + " samples below the denominator floor were dropped";
  }
  return out;
}

double closed_form_regular(int b, double beta) {
  if (b < 1) throw PreconditionError("b must be >= 1");
  const double x = b * beta;
  if (x < 1.0) throw PreconditionError("closed form needs b * beta >= 1");
  return (x - 1.0) / (x + 1.0);
}

}  // namespace gwspeed
