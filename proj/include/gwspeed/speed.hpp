#pragma once

#include <cstdint>
#include <string>

#include "gwspeed/coupled_walk.hpp"
#include "gwspeed/parallel.hpp"
#include "gwspeed/progeny.hpp"
#include "gwspeed/regeneration.hpp"
#include "gwspeed/stats.hpp"

namespace gwspeed {

enum class SpeedMethod { ergodic, regen_ratio, aidekon, closed_form };

const char* to_string(SpeedMethod m);

struct SpeedEstimate {
  double value = 0.0;
  double std_error = 0.0;
  SpeedMethod method = SpeedMethod::ergodic;
  std::uint64_t n = 0;  // walks, blocks or samples
  double beta = 0.0;
  std::string dist;
  std::string warning;  // set when a precondition was only softly met
};

/// |X_n| / n averaged over independent walks on independent trees; the
/// standard error treats each walk as one batch.
SpeedEstimate speed_ergodic(const ProgenyDistribution& p, double beta, std::uint64_t n_steps,
                            std::uint64_t n_walks, Parallelism par);

struct RegenSpeed {
  SpeedEstimate v1;
  SpeedEstimate v2;
  Estimate gap;        // per-block mean of |X1_tau| - |X2_tau| over blocks
  Estimate diff;       // v1 - v2 as one ratio estimator
  Estimate duration;   // mean block length
  RegenDiagnostics diagnostics;
};

/// Ratio-of-means speeds of both coupled walks from shared regeneration
/// blocks: v_i = sum dX_i / sum duration.
RegenSpeed speed_regen(const CouplingSources& sources, BiasParams params, std::uint64_t n_blocks,
                       Parallelism par, RegenOptions opts = {});

struct EscapeOptions {
  int depth_cap = 200;
  std::uint64_t vertex_cap = 20'000'000;
};

struct EscapeSample {
  double lower = 0.0;
  double upper = 0.0;
  int depth = 0;
  double midpoint() const { return 0.5 * (lower + upper); }
};

/**
 * Escape probability Y = P_x(never hit the parent of x) for the root x of a
 * fresh GW(p) tree, bracketed by evaluating y = bS / (1 + bS), S = sum of the
 * children's values, upward from a truncation depth.
 *
 * Boundary values: a vertex whose subtree has all offspring counts in
 * [d_min, d_max] escapes with probability between the d_min-ary and d_max-ary
 * values (b d - 1) / (b d), since the subtree contains the first tree and is
 * contained in the second. Depth grows until upper - lower <= gap_tol.
 *
 * Requires beta * d_min > 1 (otherwise no truncation gives a positive lower
 * bound). Throws DepthCapExceeded past the depth or vertex cap.
 */
EscapeSample sample_escape(const ProgenyDistribution& p, double beta, int depth, double gap_tol,
                           Stream& rng, EscapeOptions opts = {});

/// Escape value of the b-ary tree, max(0, (b beta - 1) / (b beta)).
double regular_escape(int b, double beta);

struct AidekonOptions {
  int depth = 4;
  double gap_tol = 1e-8;
  std::uint64_t task_samples = 20'000;
  EscapeOptions escape;
};

/// Ratio E[(bZ - 1) Y0 / D] / E[(bZ + 1) Y0 / D], D = 1 - b + b sum_{i=0..Z} Y_i,
/// with Y_i sandwich midpoints; gap_tol is added to the standard error.
SpeedEstimate speed_aidekon(const ProgenyDistribution& p, double beta, std::uint64_t n_samples,
                            Parallelism par, AidekonOptions opts = {});

/// (b beta - 1) / (b beta + 1) for the b-ary tree; requires b beta >= 1.
double closed_form_regular(int b, double beta);

}  // namespace gwspeed
