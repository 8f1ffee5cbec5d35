#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gwspeed/gw_tree.hpp"
#include "gwspeed/interval_table.hpp"
#include "gwspeed/progeny.hpp"
#include "gwspeed/rng.hpp"

namespace gwspeed {

/// Bias beta and backbone scale d. The backbone steps back with probability
/// 1/(d beta + 1); d > 1 requires every offspring count to be at least d.
struct BiasParams {
  double beta = 2.0;
  int d = 1;

  double backbone_threshold() const { return 1.0 / (d * beta + 1.0); }
  /// Throws PreconditionError unless beta > 1 and d >= 1.
  void validate() const;
};

/// Offspring sources of the coupled construction: the two marginals for
/// sites fresh to one walk only, and the monotone joint law for sites fresh
/// to both.
struct CouplingSources {
  ProgenyDistribution first;
  ProgenyDistribution second;
  MonotoneCoupling joint;

  /// Sources with the inverse-CDF joint law.
  static CouplingSources quantile(const ProgenyDistribution& p1,
                                  const ProgenyDistribution& p2);
};

enum class BandClass : std::uint8_t { forward, backward };

struct StepRecord {
  std::int64_t n = 0;  // time after the step
  double u = 0.0;
  BandClass band = BandClass::forward;
  Destination move1;
  Destination move2;
  std::int8_t move_y = 0;
  std::int32_t depth1 = 0;
  std::int32_t depth2 = 0;
  std::int64_t y = 0;
};

/// CSV rows n,u,band_class,move1,move2,moveY,depth1,depth2,Y (with header).
void write_step_log(std::ostream& os, std::span<const StepRecord> steps);

/**
 * Two beta-biased walks on lazily grown GW(P1), GW(P2) trees and the
 * backbone walk Y on the integers, all driven by one uniform per step.
 *
 * Offspring assignment: a site fresh to both walks takes a joint pair
 * (Z1', Z2'); a site fresh to one walk takes an independent draw from that
 * walk's marginal; realized sites keep their counts.
 *
 * Invariants checked on every step (StateCorrupt on failure):
 * |X_i| >= Y, |X_i| - Y even, forward draws move both walks to children.
 */
class CoupledWalk {
 public:
  CoupledWalk(CouplingSources sources, BiasParams params, TableOptions opts = {});

  /// Back to both roots, Y = 0, n = 0. Keeps arena capacity and table cache.
  void reset();

  /// One step. The first step draws U_1 uniformly from (a, 1] with
  /// a = 1/(d beta + 1), so it always ascends.
  const StepRecord& step(Stream& rng);

  /// One step with a caller-supplied u in (0,1]; offspring come from rng.
  /// At n = 0 requires u > a.
  const StepRecord& step_with(double u, Stream& rng);

  std::int64_t time() const { return n_; }
  std::int64_t backbone() const { return y_; }
  std::int32_t depth1() const { return tree1_.depth(x1_); }
  std::int32_t depth2() const { return tree2_.depth(x2_); }
  VertexId position1() const { return x1_; }
  VertexId position2() const { return x2_; }
  const Tree& tree1() const { return tree1_; }
  const Tree& tree2() const { return tree2_; }
  const BiasParams& params() const { return params_; }
  const CouplingSources& sources() const { return sources_; }
  const StepRecord& last() const { return last_; }

  /// Cached tables for (z1, z2).
  const TablePair& tables(int z1, int z2);

 private:
  void assign_offspring(Stream& rng);

  CouplingSources sources_;
  BiasParams params_;
  TableOptions opts_;
  double threshold_;
  Tree tree1_, tree2_;
  VertexId x1_ = 0, x2_ = 0;
  std::int64_t y_ = 0;
  std::int64_t n_ = 0;
  StepRecord last_;
  std::unordered_map<std::uint64_t, TablePair> cache_;
};

/**
 * Single beta-biased walk on a lazily grown GW(P) tree. Allows any beta > 0
 * (the coupled construction needs beta > 1; this one does not).
 */
class BiasedWalk {
 public:
  BiasedWalk(ProgenyDistribution p, double beta);

  void reset();
  /// One step from the current vertex; returns the new depth.
  std::int32_t step(Stream& rng);

  std::int64_t time() const { return n_; }
  std::int32_t depth() const { return tree_.depth(x_); }
  const Tree& tree() const { return tree_; }
  VertexId position() const { return x_; }

 private:
  const IntervalTable& table(int z, bool at_root);

  ProgenyDistribution p_;
  double beta_;
  Tree tree_;
  VertexId x_ = 0;
  std::int64_t n_ = 0;
  std::vector<IntervalTable> nonroot_;  // indexed by z
  std::vector<IntervalTable> root_;
};

struct AuditReport {
  int zmax = 0;
  std::size_t beta_count = 0;
  bool exact = false;
  std::size_t pairs_checked = 0;
  std::size_t eta3_ge_eta4 = 0;
  std::size_t eta3_lt_eta4 = 0;
  std::size_t first_has_fewer = 0;
  double max_tiling_gap = 0.0;
  double max_marginal_error = 0.0;
};

using TableBuilder =
    std::function<TablePair(int z1, int z2, double beta, int d)>;

/**
 * Checks every (z1, z2) in [1, zmax]^2 and every beta: both tables tile
 * (0,1], reproduce the single-walk law per destination, and send both walks
 * to children on the forward region. Throws AuditFailure naming the first
 * offending (z1, z2, beta, case) when an error exceeds `tol`.
 */
AuditReport audit_tables(int zmax, std::span<const double> betas, double tol = 1e-12,
                         int d = 1, const TableBuilder& builder = {});

/// Same audit in exact rational arithmetic; betas are decimal or p/q strings.
/// Any nonzero deviation fails.
AuditReport audit_tables_exact(int zmax, std::span<const std::string> betas, int d = 1);

}  // namespace gwspeed
