#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gwspeed/coupled_walk.hpp"
#include "gwspeed/parallel.hpp"
#include "gwspeed/rng.hpp"

namespace gwspeed {

/// Regeneration times of a finite backbone path given by +1/-1 increments
/// (Y_0 = 0). A time t >= 1 qualifies when Y_t exceeds every earlier value,
/// every later value exceeds Y_t, and the path climbs to Y_t + margin
/// afterwards; later times cannot be certified by a finite path.
std::vector<std::int64_t> find_regenerations(std::span<const std::int8_t> increments,
                                             int margin);

/// How the two tree walks first part ways inside a block: never (None), with
/// different depths (E: one steps to its parent, the other to a child), or
/// at equal depth (F: both to children with different indices).
enum class DecoupleClass : std::uint8_t { none, E, F };

const char* to_string(DecoupleClass c);

struct RegenBlock {
  std::int64_t start = 0;  // regeneration time opening the block
  std::int64_t end = 0;    // next regeneration time
  std::int64_t duration = 0;
  std::int64_t dx1 = 0;  // depth gain of the first tree walk
  std::int64_t dx2 = 0;
  std::int64_t dy = 0;
  std::int64_t k = 0;  // backbone back-steps in (start, end]
  DecoupleClass decouple = DecoupleClass::none;
  bool super_regeneration = true;

  std::int64_t gap() const { return dx1 - dx2; }
};

/// Counts of checked properties over a set of blocks. The identity
/// dy = duration - 2k is a hard assertion; everything else is counted.
struct RegenDiagnostics {
  std::uint64_t attempts = 0;      // trajectory starts
  std::uint64_t accepted = 0;      // starts for which time 0 was confirmed
  std::uint64_t blocks = 0;
  std::uint64_t duration_over_3k2 = 0;   // duration > 3k + 2
  std::uint64_t duration_over_4k1 = 0;   // duration > 4k + 1 (k >= 1) or > 1 (k = 0)
  std::uint64_t obs_k1_violations = 0;   // k = 1 and gap not in {0, 2}
  std::uint64_t obs_k2_violations = 0;   // k >= 2 and gap < -2(k-1)
  std::uint64_t odd_gaps = 0;
  std::uint64_t super_violations = 0;
  std::uint64_t late_returns = 0;  // backbone fell back to a confirmed level
  std::int64_t max_excess_3k2 = std::numeric_limits<std::int64_t>::min();  // max of duration - (3k+2)
  std::string first_3k2_counterexample;  // block increments, '+'/'-'

  void merge(const RegenDiagnostics& o);
  double acceptance_rate() const {
    return attempts ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0;
  }
};

struct RegenOptions {
  int margin = 64;                       // confirmation margin L
  std::int64_t horizon = 1'000'000;      // step cap per block
  std::uint64_t blocks_per_trajectory = 20'000;  // restart to bound tree memory
  std::uint64_t task_blocks = 50'000;    // blocks per parallel task
};

using BlockSink = std::function<void(const RegenBlock&)>;

/**
 * Runs coupled trajectories conditioned on {0 is a regeneration time} by
 * rejection (restart whenever Y returns to 0) and emits the blocks between
 * consecutive confirmed regenerations.
 */
class BlockSampler {
 public:
  BlockSampler(CouplingSources sources, BiasParams params, RegenOptions opts = {});

  /// First block [0, tau_1] of one accepted trajectory.
  RegenBlock first_block(Stream& rng);

  /// Emits `n` blocks. Trajectories restart after blocks_per_trajectory.
  void harvest(std::uint64_t n, Stream& rng, const BlockSink& sink);

  /// One start of the rejection loop; true if time 0 was confirmed.
  bool attempt(Stream& rng);

  const RegenDiagnostics& diagnostics() const { return diag_; }

 private:
  struct Candidate {
    std::int64_t n;
    std::int64_t level;
    std::int32_t d1, d2;
    bool fresh1, fresh2;
  };

  // One coupled step plus bookkeeping. Returns 0 (nothing), 1 (Y returned
  // to 0 before time 0 was confirmed), 2 (time 0 confirmed), 3 (block
  // closed into *out).
  int step_once(Stream& rng, RegenBlock* out);
  void start_trajectory();
  RegenBlock close_block(const Candidate& next);

  CoupledWalk walk_;
  RegenOptions opts_;
  RegenDiagnostics diag_;

  std::vector<StepRecord> buffer_;  // steps after the last confirmed regeneration
  std::vector<Candidate> cands_;    // unconfirmed fresh maxima, levels increasing
  std::size_t cand_head_ = 0;
  Candidate last_{};
  bool have_last_ = false;
  std::int64_t ymax_ = 0;
  std::int32_t max1_ = 0, max2_ = 0;
};

/// Rejection-samples one trajectory and returns its first block.
RegenBlock sample_block_conditioned(const CouplingSources& sources, BiasParams params,
                                    Stream& rng, RegenOptions opts = {});

struct AcceptanceEstimate {
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
  double rate = 0.0;
  double std_error = 0.0;
};

/// Fraction of rejection-loop starts for which time 0 is a regeneration time.
AcceptanceEstimate estimate_acceptance(const CouplingSources& sources, BiasParams params,
                                       std::uint64_t attempts, Parallelism par,
                                       RegenOptions opts = {});

struct HarvestResult {
  std::vector<RegenBlock> blocks;
  RegenDiagnostics diagnostics;
};

/// n blocks split across tasks; deterministic in seed, independent of workers.
HarvestResult harvest_blocks(const CouplingSources& sources, BiasParams params,
                             std::uint64_t n, Parallelism par, RegenOptions opts = {});

/// Streaming variant: `consume` folds each block into a per-task state.
/// Returns (state, diagnostics) per task, in task order.
template <class TaskState>
std::vector<std::pair<TaskState, RegenDiagnostics>> harvest_tasks(
    const CouplingSources& sources, BiasParams params, std::uint64_t n, Parallelism par,
    RegenOptions opts,
    const std::function<void(TaskState&, const RegenBlock&)>& consume) {
  const auto sizes = split_work(n, opts.task_blocks);
  return run_tasks(sizes.size(), par.workers, [&](std::size_t i) {
    Stream rng = derive_stream(par.seed, i);
    BlockSampler sampler(sources, params, opts);
    TaskState state{};
    sampler.harvest(sizes[i], rng, [&](const RegenBlock& b) { consume(state, b); });
    return std::pair<TaskState, RegenDiagnostics>{std::move(state), sampler.diagnostics()};
  });
}

struct TailReport {
  std::vector<std::uint64_t> histogram;  // histogram[k] = blocks with |B| = k
  std::uint64_t blocks = 0;
  double fitted_rate = 0.0;     // geometric decay of P(|B| = k) for k >= 1
  double fit_std_error = 0.0;
  double bound_rate = 0.0;      // 27 / (4 (1 + beta))
  std::vector<double> pmf() const;
};

/// Histogram of |B| over blocks and a weighted log-linear fit of its decay.
TailReport tail_of_B(const CouplingSources& sources, BiasParams params, std::uint64_t n_blocks,
                     Parallelism par, RegenOptions opts = {});

/// Geometric decay rate fitted to a histogram of k (k >= 1, bins with at
/// least `min_count` entries). Returns {rate, std_error}; {0, 0} if fewer
/// than two bins qualify.
std::pair<double, double> fit_geometric_rate(std::span<const std::uint64_t> histogram,
                                             std::uint64_t min_count = 20);

}  // namespace gwspeed
