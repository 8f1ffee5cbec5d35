#include "gwspeed/regeneration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gwspeed/errors.hpp"

namespace gwspeed {

std::vector<std::int64_t> find_regenerations(std::span<const std::int8_t> increments,
                                             int margin) {
  const std::size_t n = increments.size();
  std::vector<std::int64_t> y(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (increments[i] != 1 && increments[i] != -1) {
      throw PreconditionError("backbone increments must be +1 or -1");
    }
    y[i + 1] = y[i] + increments[i];
  }
  // later_min[t] / later_max[t]: extremes of Y over times strictly after t.
  std::vector<std::int64_t> later_min(n + 1, std::numeric_limits<std::int64_t>::max());
  std::vector<std::int64_t> later_max(n + 1, std::numeric_limits<std::int64_t>::min());
  for (std::size_t t = n; t-- > 0;) {
    later_min[t] = std::min(later_min[t + 1], y[t + 1]);
    later_max[t] = std::max(later_max[t + 1], y[t + 1]);
  }
  std::vector<std::int64_t> out;
  std::int64_t prior_max = y[0];
  for (std::size_t t = 1; t <= n; ++t) {
    if (y[t] > prior_max && later_min[t] > y[t] && later_max[t] != std::numeric_limits<std::int64_t>::min() &&
        later_max[t] >= y[t] + margin) {
      out.push_back(static_cast<std::int64_t>(t));
    }
    prior_max = std::max(prior_max, y[t]);
  }
  return out;
}

const char* to_string(DecoupleClass c) {
  switch (c) {
    case DecoupleClass::none:
      return "none";
    case DecoupleClass::E:
      return "E";
    case DecoupleClass::F:
      return "F";
  }
  return "?";
}

void RegenDiagnostics::merge(const RegenDiagnostics& o) {
  attempts += o.attempts;
  accepted += o.accepted;
  blocks += o.blocks;
  duration_over_3k2 += o.duration_over_3k2;
  duration_over_4k1 += o.duration_over_4k1;
  obs_k1_violations += o.obs_k1_violations;
  obs_k2_violations += o.obs_k2_violations;
  odd_gaps += o.odd_gaps;
  super_violations += o.super_violations;
  late_returns += o.late_returns;
  max_excess_3k2 = std::max(max_excess_3k2, o.max_excess_3k2);
  if (first_3k2_counterexample.empty()) first_3k2_counterexample = o.first_3k2_counterexample;
}

BlockSampler::BlockSampler(CouplingSources sources, BiasParams params, RegenOptions opts)
    : walk_(std::move(sources), params), opts_(opts) {
  if (opts_.margin < 1) throw PreconditionError("confirmation margin must be >= 1");
  if (opts_.horizon < 1) throw PreconditionError("horizon must be >= 1");
  if (opts_.blocks_per_trajectory < 1) opts_.blocks_per_trajectory = 1;
}

void BlockSampler::start_trajectory() {
  walk_.reset();
  buffer_.clear();
  cands_.clear();
  cand_head_ = 0;
  cands_.push_back({0, 0, 0, 0, true, true});
  have_last_ = false;
  last_ = {};
  ymax_ = 0;
  max1_ = max2_ = 0;
}

RegenBlock BlockSampler::close_block(const Candidate& next) {
  RegenBlock b;
  b.start = last_.n;
  b.end = next.n;
  b.duration = next.n - last_.n;
  b.dx1 = next.d1 - last_.d1;
  b.dx2 = next.d2 - last_.d2;
  b.dy = next.level - last_.level;
  const auto len = static_cast<std::size_t>(b.duration);
  if (buffer_.size() < len || buffer_.front().n != last_.n + 1) {
    throw StateCorrupt("step buffer out of sync with regeneration times");
  }
  std::string increments;
  for (std::size_t i = 0; i < len; ++i) {
    const StepRecord& r = buffer_[i];
    if (r.move_y < 0) ++b.k;
    if (b.decouple == DecoupleClass::none && !(r.move1 == r.move2)) {
      b.decouple = r.move1.is_parent() != r.move2.is_parent() ? DecoupleClass::E : DecoupleClass::F;
    }
  }
  bool future_ok = next.fresh1 && next.fresh2;
  for (std::size_t i = len; i < buffer_.size() && future_ok; ++i) {
    future_ok = buffer_[i].depth1 > next.d1 && buffer_[i].depth2 > next.d2;
  }
  b.super_regeneration = future_ok;

  if (b.dy != b.duration - 2 * b.k) {
    throw StateCorrupt("block backbone gain " + std::to_string(b.dy) + " != duration - 2k");
  }
  ++diag_.blocks;
  const std::int64_t excess = b.duration - (3 * b.k + 2);
  diag_.max_excess_3k2 = std::max(diag_.max_excess_3k2, excess);
  if (excess > 0) {
    ++diag_.duration_over_3k2;
    if (diag_.first_3k2_counterexample.empty()) {
      for (std::size_t i = 0; i < len; ++i) increments += buffer_[i].move_y > 0 ? '+' : '-';
      diag_.first_3k2_counterexample = increments;
    }
  }
  if (b.duration > (b.k == 0 ? 1 : 4 * b.k + 1)) ++diag_.duration_over_4k1;
  const std::int64_t gap = b.gap();
  if (gap % 2 != 0) ++diag_.odd_gaps;
  if (b.k == 1 && gap != 0 && gap != 2) ++diag_.obs_k1_violations;
  if (b.k >= 2 && gap < -2 * (b.k - 1)) ++diag_.obs_k2_violations;
  if (!b.super_regeneration) ++diag_.super_violations;

  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(len));
  last_ = next;
  return b;
}

int BlockSampler::step_once(Stream& rng, RegenBlock* out) {
  const StepRecord& rec = walk_.step(rng);
  buffer_.push_back(rec);
  if (rec.y > ymax_) {
    ymax_ = rec.y;
    cands_.push_back({rec.n, rec.y, rec.depth1, rec.depth2, rec.depth1 > max1_, rec.depth2 > max2_});
  } else if (rec.move_y < 0) {
    while (cands_.size() > cand_head_ && cands_.back().level >= rec.y) {
      if (cands_.back().n == 0) return 1;
      cands_.pop_back();
    }
    if (have_last_ && rec.y <= last_.level) ++diag_.late_returns;
  }
  max1_ = std::max(max1_, rec.depth1);
  max2_ = std::max(max2_, rec.depth2);
  if (static_cast<std::int64_t>(buffer_.size()) > opts_.horizon + opts_.margin) {
    throw HorizonExceeded("no regeneration confirmed within " + std::to_string(opts_.horizon) +
                          " steps (beta = " + std::to_string(walk_.params().beta) + ")");
  }
  if (cands_.size() > cand_head_ && rec.y >= cands_[cand_head_].level + opts_.margin) {
    const Candidate c = cands_[cand_head_++];
    if (cand_head_ > 4096) {
      cands_.erase(cands_.begin(), cands_.begin() + static_cast<std::ptrdiff_t>(cand_head_));
      cand_head_ = 0;
    }
    if (c.n == 0) {
      have_last_ = true;
      last_ = c;
      return 2;
    }
    *out = close_block(c);
    return 3;
  }
  return 0;
}

bool BlockSampler::attempt(Stream& rng) {
  start_trajectory();
  ++diag_.attempts;
  RegenBlock unused;
  for (;;) {
    const int ev = step_once(rng, &unused);
    if (ev == 1) return false;
    if (ev == 2) {
      ++diag_.accepted;
      return true;
    }
  }
}

void BlockSampler::harvest(std::uint64_t n, Stream& rng, const BlockSink& sink) {
  std::uint64_t emitted = 0;
  RegenBlock b;
  while (emitted < n) {
    while (!attempt(rng)) {
    }
    std::uint64_t in_trajectory = 0;
    while (emitted < n && in_trajectory < opts_.blocks_per_trajectory) {
      if (step_once(rng, &b) == 3) {
        sink(b);
        ++emitted;
        ++in_trajectory;
      }
    }
  }
}

RegenBlock BlockSampler::first_block(Stream& rng) {
  RegenBlock out;
  harvest(1, rng, [&](const RegenBlock& b) { out = b; });
  return out;
}

RegenBlock sample_block_conditioned(const CouplingSources& sources, BiasParams params,
                                    Stream& rng, RegenOptions opts) {
  BlockSampler s(sources, params, opts);
  return s.first_block(rng);
}

AcceptanceEstimate estimate_acceptance(const CouplingSources& sources, BiasParams params,
                                       std::uint64_t attempts, Parallelism par,
                                       RegenOptions opts) {
  const auto sizes = split_work(attempts, 10'000);
  const auto parts = run_tasks(sizes.size(), par.workers, [&](std::size_t i) {
    Stream rng = derive_stream(par.seed, i);
    BlockSampler s(sources, params, opts);
    std::uint64_t ok = 0;
    for (std::uint64_t j = 0; j < sizes[i]; ++j) ok += s.attempt(rng) ? 1 : 0;
    return ok;
  });
  AcceptanceEstimate e;
  e.attempts = attempts;
  for (auto ok : parts) e.accepted += ok;
  if (attempts > 0) {
    e.rate = static_cast<double>(e.accepted) / static_cast<double>(attempts);
    e.std_error = std::sqrt(e.rate * (1 - e.rate) / static_cast<double>(attempts));
  }
  return e;
}

HarvestResult harvest_blocks(const CouplingSources& sources, BiasParams params, std::uint64_t n,
                             Parallelism par, RegenOptions opts) {
  const auto parts = harvest_tasks<std::vector<RegenBlock>>(
      sources, params, n, par, opts,
      [](std::vector<RegenBlock>& v, const RegenBlock& b) { v.push_back(b); });
  HarvestResult out;
  out.blocks.reserve(n);
  for (const auto& [blocks, diag] : parts) {
    out.blocks.insert(out.blocks.end(), blocks.begin(), blocks.end());
    out.diagnostics.merge(diag);
  }
  return out;
}

std::vector<double> TailReport::pmf() const {
  std::vector<double> p(histogram.size());
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    p[k] = blocks ? static_cast<double>(histogram[k]) / static_cast<double>(blocks) : 0.0;
  }
  return p;
}

std::pair<double, double> fit_geometric_rate(std::span<const std::uint64_t> histogram,
                                             std::uint64_t min_count) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  int bins = 0;
  for (std::size_t k = 1; k < histogram.size(); ++k) {
    if (histogram[k] < min_count) continue;
    const double w = static_cast<double>(histogram[k]);
    const double x = static_cast<double>(k);
    const double y = std::log(w);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
    ++bins;
  }
  if (bins < 2) return {0.0, 0.0};
  const double det = sw * sxx - sx * sx;
  const double slope = (sw * sxy - sx * sy) / det;
  const double slope_se = std::sqrt(sw / det);
  const double rate = std::exp(slope);
  return {rate, rate * slope_se};
}

TailReport tail_of_B(const CouplingSources& sources, BiasParams params, std::uint64_t n_blocks,
                     Parallelism par, RegenOptions opts) {
  const auto parts = harvest_tasks<std::vector<std::uint64_t>>(
      sources, params, n_blocks, par, opts, [](std::vector<std::uint64_t>& h, const RegenBlock& b) {
        const auto k = static_cast<std::size_t>(b.k);
        if (h.size() <= k) h.resize(k + 1, 0);
        ++h[k];
      });
  TailReport r;
  for (const auto& [h, diag] : parts) {
    if (r.histogram.size() < h.size()) r.histogram.resize(h.size(), 0);
    for (std::size_t k = 0; k < h.size(); ++k) r.histogram[k] += h[k];
  }
  for (auto c : r.histogram) r.blocks += c;
  const auto [rate, se] = fit_geometric_rate(r.histogram);
  r.fitted_rate = rate;
  r.fit_std_error = se;
  r.bound_rate = 27.0 / (4.0 * (1.0 + params.beta));
  return r;
}

}  // namespace gwspeed
