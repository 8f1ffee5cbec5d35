#pragma once

#include <cstdint>
#include <span>

namespace gwspeed {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Welford mean/variance; merge() is associative so per-task accumulators can
/// be pooled in any grouping.
class MeanAccumulator {
 public:
  void add(double x);
  void merge(const MeanAccumulator& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased; 0 when count < 2
  Estimate estimate() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Ratio-of-means estimator sum(x)/sum(t) over i.i.d. pairs (x, t) with a
/// delta-method standard error.
class RatioAccumulator {
 public:
  void add(double x, double t);
  void merge(const RatioAccumulator& other);

  std::uint64_t count() const { return n_; }
  Estimate estimate() const;

 private:
  std::uint64_t n_ = 0;
  double sx_ = 0.0, st_ = 0.0, sxx_ = 0.0, stt_ = 0.0, sxt_ = 0.0;
};

/// Batch-means estimate of the mean of a (possibly autocorrelated) series.
Estimate batch_means(std::span<const double> series, std::size_t n_batches);

/// Sample Pearson correlation of two equal-length series (0 if degenerate).
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace gwspeed
