#include "gwspeed/stats.hpp"

#include <algorithm>
#include <cmath>

namespace gwspeed {

void MeanAccumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void MeanAccumulator::merge(const MeanAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double n = na + nb;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double MeanAccumulator::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

Estimate MeanAccumulator::estimate() const {
  if (n_ == 0) return {};
  return {mean_, std::sqrt(variance() / static_cast<double>(n_))};
}

void RatioAccumulator::add(double x, double t) {
  ++n_;
  sx_ += x;
  st_ += t;
  sxx_ += x * x;
  stt_ += t * t;
  sxt_ += x * t;
}

void RatioAccumulator::merge(const RatioAccumulator& o) {
  n_ += o.n_;
  sx_ += o.sx_;
  st_ += o.st_;
  sxx_ += o.sxx_;
  stt_ += o.stt_;
  sxt_ += o.sxt_;
}

Estimate RatioAccumulator::estimate() const {
  if (n_ == 0 || st_ == 0.0) return {};
  const double n = static_cast<double>(n_);
  const double r = sx_ / st_;
  const double t_bar = st_ / n;
  if (n_ < 2) return {r, 0.0};
  // Var(x - r t), computed from raw moments.
  const double s_res = sxx_ - 2.0 * r * sxt_ + r * r * stt_;
  const double var_res = std::max(0.0, s_res / (n - 1.0));
  return {r, std::sqrt(var_res / n) / t_bar};
}

Estimate batch_means(std::span<const double> series, std::size_t n_batches) {
  const std::size_t len = series.size();
  if (len == 0) return {};
  n_batches = std::clamp<std::size_t>(n_batches, 1, len);
  const std::size_t per = len / n_batches;
  MeanAccumulator acc;
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += series[i];
    acc.add(s / static_cast<double>(per));
  }
  return acc.estimate();
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace gwspeed
