#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwspeed/rng.hpp"

namespace gwspeed {

/**
 * Finite-support offspring law on the positive integers.
 *
 * Invariants: support strictly increasing and >= 1 (no leaves), masses
 * strictly positive and normalized. The CDF table ends at exactly 1 so that
 * inverse-CDF sampling on (0,1] never runs off the end.
 */
class ProgenyDistribution {
 public:
  /// Validates and normalizes raw (value, mass) pairs. Zero-mass entries are
  /// dropped; order of input does not matter.
  static ProgenyDistribution from_pairs(std::vector<std::pair<int, double>> raw);

  /// Parses "value:mass" lists ("1:0.5,4:0.5"), or the truncated parametric
  /// forms "geometric(q)" and "poisson(lambda)" (conditioned on >= 1).
  static ProgenyDistribution parse(std::string_view literal);

  static ProgenyDistribution point_mass(int value);
  /// Uniform over the listed values, e.g. uniform({1, 4}).
  static ProgenyDistribution uniform(std::initializer_list<int> values);
  /// P(k) = (1-q)^(k-1) q on k >= 1, truncated where the tail drops below
  /// 1e-12 and renormalized.
  static ProgenyDistribution geometric(double q);
  /// Poisson(lambda) conditioned on k >= 1, truncated as for geometric().
  static ProgenyDistribution poisson_positive(double lambda);

  std::span<const int> support() const { return support_; }
  std::span<const double> mass() const { return mass_; }
  double mean() const { return mean_; }
  int min_support() const { return support_.front(); }
  int max_support() const { return support_.back(); }

  double mass_at(int value) const;
  /// P(Z <= t).
  double cdf(int t) const;
  /// P(Z < t).
  double cdf_below(int t) const { return cdf(t - 1); }

  /// Smallest support value v with cdf(v) >= u, for u in (0,1].
  int quantile(double u) const;
  int sample(Stream& rng) const { return quantile(rng.uniform_open_closed()); }

  /// Canonical "value:mass" literal (masses printed with 17 significant digits).
  std::string literal() const;

  friend bool operator==(const ProgenyDistribution&, const ProgenyDistribution&) = default;

 private:
  ProgenyDistribution() = default;

  std::vector<int> support_;
  std::vector<double> mass_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
};

/// Strict stochastic dominance: CDF1 <= CDF2 everywhere and P1 != P2.
bool dominates(const ProgenyDistribution& p1, const ProgenyDistribution& p2);

/// CDF1 <= CDF2 everywhere (equality allowed).
bool weakly_dominates(const ProgenyDistribution& p1, const ProgenyDistribution& p2);

struct CouplingPair {
  int z1 = 0;
  int z2 = 0;
  double prob = 0.0;
};

/**
 * Joint law of (Z1', Z2') with the given marginals and Z1' >= Z2' surely.
 */
class MonotoneCoupling {
 public:
  /// Validates the table against the marginals (1e-12) and the order
  /// constraint; throws DominanceViolation / InvalidDistribution otherwise.
  MonotoneCoupling(ProgenyDistribution p1, ProgenyDistribution p2,
                   std::vector<CouplingPair> pairs);

  /// CSV with header "z1,z2,prob".
  static MonotoneCoupling load_csv(const std::filesystem::path& path,
                                   ProgenyDistribution p1, ProgenyDistribution p2);

  std::span<const CouplingPair> pairs() const { return pairs_; }
  const ProgenyDistribution& first() const { return p1_; }
  const ProgenyDistribution& second() const { return p2_; }

  std::pair<int, int> sample(Stream& rng) const;

 private:
  ProgenyDistribution p1_;
  ProgenyDistribution p2_;
  std::vector<CouplingPair> pairs_;
  std::vector<double> cumulative_;
};

/// Inverse-CDF (comonotone) coupling. Requires weak dominance.
MonotoneCoupling quantile_couple(const ProgenyDistribution& p1,
                                 const ProgenyDistribution& p2);

/// Exact existence test for an l-fold coupling: the law of the minimum of l
/// draws from P1 dominates (weakly) the law of the maximum of l draws from P2.
bool ell_fold_check(const ProgenyDistribution& p1, const ProgenyDistribution& p2, int ell);

struct EllFoldDraw {
  std::vector<int> first;
  std::vector<int> second;
};

/**
 * Paired vectors (Z1^(1..l)), (Z2^(1..l)) with i.i.d. coordinates and
 * min(first) >= max(second) on every draw.
 *
 * The minimum and maximum are coupled comonotonically by one uniform; each
 * vector is then drawn exactly from its law conditioned on that extreme.
 */
class EllFoldCoupling {
 public:
  EllFoldCoupling(ProgenyDistribution p1, ProgenyDistribution p2, int ell);

  int ell() const { return ell_; }
  EllFoldDraw sample(Stream& rng) const;

 private:
  std::vector<int> conditioned_on_min(int m, Stream& rng) const;
  std::vector<int> conditioned_on_max(int m, Stream& rng) const;

  ProgenyDistribution p1_;
  ProgenyDistribution p2_;
  int ell_;
  std::vector<double> min_cdf_;  // aligned with p1 support
  std::vector<double> max_cdf_;  // aligned with p2 support
};

/// -log P1{1} / log m1; +infinity when P1{1} = 0.
double alpha(const ProgenyDistribution& p);

inline constexpr std::uint64_t kDefaultPopulationCap = 1'000'000'000;

/// Size of generation k of a branching process started from one individual.
std::uint64_t generation_k_sample(const ProgenyDistribution& p, int k, Stream& rng,
                                  std::uint64_t cap = kDefaultPopulationCap);

/// Generation-k sizes of two branching processes grown from a coupled root
/// pair: matched individuals reproduce through the coupling, surplus
/// individuals of the first process reproduce independently. first >= second.
std::pair<std::uint64_t, std::uint64_t> coupled_generation_k_sample(
    const MonotoneCoupling& coupling, int k, Stream& rng,
    std::uint64_t cap = kDefaultPopulationCap);

}  // namespace gwspeed
