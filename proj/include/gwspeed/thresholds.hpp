#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "gwspeed/parallel.hpp"
#include "gwspeed/progeny.hpp"
#include "gwspeed/stats.hpp"

namespace gwspeed {

/// Smallest bias for which the tail series below converge: 27/(4(1+b)) < 1.
inline constexpr double kSeriesCutoff = 23.0 / 4.0;

/// (27/4) * 3^(5/3).
double ell_constant();

/**
 * Bias threshold of the main monotonicity theorem from exact finite sums.
 *
 *   ratioA = E[(1/Z1 - 1/Z2) 1{Z1 < Z2}] / E[1/Z2' - 1/Z1']
 *   ratioB = E[Z2' (1/Z2' - 1/Z1')] / E[1/Z2' - 1/Z1'] + 1
 *
 * Z1, Z2 are independent with the two marginals (unprimed); (Z1', Z2') is
 * drawn from the monotone coupling (primed). beta1 = c_delta * min(ratioA,
 * ratioB) and beta0 = max(beta1, 23/4 + delta).
 */
struct ThresholdReport {
  double beta1 = 0.0;
  double beta0 = 0.0;
  double delta = 0.0;
  double c_delta = 1.0;
  std::string branch;  // "ratioA" or "ratioB"
  double ratio_a = 0.0;
  double ratio_b = 0.0;
  std::string ratio_a_exact;  // p/q over the dyadic inputs
  std::string ratio_b_exact;
  double num_a = 0.0;          // E[(1/Z1 - 1/Z2) 1{Z1 < Z2}], independent pair
  double num_b = 0.0;          // E[Z2'(1/Z2' - 1/Z1')], coupled pair
  double den = 0.0;            // E[1/Z2' - 1/Z1'], coupled pair
  double den_independent = 0.0;  // E[1/Z2 - 1/Z1], equal to den by linearity
};

/// Throws DominanceViolation unless p1 weakly dominates p2, and
/// DegenerateCoupling when E[1/Z2' - 1/Z1'] = 0.
ThresholdReport beta1(const MonotoneCoupling& coupling, double c_delta = 1.0, double delta = 0.01);

struct LowerBound {
  double value = 0.0;   // max of the two forms
  double form_a = 0.0;  // indicator-expectation form
  double form_b = 0.0;  // E[1 - Z2'/Z1'] form
  double series_a = 0.0;   // sum_{k>=2} 16k(k-1)(3k+2)^2 r^k
  double series_b1 = 0.0;  // sum_{k>=2} 2(3k+2)^2 r^k
  double series_b2 = 0.0;  // sum_{k>=2} 2k(3k+2) r^k
};

/**
 * Explicit lower bounds on E~[|X1_tau1| - |X2_tau1|] with r = 27/(4(1+b)) and
 * p_inf = (b-1)/b:
 *
 *   A: (1/(2b)) (b/(b+1))^4 den - (c b/(b-1)) numA sum 16k(k-1)(3k+2)^2 r^k
 *   B: (1/(2b)) (b/(b+1))^4 den - (c/p_inf) numB sum 2(3k+2)^2 r^k
 *                               - (c/p_inf) den  sum 2k(3k+2) r^k
 *
 * Series run from k = 2 and stop once a geometric majorant of the tail is
 * below 1e-15 of the partial sum. Throws SeriesDivergent when b <= 23/4.
 */
LowerBound lower_bound_gap(const ThresholdReport& sums, double beta, double c = 1.0);
LowerBound lower_bound_gap(const MonotoneCoupling& coupling, double beta, double c = 1.0);

/// Smallest b in (23/4, beta_max] with a positive lower bound, to 1e-6:
/// doubling scan from 23/4 then bisection. Returns 23/4 when the bound is
/// already positive just above it, +infinity when never positive.
double numeric_threshold(const MonotoneCoupling& coupling, double c = 1.0, double beta_max = 1e6);

/// max(K * beta1^(1/ell), 23/4 + delta).
double ell_threshold(double beta1_value, int ell, double delta);

/// beta0 / d; MinDegreeViolation unless both supports start at d or above.
double d_scaled_threshold(const ThresholdReport& report, const ProgenyDistribution& p1,
                          const ProgenyDistribution& p2, int d);

struct FindKStep {
  int k = 0;
  Estimate ratio_a;
  double upper = 0.0;  // one-sided upper confidence bound of c_delta * ratioA
};

struct FindKResult {
  std::optional<int> k;  // empty: not found up to k_max
  std::vector<FindKStep> steps;
  bool mean_condition = false;  // m1 > m2^max(2/alpha, 1/alpha + 1)
  std::string warning;
};

struct FindKOptions {
  int k_max = 6;
  double z = 2.326;  // one-sided 99%
  double c_delta = 1.0;
  std::uint64_t task_samples = 10'000;
  std::uint64_t population_cap = kDefaultPopulationCap;
};

/// First generation k whose Monte Carlo ratioA upper bound (independent
/// generation-k pairs over a coupled generation-k denominator) is below beta.
FindKResult find_k(const ProgenyDistribution& p1, const ProgenyDistribution& p2, double beta,
                   std::uint64_t n_samples, Parallelism par, FindKOptions opts = {});

}  // namespace gwspeed
