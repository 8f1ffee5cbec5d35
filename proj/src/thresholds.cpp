#include "gwspeed/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gwspeed/errors.hpp"
#include "rational.hpp"

namespace gwspeed {

using detail::exact;
using detail::Rational;
using detail::to_double;

double ell_constant() { return 6.75 * std::cbrt(243.0); }

namespace {

std::string str(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

}  // namespace

ThresholdReport beta1(const MonotoneCoupling& coupling, double c_delta, double delta) {
  if (!(c_delta > 0)) throw PreconditionError("c_delta must be > 0");
  if (!(delta > 0)) throw PreconditionError("delta must be > 0");
  const ProgenyDistribution& p1 = coupling.first();
  const ProgenyDistribution& p2 = coupling.second();
  if (!weakly_dominates(p1, p2)) throw DominanceViolation("P1 does not dominate P2");

  // Independent pair, unprimed.
  Rational num_a = 0, inv1 = 0, inv2 = 0;
  for (std::size_t i = 0; i < p1.support().size(); ++i) {
    const int z1 = p1.support()[i];
    const Rational m1 = exact(p1.mass()[i]);
    inv1 += m1 / z1;
    for (std::size_t j = 0; j < p2.support().size(); ++j) {
      const int z2 = p2.support()[j];
      if (z1 < z2) num_a += m1 * exact(p2.mass()[j]) * (Rational(1, z1) - Rational(1, z2));
    }
  }
  for (std::size_t j = 0; j < p2.support().size(); ++j) inv2 += exact(p2.mass()[j]) / p2.support()[j];

  // Coupled pair, primed.
  Rational den = 0, num_b = 0;
  for (const CouplingPair& c : coupling.pairs()) {
    const Rational m = exact(c.prob);
    const Rational gap = Rational(1, c.z2) - Rational(1, c.z1);
    den += m * gap;
    num_b += m * c.z2 * gap;
  }
  if (den == 0) throw DegenerateCoupling("E[1/Z2' - 1/Z1'] = 0: the laws coincide");

  ThresholdReport r;
  const Rational ra = num_a / den;
  const Rational rb = num_b / den + 1;
  r.ratio_a = to_double(ra);
  r.ratio_b = to_double(rb);
  r.ratio_a_exact = str(ra);
  r.ratio_b_exact = str(rb);
  r.num_a = to_double(num_a);
  r.num_b = to_double(num_b);
  r.den = to_double(den);
  r.den_independent = to_double(inv2 - inv1);
  r.c_delta = c_delta;
  r.delta = delta;
  r.branch = ra <= rb ? "ratioA" : "ratioB";
  r.beta1 = c_delta * std::min(r.ratio_a, r.ratio_b);
  r.beta0 = std::max(r.beta1, kSeriesCutoff + delta);
  return r;
}

namespace {

// Li_{-j}(r) = sum_{k>=1} k^j r^k for j = 0..4, 0 < r < 1.
struct Polylog {
  double l0, l1, l2, l3, l4;
  explicit Polylog(double r) {
    const double s = 1.0 - r;
    l0 = r / s;
    l1 = r / (s * s);
    l2 = r * (1.0 + r) / (s * s * s);
    l3 = r * (1.0 + 4.0 * r + r * r) / (s * s * s * s);
    l4 = r * (1.0 + r) * (1.0 + 10.0 * r + r * r) / (s * s * s * s * s);
  }
};

}  // namespace

LowerBound lower_bound_gap(const ThresholdReport& sums, double beta, double c) {
  if (!(beta > kSeriesCutoff)) {
    throw SeriesDivergent("beta = " + std::to_string(beta) + " <= 23/4: r = 27/(4(1+beta)) >= 1");
  }
  const double r = 27.0 / (4.0 * (1.0 + beta));
  const Polylog li(r);
  LowerBound out;
  // 16k(k-1)(3k+2)^2 = 16(9k^4 + 3k^3 - 8k^2 - 4k), zero at k = 1.
  out.series_a = 16.0 * (9.0 * li.l4 + 3.0 * li.l3 - 8.0 * li.l2 - 4.0 * li.l1);
  // 2(3k+2)^2 = 18k^2 + 24k + 8 and 2k(3k+2) = 6k^2 + 4k, minus the k = 1 terms.
  out.series_b1 = 18.0 * li.l2 + 24.0 * li.l1 + 8.0 * li.l0 - 50.0 * r;
  out.series_b2 = 6.0 * li.l2 + 4.0 * li.l1 - 10.0 * r;

  const double head = std::pow(beta / (beta + 1.0), 4) * sums.den / (2.0 * beta);
  const double p_inf = (beta - 1.0) / beta;
  out.form_a = head - c * beta / (beta - 1.0) * sums.num_a * out.series_a;
  out.form_b = head - c / p_inf * (sums.num_b * out.series_b1 + sums.den * out.series_b2);
  out.value = std::max(out.form_a, out.form_b);
  return out;
}

LowerBound lower_bound_gap(const MonotoneCoupling& coupling, double beta, double c) {
  return lower_bound_gap(beta1(coupling), beta, c);
}

double numeric_threshold(const MonotoneCoupling& coupling, double c, double beta_max) {
  constexpr double kStep = 1e-6;
  const ThresholdReport sums = beta1(coupling);
  const auto positive = [&](double b) { return lower_bound_gap(sums, b, c).value > 0; };
  if (positive(kSeriesCutoff + kStep)) return kSeriesCutoff;
  double lo = kSeriesCutoff + kStep;
  double hi = lo;
  for (double step = 2 * kStep;; step *= 2) {
    hi = std::min(kSeriesCutoff + step, beta_max);
    if (positive(hi)) break;
    if (hi >= beta_max) return std::numeric_limits<double>::infinity();
    lo = hi;
  }
  while (hi - lo > kStep) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? hi : lo) = mid;
  }
  return hi;
}

double ell_threshold(double beta1_value, int ell, double delta) {
  if (ell < 1) throw PreconditionError("ell must be >= 1");
  if (!(beta1_value >= 0)) throw PreconditionError("beta1 must be >= 0");
  return std::max(ell_constant() * std::pow(beta1_value, 1.0 / ell), kSeriesCutoff + delta);
}

double d_scaled_threshold(const ThresholdReport& report, const ProgenyDistribution& p1,
                          const ProgenyDistribution& p2, int d) {
  if (d < 2) throw PreconditionError("d must be >= 2");
  if (p1.min_support() < d || p2.min_support() < d) {
    throw MinDegreeViolation("minimum degrees " + std::to_string(p1.min_support()) + ", " +
                             std::to_string(p2.min_support()) + " are below d = " + std::to_string(d));
  }
  return report.beta0 / d;
}

FindKResult find_k(const ProgenyDistribution& p1, const ProgenyDistribution& p2, double beta,
                   std::uint64_t n_samples, Parallelism par, FindKOptions opts) {
  if (!(beta > kSeriesCutoff)) throw PreconditionError("find_k needs beta > 23/4");
  if (n_samples < 2) throw PreconditionError("n_samples must be >= 2");
  if (opts.k_max < 1) throw PreconditionError("k_max must be >= 1");
  const MonotoneCoupling coupling = quantile_couple(p1, p2);

  FindKResult out;
  const double a = alpha(p1);
  const double power = std::isinf(a) ? 1.0 : std::max(2.0 / a, 1.0 / a + 1.0);
  out.mean_condition = p1.mean() > std::pow(p2.mean(), power);
  if (!out.mean_condition) {
    out.warning = "m1 <= m2^max(2/alpha, 1/alpha + 1): generation-k ratio need not vanish";
  }

  const auto sizes = split_work(n_samples, opts.task_samples);
  for (int k = 1; k <= opts.k_max; ++k) {
    const std::uint64_t seed_k = derived_seed(par.seed, static_cast<std::uint64_t>(k));
    const auto parts = run_tasks(sizes.size(), par.workers, [&](std::size_t t) {
      Stream rng = derive_stream(seed_k, t);
      std::pair<RatioAccumulator, double> acc{};
      for (std::uint64_t s = 0; s < sizes[t]; ++s) {
        const auto z1 = static_cast<double>(generation_k_sample(p1, k, rng, opts.population_cap));
        const auto z2 = static_cast<double>(generation_k_sample(p2, k, rng, opts.population_cap));
        const auto [c1, c2] = coupled_generation_k_sample(coupling, k, rng, opts.population_cap);
        const double num = z1 < z2 ? 1.0 / z1 - 1.0 / z2 : 0.0;
        const double den = 1.0 / static_cast<double>(c2) - 1.0 / static_cast<double>(c1);
        acc.first.add(num, den);
        acc.second += den;
      }
      return acc;
    });
    RatioAccumulator all;
    double den_sum = 0.0;
    for (const auto& [acc, d] : parts) {
      all.merge(acc);
      den_sum += d;
    }
    FindKStep step;
    step.k = k;
    step.ratio_a = all.estimate();
    // No decoupling seen: the denominator estimate is zero and nothing is known.
    step.upper = den_sum > 0.0 ? opts.c_delta * (step.ratio_a.value + opts.z * step.ratio_a.std_error)
                               : std::numeric_limits<double>::infinity();
    out.steps.push_back(step);
    if (step.upper < beta) {
      out.k = k;
      break;
    }
  }
  return out;
}

}  // namespace gwspeed
