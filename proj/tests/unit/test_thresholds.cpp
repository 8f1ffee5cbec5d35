#include <doctest.h>

#include <cmath>

#include "gwspeed/errors.hpp"
#include "gwspeed/thresholds.hpp"

using namespace gwspeed;
using P = ProgenyDistribution;

namespace {

// Direct partial sums, run far past where the terms underflow the total.
double brute_series(double beta, int which) {
  const double r = 27.0 / (4.0 * (1.0 + beta));
  double s = 0, rk = r;
  for (int k = 1; k < 2'000'000; ++k, rk *= r) {
    if (k < 2) continue;
    const double kk = k;
    const double f = which == 0   ? 16 * kk * (kk - 1) * (3 * kk + 2) * (3 * kk + 2)
                     : which == 1 ? 2 * (3 * kk + 2) * (3 * kk + 2)
                                  : 2 * kk * (3 * kk + 2);
    s += f * rk;
    if (rk < 1e-300) break;
  }
  return s;
}

// Independent sampling oracle for the four expectations.
struct Sampled {
  double num_a, num_b, den;
};

Sampled sample_sums(const MonotoneCoupling& c, int n, Stream& rng) {
  Sampled s{0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const double z1 = c.first().sample(rng), z2 = c.second().sample(rng);
    if (z1 < z2) s.num_a += 1 / z1 - 1 / z2;
    const auto [a, b] = c.sample(rng);
    s.den += 1.0 / b - 1.0 / a;
    s.num_b += b * (1.0 / b - 1.0 / a);
  }
  s.num_a /= n;
  s.num_b /= n;
  s.den /= n;
  return s;
}

}  // namespace

TEST_CASE("beta1 by hand on small pairs") {
  // den = E[1/Z2] - E[1/Z1] = 3/4 - 25/48 = 11/48; numA = P(1,2) / 2 = 1/16;
  // numB = (1/2 + 1/3 + 1/2) / 4 = 1/3.
  const auto r = beta1(quantile_couple(P::uniform({1, 2, 3, 4}), P::uniform({1, 2})));
  CHECK(r.ratio_a_exact == "3/11");
  CHECK(r.ratio_b_exact == "27/11");
  CHECK(r.den == doctest::Approx(11.0 / 48));
  CHECK(r.den == r.den_independent);
  CHECK(r.branch == "ratioA");
  CHECK(r.beta1 == doctest::Approx(3.0 / 11));
  CHECK(r.beta0 == doctest::Approx(5.76));

  const auto o = beta1(quantile_couple(P::point_mass(3), P::point_mass(2)), 2.0, 0.5);
  CHECK(o.ratio_a == 0.0);
  CHECK(o.beta1 == 0.0);
  CHECK(o.beta0 == 6.25);
  CHECK(o.ratio_b_exact == "3");  // 2 (1/2 - 1/3) / (1/6) + 1

  CHECK_THROWS_AS(beta1(quantile_couple(P::point_mass(2), P::point_mass(2))), DegenerateCoupling);
  CHECK_THROWS_AS(quantile_couple(P::point_mass(2), P::point_mass(3)), DominanceViolation);
}

TEST_CASE("beta1 exact sums agree with sampling") {
  const auto c = quantile_couple(P::uniform({2, 3, 5}), P::uniform({1, 2, 4}));
  const auto r = beta1(c);
  Stream rng(17);
  const Sampled s = sample_sums(c, 400000, rng);
  CHECK(s.num_a == doctest::Approx(r.num_a).epsilon(0.02));
  CHECK(s.num_b == doctest::Approx(r.num_b).epsilon(0.02));
  CHECK(s.den == doctest::Approx(r.den).epsilon(0.02));
}

TEST_CASE("ratioB is at most max support + 1") {
  Stream rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_open_closed() * 6);
    std::vector<std::pair<int, double>> a, b;
    for (int z = 1; z <= m; ++z) {
      a.emplace_back(z, rng.uniform_open_closed());
      b.emplace_back(z, rng.uniform_open_closed());
    }
    P p = P::from_pairs(a), q = P::from_pairs(b);
    if (!weakly_dominates(p, q)) std::swap(p, q);
    if (!weakly_dominates(p, q) || p == q) continue;
    const auto r = beta1(quantile_couple(p, q));
    CHECK(r.ratio_b <= m + 1 + 1e-12);
    CHECK(r.num_a >= 0);
    CHECK(r.den > 0);
  }
}

TEST_CASE("series closed forms match partial sums") {
  const auto r = beta1(quantile_couple(P::uniform({1, 2, 3, 4}), P::uniform({1, 2})));
  for (double beta : {6.0, 8.0, 30.0, 1e4}) {
    const LowerBound lb = lower_bound_gap(r, beta);
    CHECK(lb.series_a == doctest::Approx(brute_series(beta, 0)).epsilon(1e-9));
    CHECK(lb.series_b1 == doctest::Approx(brute_series(beta, 1)).epsilon(1e-9));
    CHECK(lb.series_b2 == doctest::Approx(brute_series(beta, 2)).epsilon(1e-9));
    CHECK(lb.value == std::max(lb.form_a, lb.form_b));
  }
  CHECK_THROWS_AS(lower_bound_gap(r, 5.75), SeriesDivergent);
  CHECK_THROWS_AS(lower_bound_gap(r, 3.0), SeriesDivergent);
}

TEST_CASE("numeric threshold") {
  const auto c = quantile_couple(P::uniform({1, 2, 3, 4}), P::uniform({1, 2}));
  const double t = numeric_threshold(c);
  REQUIRE(std::isfinite(t));
  CHECK(t > kSeriesCutoff);
  CHECK(lower_bound_gap(c, t).value > 0);
  CHECK(lower_bound_gap(c, t - 1e-6).value <= 0);

  // Doubling c never lowers it.
  CHECK(numeric_threshold(c, 2.0) >= t);

  // No indicator mass: form A is the positive head term everywhere.
  CHECK(numeric_threshold(quantile_couple(P::uniform({2, 3}), P::uniform({1, 2}))) == kSeriesCutoff);

  // Unreachable below a small cap.
  CHECK(std::isinf(numeric_threshold(c, 1.0, 50.0)));
}

TEST_CASE("ell and d thresholds") {
  const double k = ell_constant();
  CHECK(k == doctest::Approx(27.0 / 4 * std::pow(3.0, 5.0 / 3)).epsilon(1e-14));
  CHECK(k == doctest::Approx(42.1217).epsilon(1e-5));
  CHECK(ell_threshold(1.0, 1, 0.01) == k);
  CHECK(ell_threshold(0.0, 3, 0.01) == doctest::Approx(5.76));
  CHECK(ell_threshold(9.0, 1000, 0.01) == doctest::Approx(k).epsilon(3e-3));
  for (int l = 1; l < 10; ++l) CHECK(ell_threshold(9.0, l + 1, 0.01) <= ell_threshold(9.0, l, 0.01));
  CHECK_THROWS_AS(ell_threshold(1.0, 0, 0.01), PreconditionError);

  const P a = P::uniform({3, 5}), b = P::uniform({3, 4});
  const auto r = beta1(quantile_couple(a, b));
  CHECK(d_scaled_threshold(r, a, b, 3) == doctest::Approx(r.beta0 / 3));
  CHECK_THROWS_AS(d_scaled_threshold(r, a, P::uniform({2, 3}), 3), MinDegreeViolation);
}

TEST_CASE("find_k") {
  // Ordered supports: the numerator vanishes at k = 1.
  const auto o = find_k(P::point_mass(3), P::uniform({1, 2}), 8.0, 1000, {1, 1});
  REQUIRE(o.k.has_value());
  CHECK(*o.k == 1);
  CHECK(o.steps.front().ratio_a.value == 0.0);

  const auto r = find_k(P::uniform({1, 2, 3, 4, 5, 6}), P::uniform({1, 2}), 8.0, 20000, {2, 1});
  REQUIRE(r.k.has_value());
  CHECK(r.mean_condition);
  // Exact k = 1 value for comparison.
  const auto exact = beta1(quantile_couple(P::uniform({1, 2, 3, 4, 5, 6}), P::uniform({1, 2})));
  CHECK(std::abs(r.steps[0].ratio_a.value - exact.ratio_a) < 4 * r.steps[0].ratio_a.std_error);

  CHECK_THROWS_AS(find_k(P::point_mass(3), P::point_mass(2), 5.0, 100, {1, 1}), PreconditionError);

  // Nearly equal laws: ratioA = 0.1225 / 0.005 = 24.5 at k = 1.
  const P near = P::from_pairs({{1, 0.49}, {2, 0.51}});
  const auto none = find_k(near, P::uniform({1, 2}), 8.0, 2000, {3, 1}, {.k_max = 1});
  CHECK(!none.k.has_value());

  const auto w1 = find_k(P::point_mass(3), P::uniform({1, 2}), 8.0, 1000, {5, 1});
  const auto w4 = find_k(P::point_mass(3), P::uniform({1, 2}), 8.0, 1000, {5, 4});
  CHECK(w1.steps.front().ratio_a.value == w4.steps.front().ratio_a.value);
}
