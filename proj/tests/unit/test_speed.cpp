#include <doctest.h>

#include <cmath>

#include "gwspeed/errors.hpp"
#include "gwspeed/gw_tree.hpp"
#include "gwspeed/speed.hpp"

using namespace gwspeed;
using P = ProgenyDistribution;

namespace {

// Direct simulation of the walk started at the root x of a lazily grown
// GW(p) tree whose root has a parent: 1 if it reaches depth `horizon`
// before stepping to that parent.
int escapes(const P& p, double beta, int horizon, Stream& rng) {
  Tree t;
  VertexId x = Tree::root();
  for (;;) {
    if (!t.is_realized(x)) t.realize_children(x, p.sample(rng));
    const int z = t.child_count(x);
    const double u = rng.uniform_open_closed();
    if (u <= 1.0 / (z * beta + 1)) {
      if (x == Tree::root()) return 0;
      x = t.parent(x);
    } else {
      const auto i = static_cast<std::int32_t>(std::min<double>(z - 1, std::floor((u - 1.0 / (z * beta + 1)) / (beta / (z * beta + 1)))));
      x = t.child(x, i);
      if (t.depth(x) >= horizon) return 1;
    }
  }
}

}  // namespace

TEST_CASE("closed forms") {
  CHECK(closed_form_regular(2, 2.0) == doctest::Approx(0.6));
  CHECK(closed_form_regular(1, 3.0) == doctest::Approx(0.5));
  CHECK(closed_form_regular(4, 0.25) == 0.0);
  CHECK_THROWS_AS(closed_form_regular(2, 0.4), PreconditionError);
  CHECK(regular_escape(2, 2.0) == doctest::Approx(0.75));
}

TEST_CASE("escape sandwich on regular trees closes at once") {
  Stream rng(1);
  const EscapeSample s = sample_escape(P::point_mass(2), 2.0, 1, 0.0, rng);
  CHECK(s.lower == doctest::Approx(0.75));
  CHECK(s.upper == s.lower);
}

TEST_CASE("escape sandwich brackets and tightens with depth") {
  const P p = P::uniform({1, 2});
  for (int d = 1; d < 12; ++d) {
    Stream a(77), b(77);
    const EscapeSample s = sample_escape(p, 2.0, d, 1.0, a);
    const EscapeSample t = sample_escape(p, 2.0, d + 1, 1.0, b);
    CHECK(0.0 <= s.lower);
    CHECK(s.lower <= s.upper);
    CHECK(s.upper <= 1.0);
    CHECK(t.lower >= s.lower - 1e-15);
    CHECK(t.upper <= s.upper + 1e-15);
  }
  Stream rng(3);
  const EscapeSample tight = sample_escape(p, 8.0, 1, 1e-6, rng);
  CHECK(tight.upper - tight.lower <= 1e-6);
  CHECK_THROWS_AS(sample_escape(p, 1.01, 1, 1e-12, rng, {5, 1000}), DepthCapExceeded);
  CHECK_THROWS_AS(sample_escape(p, 0.9, 1, 1e-6, rng), PreconditionError);
}

TEST_CASE("escape recursion matches direct simulation") {
  const P p = P::uniform({1, 2});
  const double beta = 2.0;
  Stream rng(5);
  constexpr int kN = 40000;
  MeanAccumulator rec, sim;
  for (int i = 0; i < kN; ++i) {
    rec.add(sample_escape(p, beta, 4, 1e-9, rng).midpoint());
    sim.add(escapes(p, beta, 40, rng));
  }
  const double se = std::hypot(rec.estimate().std_error, sim.estimate().std_error);
  CHECK(std::abs(rec.mean() - sim.mean()) < 3 * se);
}

TEST_CASE("ergodic speed on the binary tree") {
  const SpeedEstimate e = speed_ergodic(P::point_mass(2), 2.0, 20000, 60, {1, 1});
  CHECK(std::abs(e.value - 0.6) < 3 * e.std_error);
  CHECK(e.warning.empty());
  const SpeedEstimate sub = speed_ergodic(P::point_mass(2), 0.4, 1000, 4, {1, 1});
  CHECK(!sub.warning.empty());
}

TEST_CASE("ergodic speed at beta = 1 matches E[(Z-1)/(Z+1)]") {
  const SpeedEstimate e = speed_ergodic(P::uniform({1, 3}), 1.0, 20000, 60, {2, 1});
  CHECK(std::abs(e.value - 0.25) < 3 * e.std_error);
}

TEST_CASE("Aidekon estimator") {
  const SpeedEstimate d = speed_aidekon(P::point_mass(2), 2.0, 1000, {1, 1});
  CHECK(std::abs(d.value - 0.6) < 1e-9);
  CHECK_THROWS_AS(speed_aidekon(P::point_mass(2), 0.5, 10, {1, 1}), PreconditionError);

  const P p = P::uniform({1, 2});
  const SpeedEstimate a = speed_aidekon(p, 8.0, 20000, {3, 1});
  const SpeedEstimate e = speed_ergodic(p, 8.0, 20000, 40, {4, 1});
  CHECK(std::abs(a.value - e.value) < 3 * std::hypot(a.std_error, e.std_error));
}

TEST_CASE("Aidekon at beta = 1 gives E[(Z-1)/(Z+1)]") {
  // At beta = 1 the denominator is the sum of the Y_i, and by exchangeability
  // E[Y_0 / sum Y_i | Z] = 1/(Z+1).
  const P p = P::uniform({2, 3});
  const double expected = 0.5 * (1.0 / 3.0) + 0.5 * (2.0 / 4.0);
  AidekonOptions opts;
  opts.gap_tol = 1e-3;
  const SpeedEstimate a = speed_aidekon(p, 1.0, 10000, {8, 1}, opts);
  CHECK(std::abs(a.value - expected) < 3 * a.std_error);
}

TEST_CASE("regeneration speeds agree with ergodic speeds") {
  const auto src = CouplingSources::quantile(P::point_mass(3), P::point_mass(2));
  const RegenSpeed r = speed_regen(src, {8.0, 1}, 100000, {5, 1});
  CHECK(r.v1.value == doctest::Approx(closed_form_regular(3, 8.0)).epsilon(0.01));
  CHECK(std::abs(r.v1.value - closed_form_regular(3, 8.0)) < 3 * r.v1.std_error + 1e-12);
  CHECK(std::abs(r.v2.value - closed_form_regular(2, 8.0)) < 3 * r.v2.std_error + 1e-12);
  CHECK(r.gap.value > 0);

  const auto same = CouplingSources::quantile(P::uniform({1, 2}), P::uniform({1, 2}));
  const RegenSpeed s = speed_regen(same, {6.0, 1}, 5000, {6, 1});
  CHECK(s.v1.value == s.v2.value);
  CHECK(s.gap.value == 0.0);
}
