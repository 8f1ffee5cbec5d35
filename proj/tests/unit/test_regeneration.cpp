#include <doctest.h>

#include <cmath>
#include <string>

#include "gwspeed/errors.hpp"
#include "gwspeed/regeneration.hpp"

using namespace gwspeed;
using P = ProgenyDistribution;

namespace {

std::vector<std::int8_t> parse_path(const std::string& s, int ascending_tail) {
  std::vector<std::int8_t> v;
  for (char c : s) v.push_back(c == '+' ? 1 : -1);
  for (int i = 0; i < ascending_tail; ++i) v.push_back(1);
  return v;
}

// Brute-force oracle straight from the definition.
std::vector<std::int64_t> brute_regenerations(const std::vector<std::int8_t>& inc, int margin) {
  std::vector<std::int64_t> y{0};
  for (auto d : inc) y.push_back(y.back() + d);
  std::vector<std::int64_t> out;
  const auto n = static_cast<std::int64_t>(inc.size());
  for (std::int64_t t = 1; t <= n; ++t) {
    bool ok = true;
    for (std::int64_t s = 0; s < t && ok; ++s) ok = y[t] > y[s];
    bool climbs = false;
    for (std::int64_t s = t + 1; s <= n && ok; ++s) {
      ok = y[s] > y[t];
      climbs = climbs || y[s] >= y[t] + margin;
    }
    if (ok && climbs) out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("find_regenerations: hand-traced fixtures") {
  const auto inc = parse_path("++-++", 10);
  const auto r = find_regenerations(inc, 4);
  REQUIRE(!r.empty());
  CHECK(r.front() == 5);

  const auto up = parse_path("", 20);
  const auto all = find_regenerations(up, 3);
  CHECK(all.size() == 17);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == static_cast<std::int64_t>(i + 1));

  const auto back = parse_path("+++---", 10);
  for (auto t : find_regenerations(back, 2)) CHECK(t > 6);
}

TEST_CASE("find_regenerations agrees with the definition on random paths") {
  Stream rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::int8_t> inc(60);
    for (auto& d : inc) d = rng.uniform_open_closed() < 0.7 ? 1 : -1;
    CHECK(find_regenerations(inc, 3) == brute_regenerations(inc, 3));
  }
}

TEST_CASE("a two-back-step block can exceed 3k + 2") {
  // Y: 0 1 2 1 2 3 4 3 4 5 ...; times 1, 2, 5, 6 are revisited, so tau_1 = 9.
  const auto inc = parse_path("++-+++-++", 10);
  const auto r = find_regenerations(inc, 4);
  REQUIRE(!r.empty());
  CHECK(r.front() == 9);
  CHECK(r.front() > 3 * 2 + 2);
  CHECK(r.front() <= 4 * 2 + 1);
}

TEST_CASE("acceptance rate is (beta - 1) / beta") {
  const auto src = CouplingSources::quantile(P::point_mass(3), P::point_mass(2));
  const auto e = estimate_acceptance(src, {8.0, 1}, 20000, {7, 1});
  CHECK(std::abs(e.rate - 0.875) < 3 * std::sqrt(0.875 * 0.125 / 20000));
  const auto e2 = estimate_acceptance(src, {2.0, 1}, 20000, {7, 1});
  CHECK(std::abs(e2.rate - 0.5) < 3 * std::sqrt(0.25 / 20000));
}

TEST_CASE("blocks: identities, observations and super-regeneration") {
  const auto src = CouplingSources::quantile(P::uniform({1, 4}), P::uniform({1, 2}));
  for (double beta : {3.0, 8.0}) {
    const auto h = harvest_blocks(src, {beta, 1}, 20000, {11, 1});
    CHECK(h.blocks.size() == 20000);
    const auto& d = h.diagnostics;
    CHECK(d.blocks == 20000);
    CHECK(d.obs_k1_violations == 0);
    CHECK(d.obs_k2_violations == 0);
    CHECK(d.odd_gaps == 0);
    CHECK(d.super_violations == 0);
    CHECK(d.duration_over_4k1 == 0);
    for (const auto& b : h.blocks) {
      CHECK(b.dy == b.duration - 2 * b.k);
      CHECK(b.dx1 >= b.dy);
      CHECK(b.dx2 >= b.dy);
    }
  }
}

TEST_CASE("identical laws give zero gaps and never decouple") {
  const auto src = CouplingSources::quantile(P::point_mass(2), P::point_mass(2));
  const auto h = harvest_blocks(src, {3.0, 1}, 5000, {3, 1});
  for (const auto& b : h.blocks) {
    CHECK(b.gap() == 0);
    CHECK(b.decouple == DecoupleClass::none);
  }
}

TEST_CASE("first block under the conditioning") {
  const auto src = CouplingSources::quantile(P::point_mass(3), P::point_mass(2));
  Stream rng(5);
  for (int i = 0; i < 200; ++i) {
    const RegenBlock b = sample_block_conditioned(src, {8.0, 1}, rng);
    CHECK(b.start == 0);
    CHECK(b.end == b.duration);
    CHECK(b.duration >= 1);
  }
}

TEST_CASE("harvest is independent of worker count") {
  const auto src = CouplingSources::quantile(P::uniform({1, 4}), P::uniform({1, 2}));
  RegenOptions opts;
  opts.task_blocks = 1000;
  const auto a = harvest_blocks(src, {6.0, 1}, 5000, {9, 1}, opts);
  const auto b = harvest_blocks(src, {6.0, 1}, 5000, {9, 4}, opts);
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    CHECK(a.blocks[i].duration == b.blocks[i].duration);
    CHECK(a.blocks[i].gap() == b.blocks[i].gap());
  }
}

TEST_CASE("horizon cap") {
  const auto src = CouplingSources::quantile(P::point_mass(2), P::point_mass(1));
  RegenOptions opts;
  opts.horizon = 3;
  opts.margin = 64;
  Stream rng(2);
  CHECK_THROWS_AS(sample_block_conditioned(src, {1.01, 1}, rng, opts), HorizonExceeded);
}

TEST_CASE("tail of |B|") {
  const auto src = CouplingSources::quantile(P::point_mass(3), P::point_mass(2));
  const auto t = tail_of_B(src, {8.0, 1}, 50000, {4, 1});
  double total = 0;
  for (double p : t.pmf()) total += p;
  CHECK(total == doctest::Approx(1.0));
  CHECK(t.bound_rate == doctest::Approx(0.75));
  CHECK(t.fitted_rate > 0);
  CHECK(t.fitted_rate <= t.bound_rate);
  const auto big = tail_of_B(src, {200.0, 1}, 20000, {4, 1});
  CHECK(big.pmf()[0] > 0.98);
}

TEST_CASE("geometric fit recovers an exact decay") {
  std::vector<std::uint64_t> h{1000, 100000, 50000, 25000, 12500, 6250};
  const auto [rate, se] = fit_geometric_rate(h);
  CHECK(rate == doctest::Approx(0.5).epsilon(1e-9));
}
