#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "gwspeed/errors.hpp"
#include "gwspeed/progeny.hpp"
#include "gwspeed/stats.hpp"

using namespace gwspeed;
using P = ProgenyDistribution;

namespace {

double chi2_critical(int dof) {
  return boost::math::quantile(
      boost::math::complement(boost::math::chi_squared(dof), 0.001));
}

// Pearson statistic of observed counts against a pmf.
double chi2_stat(const std::map<int, double>& counts, const P& p, double n) {
  double s = 0;
  for (std::size_t i = 0; i < p.support().size(); ++i) {
    const double e = n * p.mass()[i];
    const auto it = counts.find(p.support()[i]);
    const double o = it == counts.end() ? 0.0 : it->second;
    s += (o - e) * (o - e) / e;
  }
  return s;
}

}  // namespace

TEST_CASE("validation") {
  const P a = P::from_pairs({{1, 0.5}, {2, 0.5}});
  CHECK(a.mean() == doctest::Approx(1.5));
  CHECK_THROWS_WITH_AS(P::from_pairs({{0, 0.5}, {2, 0.5}}), doctest::Contains("support must be >= 1"),
                       InvalidDistribution);
  CHECK(P::from_pairs({{3, 1.0}}).mean() == 3.0);
  CHECK_THROWS_AS(P::from_pairs({}), InvalidDistribution);
  CHECK_THROWS_AS(P::from_pairs({{1, -0.1}, {2, 1.1}}), InvalidDistribution);
  CHECK_THROWS_AS(P::from_pairs({{1, 0.5}, {1, 0.5}}), InvalidDistribution);
  const P b = P::from_pairs({{4, 2}, {1, 2}});
  CHECK(b.support()[0] == 1);
  CHECK(b.mass()[1] == doctest::Approx(0.5));
}

TEST_CASE("parse literals") {
  const P p = P::parse("1:0.5,4:0.5");
  CHECK(p == P::uniform({1, 4}));
  CHECK(P::parse(p.literal()) == p);
  const P g = P::parse("geometric(0.5)");
  CHECK(g.mean() == doctest::Approx(2.0).epsilon(1e-9));
  const P po = P::parse("poisson(2)");
  CHECK(po.mean() == doctest::Approx(2.0 / (1 - std::exp(-2.0))).epsilon(1e-9));
  CHECK_THROWS_AS(P::parse("1:0.5,x"), InvalidDistribution);
}

TEST_CASE("dominance") {
  CHECK(dominates(P::point_mass(3), P::point_mass(2)));
  CHECK(dominates(P::uniform({1, 4}), P::uniform({1, 2})));
  CHECK_FALSE(dominates(P::uniform({1, 2}), P::uniform({1, 2})));
  CHECK_FALSE(dominates(P::uniform({1, 2}), P::uniform({1, 4})));
}

TEST_CASE("antisymmetry of strict dominance on random pairs") {
  Stream rng(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::pair<int, double>> a, b;
    for (int v = 1; v <= 4; ++v) {
      a.push_back({v, rng.uniform_open_closed()});
      b.push_back({v, rng.uniform_open_closed()});
    }
    const P p = P::from_pairs(a), q = P::from_pairs(b);
    CHECK_FALSE((dominates(p, q) && dominates(q, p)));
  }
}

TEST_CASE("quantile coupling fixtures") {
  auto as_map = [](const MonotoneCoupling& c) {
    std::map<std::pair<int, int>, double> m;
    for (const auto& e : c.pairs()) m[{e.z1, e.z2}] += e.prob;
    return m;
  };
  auto m = as_map(quantile_couple(P::uniform({2, 3}), P::uniform({1, 2})));
  CHECK(m.size() == 2);
  CHECK(m[{2, 1}] == doctest::Approx(0.5));
  CHECK(m[{3, 2}] == doctest::Approx(0.5));
  m = as_map(quantile_couple(P::point_mass(3), P::point_mass(2)));
  CHECK(m.size() == 1);
  CHECK(m[{3, 2}] == doctest::Approx(1.0));
  m = as_map(quantile_couple(P::uniform({1, 4}), P::uniform({1, 2})));
  CHECK(m.size() == 2);
  CHECK(m[{1, 1}] == doctest::Approx(0.5));
  CHECK(m[{4, 2}] == doctest::Approx(0.5));
  CHECK_THROWS_AS(quantile_couple(P::uniform({1, 2}), P::uniform({1, 4})), DominanceViolation);
}

TEST_CASE("quantile coupling marginals on random dominating pairs") {
  Stream rng(5);
  int built = 0;
  for (int t = 0; t < 500 && built < 50; ++t) {
    std::vector<std::pair<int, double>> a, b;
    for (int v = 1; v <= 6; ++v) {
      a.push_back({v, rng.uniform_open_closed()});
      b.push_back({v, rng.uniform_open_closed()});
    }
    const P p = P::from_pairs(a), q = P::from_pairs(b);
    if (!dominates(p, q)) continue;
    ++built;
    const MonotoneCoupling c = quantile_couple(p, q);
    std::map<int, double> m1, m2;
    for (const auto& e : c.pairs()) {
      CHECK(e.z1 >= e.z2);
      m1[e.z1] += e.prob;
      m2[e.z2] += e.prob;
    }
    for (int v = 1; v <= 6; ++v) {
      CHECK(std::abs(m1[v] - p.mass_at(v)) < 1e-12);
      CHECK(std::abs(m2[v] - q.mass_at(v)) < 1e-12);
    }
  }
  CHECK(built > 5);
}

TEST_CASE("coupling table from csv") {
  const auto path = std::filesystem::temp_directory_path() / "gwspeed_coupling_test.csv";
  {
    std::ofstream f(path);
    f << "z1,z2,prob\n4,1,0.5\n1,1,0.0\n4,2,0.0\n";
  }
  CHECK_THROWS(MonotoneCoupling::load_csv(path, P::uniform({1, 4}), P::uniform({1, 2})));
  {
    std::ofstream f(path);
    f << "z1,z2,prob\n1,1,0.5\n4,2,0.5\n";
  }
  const auto c = MonotoneCoupling::load_csv(path, P::uniform({1, 4}), P::uniform({1, 2}));
  CHECK(c.pairs().size() == 2);
  {
    std::ofstream f(path);
    f << "z1,z2,prob\n1,2,0.5\n4,1,0.5\n";
  }
  CHECK_THROWS_AS(MonotoneCoupling::load_csv(path, P::uniform({1, 4}), P::uniform({1, 2})),
                  DominanceViolation);
  std::filesystem::remove(path);
}

TEST_CASE("ell-fold check fixtures") {
  CHECK(ell_fold_check(P::uniform({3, 4}), P::uniform({2, 3}), 2));
  CHECK_FALSE(ell_fold_check(P::uniform({2, 5}), P::uniform({1, 4}), 2));
  CHECK(ell_fold_check(P::uniform({1, 4}), P::uniform({1, 2}), 1));
  CHECK_FALSE(ell_fold_check(P::uniform({1, 2}), P::uniform({1, 4}), 1));
}

TEST_CASE("ell-fold check fails monotonically in ell") {
  Stream rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::pair<int, double>> a, b;
    for (int v = 1; v <= 5; ++v) {
      a.push_back({v + 1, rng.uniform_open_closed()});
      b.push_back({v, rng.uniform_open_closed()});
    }
    const P p = P::from_pairs(a), q = P::from_pairs(b);
    bool failed = false;
    for (int ell = 1; ell <= 8; ++ell) {
      const bool ok = ell_fold_check(p, q, ell);
      if (failed) CHECK_FALSE(ok);
      failed = failed || !ok;
    }
  }
}

TEST_CASE("ell-fold sampler") {
  SUBCASE("point masses") {
    EllFoldCoupling c(P::point_mass(3), P::point_mass(2), 5);
    Stream rng(1);
    for (int i = 0; i < 100; ++i) {
      const auto d = c.sample(rng);
      CHECK(d.first == std::vector<int>(5, 3));
      CHECK(d.second == std::vector<int>(5, 2));
    }
  }
  SUBCASE("U{3,4} over U{2,3}: order and marginals") {
    const P p1 = P::uniform({3, 4}), p2 = P::uniform({2, 3});
    EllFoldCoupling c(p1, p2, 2);
    Stream rng(2);
    constexpr int kN = 100000;
    std::map<int, double> c0, c1, d0, d1;
    int violations = 0;
    for (int i = 0; i < kN; ++i) {
      const auto d = c.sample(rng);
      if (*std::min_element(d.first.begin(), d.first.end()) <
          *std::max_element(d.second.begin(), d.second.end())) {
        ++violations;
      }
      c0[d.first[0]] += 1;
      c1[d.first[1]] += 1;
      d0[d.second[0]] += 1;
      d1[d.second[1]] += 1;
    }
    CHECK(violations == 0);
    // Each coordinate is a fair coin: within 3 sigma of n/2.
    const double sigma = std::sqrt(kN * 0.25);
    CHECK(std::abs(c0[3] - kN / 2.0) < 3 * sigma);
    CHECK(std::abs(c1[3] - kN / 2.0) < 3 * sigma);
    CHECK(std::abs(d0[2] - kN / 2.0) < 3 * sigma);
    CHECK(std::abs(d1[2] - kN / 2.0) < 3 * sigma);
  }
  SUBCASE("ell = 1 gives the quantile coupling law") {
    const P p1 = P::uniform({1, 4}), p2 = P::uniform({1, 2});
    EllFoldCoupling c(p1, p2, 1);
    Stream rng(3);
    std::map<std::pair<int, int>, int> counts;
    for (int i = 0; i < 20000; ++i) {
      const auto d = c.sample(rng);
      ++counts[{d.first[0], d.second[0]}];
    }
    CHECK(counts.size() == 2);
    CHECK(counts.count({1, 1}) == 1);
    CHECK(counts.count({4, 2}) == 1);
  }
  CHECK_THROWS_AS(EllFoldCoupling(P::uniform({2, 5}), P::uniform({1, 4}), 2), CouplingUnavailable);
}

TEST_CASE("ell-fold marginals on a non-trivial pair pass chi-square") {
  const P p1 = P::from_pairs({{4, 0.2}, {5, 0.3}, {6, 0.5}});
  const P p2 = P::from_pairs({{1, 0.5}, {2, 0.3}, {4, 0.2}});
  REQUIRE(ell_fold_check(p1, p2, 3));
  EllFoldCoupling c(p1, p2, 3);
  Stream rng(4);
  constexpr int kN = 100000;
  std::vector<std::map<int, double>> f(3), s(3);
  for (int i = 0; i < kN; ++i) {
    const auto d = c.sample(rng);
    for (int j = 0; j < 3; ++j) {
      f[j][d.first[j]] += 1;
      s[j][d.second[j]] += 1;
    }
  }
  for (int j = 0; j < 3; ++j) {
    CHECK(chi2_stat(f[j], p1, kN) < chi2_critical(2));
    CHECK(chi2_stat(s[j], p2, kN) < chi2_critical(2));
  }
}

TEST_CASE("alpha") {
  CHECK(alpha(P::uniform({1, 4})) == doctest::Approx(std::log(2.0) / std::log(2.5)));
  CHECK(std::isinf(alpha(P::uniform({2, 3}))));
  CHECK_THROWS_AS(alpha(P::point_mass(1)), MeanNotSupercritical);
}

TEST_CASE("generation-k sampling") {
  Stream rng(8);
  CHECK(generation_k_sample(P::point_mass(2), 3, rng) == 8);

  const P p = P::from_pairs({{1, 0.3}, {2, 0.5}, {5, 0.2}});
  std::map<int, double> counts;
  constexpr int kN = 100000;
  for (int i = 0; i < kN; ++i) counts[static_cast<int>(generation_k_sample(p, 1, rng))] += 1;
  CHECK(chi2_stat(counts, p, kN) < chi2_critical(2));

  MeanAccumulator acc;
  for (int i = 0; i < kN; ++i) acc.add(static_cast<double>(generation_k_sample(P::uniform({1, 2}), 2, rng)));
  CHECK(std::abs(acc.mean() - 2.25) < 3 * acc.estimate().std_error);

  for (int k = 1; k <= 4; ++k) {
    MeanAccumulator a;
    const P q = P::uniform({1, 4});
    for (int i = 0; i < 20000; ++i) a.add(static_cast<double>(generation_k_sample(q, k, rng)));
    CHECK_MESSAGE(std::abs(a.mean() - std::pow(2.5, k)) < 3 * a.estimate().std_error, "k=" << k);
  }
  CHECK_THROWS_AS(generation_k_sample(P::point_mass(2), 40, rng, 1000), PopulationOverflow);
}

TEST_CASE("coupled generation-k keeps order and marginal means") {
  const auto c = quantile_couple(P::uniform({1, 4}), P::uniform({1, 2}));
  Stream rng(12);
  MeanAccumulator a1, a2;
  for (int i = 0; i < 50000; ++i) {
    const auto [z1, z2] = coupled_generation_k_sample(c, 3, rng);
    CHECK(z1 >= z2);
    a1.add(static_cast<double>(z1));
    a2.add(static_cast<double>(z2));
  }
  CHECK(std::abs(a1.mean() - 15.625) < 3 * a1.estimate().std_error);
  CHECK(std::abs(a2.mean() - 3.375) < 3 * a2.estimate().std_error);
}
