#include "gwspeed/progeny.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "gwspeed/errors.hpp"

namespace gwspeed {

namespace {

constexpr double kTol = 1e-12;
constexpr double kTruncation = 1e-12;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string buf(trim(text));
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v)) {
    throw InvalidDistribution("cannot parse " + std::string(what) + " '" + buf + "'");
  }
  return v;
}

int parse_int(std::string_view text) {
  const double v = parse_double(text, "support value");
  if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max()) {
    throw InvalidDistribution("support value must be an integer: '" + std::string(trim(text)) + "'");
  }
  return static_cast<int>(v);
}

// Evaluates a one-parameter family on k = 1, 2, ... until the remaining tail
// mass drops below the truncation tolerance.
template <class MassFn>
std::vector<std::pair<int, double>> truncate_family(MassFn mass_at, double total) {
  std::vector<std::pair<int, double>> raw;
  double covered = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double m = mass_at(k);
    if (m > 0.0) raw.emplace_back(k, m);
    covered += m;
    if (total - covered < kTruncation * total && k > 1) break;
  }
  return raw;
}

}  // namespace

ProgenyDistribution ProgenyDistribution::from_pairs(std::vector<std::pair<int, double>> raw) {
  if (raw.empty()) throw InvalidDistribution("empty support");
  std::sort(raw.begin(), raw.end());
  ProgenyDistribution d;
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto [value, m] = raw[i];
    if (value < 1) {
      throw InvalidDistribution("support must be >= 1 (got " + std::to_string(value) + ")");
    }
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw InvalidDistribution("negative or non-finite mass at " + std::to_string(value));
    }
    if (i > 0 && raw[i - 1].first == value) {
      throw InvalidDistribution("duplicate support value " + std::to_string(value));
    }
    if (m == 0.0) continue;
    d.support_.push_back(value);
    d.mass_.push_back(m);
    total += m;
  }
  if (d.support_.empty() || total <= 0.0) throw InvalidDistribution("total mass is zero");

  double acc = 0.0;
  for (std::size_t i = 0; i < d.mass_.size(); ++i) {
    d.mass_[i] /= total;
    acc += d.mass_[i];
    d.cdf_.push_back(acc);
    d.mean_ += d.mass_[i] * d.support_[i];
  }
  d.cdf_.back() = 1.0;
  return d;
}

ProgenyDistribution ProgenyDistribution::parse(std::string_view literal) {
  literal = trim(literal);
  auto call_arg = [&](std::string_view name) -> std::optional<double> {
    if (literal.substr(0, name.size()) != name) return std::nullopt;
    auto rest = trim(literal.substr(name.size()));
    if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') return std::nullopt;
    return parse_double(rest.substr(1, rest.size() - 2), name);
  };
  if (auto q = call_arg("geometric")) return geometric(*q);
  if (auto lambda = call_arg("poisson")) return poisson_positive(*lambda);

  std::vector<std::pair<int, double>> raw;
  std::size_t start = 0;
  while (start <= literal.size()) {
    const std::size_t comma = literal.find(',', start);
    const auto item = trim(literal.substr(start, comma == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : comma - start));
    if (!item.empty()) {
      const std::size_t colon = item.find(':');
      if (colon == std::string_view::npos) {
        throw InvalidDistribution("expected value:mass, got '" + std::string(item) + "'");
      }
      raw.emplace_back(parse_int(item.substr(0, colon)),
                       parse_double(item.substr(colon + 1), "mass"));
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return from_pairs(std::move(raw));
}

ProgenyDistribution ProgenyDistribution::point_mass(int value) {
  return from_pairs({{value, 1.0}});
}

ProgenyDistribution ProgenyDistribution::uniform(std::initializer_list<int> values) {
  std::vector<std::pair<int, double>> raw;
  for (int v : values) raw.emplace_back(v, 1.0);
  return from_pairs(std::move(raw));
}

ProgenyDistribution ProgenyDistribution::geometric(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw InvalidDistribution("geometric parameter must lie in (0,1]");
  return from_pairs(truncate_family(
      [q](int k) { return q * std::pow(1.0 - q, k - 1); }, 1.0));
}

ProgenyDistribution ProgenyDistribution::poisson_positive(double lambda) {
  if (!(lambda > 0.0)) throw InvalidDistribution("poisson parameter must be positive");
  const double total = -std::expm1(-lambda);
  return from_pairs(truncate_family(
      [lambda](int k) {
        return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
      },
      total));
}

double ProgenyDistribution::mass_at(int value) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), value);
  if (it == support_.end() || *it != value) return 0.0;
  return mass_[static_cast<std::size_t>(it - support_.begin())];
}

double ProgenyDistribution::cdf(int t) const {
  auto it = std::upper_bound(support_.begin(), support_.end(), t);
  if (it == support_.begin()) return 0.0;
  return cdf_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

int ProgenyDistribution::quantile(double u) const {
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return support_[static_cast<std::size_t>(it - cdf_.begin())];
}

std::string ProgenyDistribution::literal() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (i) os << ',';
    os << support_[i] << ':' << mass_[i];
  }
  return os.str();
}

namespace {

std::vector<int> support_union(const ProgenyDistribution& a, const ProgenyDistribution& b) {
  std::vector<int> out;
  std::set_union(a.support().begin(), a.support().end(), b.support().begin(),
                 b.support().end(), std::back_inserter(out));
  return out;
}

bool same_law(const ProgenyDistribution& p1, const ProgenyDistribution& p2) {
  if (!std::ranges::equal(p1.support(), p2.support())) return false;
  for (std::size_t i = 0; i < p1.mass().size(); ++i) {
    if (std::abs(p1.mass()[i] - p2.mass()[i]) > kTol) return false;
  }
  return true;
}

}  // namespace

bool weakly_dominates(const ProgenyDistribution& p1, const ProgenyDistribution& p2) {
  for (int t : support_union(p1, p2)) {
    if (p1.cdf(t) > p2.cdf(t) + kTol) return false;
  }
  return true;
}

bool dominates(const ProgenyDistribution& p1, const ProgenyDistribution& p2) {
  return weakly_dominates(p1, p2) && !same_law(p1, p2);
}

MonotoneCoupling::MonotoneCoupling(ProgenyDistribution p1, ProgenyDistribution p2,
                                   std::vector<CouplingPair> pairs)
    : p1_(std::move(p1)), p2_(std::move(p2)), pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw InvalidDistribution("empty coupling table");
  std::map<int, double> m1, m2;
  double total = 0.0;
  for (const auto& pr : pairs_) {
    if (pr.z1 < pr.z2) {
      throw DominanceViolation("coupling pair (" + std::to_string(pr.z1) + "," +
                               std::to_string(pr.z2) + ") has z1 < z2");
    }
    if (!(pr.prob > 0.0)) throw InvalidDistribution("coupling probabilities must be positive");
    m1[pr.z1] += pr.prob;
    m2[pr.z2] += pr.prob;
    total += pr.prob;
    cumulative_.push_back(total);
  }
  if (std::abs(total - 1.0) > kTol) {
    throw InvalidDistribution("coupling probabilities sum to " + std::to_string(total));
  }
  auto check_marginal = [](const std::map<int, double>& m, const ProgenyDistribution& p,
                           const char* which) {
    for (const auto& [v, prob] : m) {
      if (std::abs(prob - p.mass_at(v)) > kTol) {
        throw InvalidDistribution(std::string("coupling marginal ") + which +
                                  " disagrees at " + std::to_string(v));
      }
    }
    for (std::size_t i = 0; i < p.support().size(); ++i) {
      if (!m.contains(p.support()[i])) {
        throw InvalidDistribution(std::string("coupling marginal ") + which +
                                  " misses " + std::to_string(p.support()[i]));
      }
    }
  };
  check_marginal(m1, p1_, "z1");
  check_marginal(m2, p2_, "z2");
  cumulative_.back() = 1.0;
}

MonotoneCoupling MonotoneCoupling::load_csv(const std::filesystem::path& path,
                                            ProgenyDistribution p1, ProgenyDistribution p2) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coupling file " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "z1,z2,prob") {
    throw ConfigError("coupling file must start with header 'z1,z2,prob'");
  }
  std::vector<CouplingPair> pairs;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::string_view sv(line);
    const auto c1 = sv.find(',');
    const auto c2 = sv.find(',', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
      throw ConfigError("malformed coupling row '" + line + "'");
    }
    pairs.push_back({parse_int(sv.substr(0, c1)), parse_int(sv.substr(c1 + 1, c2 - c1 - 1)),
                     parse_double(sv.substr(c2 + 1), "probability")});
  }
  return MonotoneCoupling(std::move(p1), std::move(p2), std::move(pairs));
}

std::pair<int, int> MonotoneCoupling::sample(Stream& rng) const {
  const double u = rng.uniform_open_closed();
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  const auto& pr = pairs_[static_cast<std::size_t>(it - cumulative_.begin())];
  return {pr.z1, pr.z2};
}

MonotoneCoupling quantile_couple(const ProgenyDistribution& p1, const ProgenyDistribution& p2) {
  if (!weakly_dominates(p1, p2)) {
    throw DominanceViolation("first distribution does not dominate the second");
  }
  // Walk the merged CDF breakpoints; each segment (prev, next] carries the
  // pair of quantiles (Q1(u), Q2(u)) constant on it.
  std::vector<CouplingPair> pairs;
  std::size_t i = 0, j = 0;
  double prev = 0.0;
  const auto s1 = p1.support();
  const auto s2 = p2.support();
  std::vector<double> c1, c2;
  for (std::size_t k = 0; k < s1.size(); ++k) c1.push_back(p1.cdf(s1[k]));
  for (std::size_t k = 0; k < s2.size(); ++k) c2.push_back(p2.cdf(s2[k]));
  while (i < s1.size() && j < s2.size()) {
    // Breakpoints closer than the tolerance are the same breakpoint.
    double next = std::min(c1[i], c2[j]);
    const bool adv1 = c1[i] <= next + kTol;
    const bool adv2 = c2[j] <= next + kTol;
    if (adv1 && adv2) next = std::max(c1[i], c2[j]);
    if (next > prev) {
      if (s1[i] < s2[j]) {
        throw DominanceViolation("quantile coupling produced z1 < z2");
      }
      pairs.push_back({s1[i], s2[j], next - prev});
      prev = next;
    }
    if (adv1) ++i;
    if (adv2) ++j;
  }
  return MonotoneCoupling(p1, p2, std::move(pairs));
}

bool ell_fold_check(const ProgenyDistribution& p1, const ProgenyDistribution& p2, int ell) {
  if (ell < 1) throw PreconditionError("ell must be >= 1");
  for (int t : support_union(p1, p2)) {
    const double min_cdf = 1.0 - std::pow(1.0 - p1.cdf(t), ell);
    const double max_cdf = std::pow(p2.cdf(t), ell);
    if (min_cdf > max_cdf + kTol) return false;
  }
  return true;
}

EllFoldCoupling::EllFoldCoupling(ProgenyDistribution p1, ProgenyDistribution p2, int ell)
    : p1_(std::move(p1)), p2_(std::move(p2)), ell_(ell) {
  if (!ell_fold_check(p1_, p2_, ell_)) {
    throw CouplingUnavailable("minimum of " + std::to_string(ell) +
                              " draws does not dominate the maximum");
  }
  for (int v : p1_.support()) min_cdf_.push_back(1.0 - std::pow(1.0 - p1_.cdf(v), ell_));
  for (int v : p2_.support()) max_cdf_.push_back(std::pow(p2_.cdf(v), ell_));
  min_cdf_.back() = 1.0;
  max_cdf_.back() = 1.0;
}

namespace {

int quantile_of(std::span<const int> support, std::span<const double> cdf, double u) {
  auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return support[static_cast<std::size_t>(it - cdf.begin())];
}

// Number of coordinates equal to the extreme value, given at least one is:
// P(j) proportional to C(l,j) a^j b^(l-j), j = 1..l.
int sample_tie_count(int ell, double a, double b, Stream& rng) {
  std::vector<double> w(static_cast<std::size_t>(ell));
  double binom = 1.0, total = 0.0;
  for (int j = 1; j <= ell; ++j) {
    binom = binom * (ell - j + 1) / j;
    w[static_cast<std::size_t>(j - 1)] = binom * std::pow(a, j) * std::pow(b, ell - j);
    total += w[static_cast<std::size_t>(j - 1)];
  }
  double u = rng.uniform_open_closed() * total;
  for (int j = 1; j <= ell; ++j) {
    u -= w[static_cast<std::size_t>(j - 1)];
    if (u <= 0.0) return j;
  }
  return ell;
}

// Chooses `count` of `ell` positions uniformly; returns a mask.
std::vector<char> choose_positions(int ell, int count, Stream& rng) {
  std::vector<int> idx(static_cast<std::size_t>(ell));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<char> mask(static_cast<std::size_t>(ell), 0);
  for (int i = 0; i < count; ++i) {
    const auto r = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(ell - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[r]);
    mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1;
  }
  return mask;
}

}  // namespace

std::vector<int> EllFoldCoupling::conditioned_on_min(int m, Stream& rng) const {
  const double at = p1_.mass_at(m);
  const double lo = p1_.cdf(m);  // P(Z <= m)
  const double above = 1.0 - lo;
  const int ties = sample_tie_count(ell_, at, above, rng);
  auto mask = choose_positions(ell_, ties, rng);
  std::vector<int> out(static_cast<std::size_t>(ell_));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) {
      out[i] = m;
    } else {
      // Z | Z > m by inverse CDF on (lo, 1].
      double u = lo + rng.uniform_open_closed() * above;
      out[i] = std::max(p1_.quantile(u), m + 1);
    }
  }
  return out;
}

std::vector<int> EllFoldCoupling::conditioned_on_max(int m, Stream& rng) const {
  const double at = p2_.mass_at(m);
  const double below = p2_.cdf_below(m);
  const int ties = sample_tie_count(ell_, at, below, rng);
  auto mask = choose_positions(ell_, ties, rng);
  std::vector<int> out(static_cast<std::size_t>(ell_));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) {
      out[i] = m;
    } else {
      // Z | Z < m by inverse CDF on (0, below].
      const double u = rng.uniform_open_closed() * below;
      out[i] = std::min(p2_.quantile(u), m - 1);
    }
  }
  return out;
}

EllFoldDraw EllFoldCoupling::sample(Stream& rng) const {
  const double u = rng.uniform_open_closed();
  const int lo_first = quantile_of(p1_.support(), min_cdf_, u);
  const int hi_second = quantile_of(p2_.support(), max_cdf_, u);
  if (lo_first < hi_second) {
    throw StateCorrupt("l-fold coupling produced min < max");
  }
  return {conditioned_on_min(lo_first, rng), conditioned_on_max(hi_second, rng)};
}

double alpha(const ProgenyDistribution& p) {
  if (p.mean() <= 1.0 + kTol) {
    throw MeanNotSupercritical("mean " + std::to_string(p.mean()) + " is not > 1");
  }
  const double p_one = p.mass_at(1);
  if (p_one == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(p_one) / std::log(p.mean());
}

std::uint64_t generation_k_sample(const ProgenyDistribution& p, int k, Stream& rng,
                                  std::uint64_t cap) {
  if (k < 1) throw PreconditionError("generation index must be >= 1");
  std::uint64_t population = 1;
  for (int gen = 0; gen < k; ++gen) {
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < population; ++i) {
      next += static_cast<std::uint64_t>(p.sample(rng));
      if (next > cap) {
        throw PopulationOverflow("generation " + std::to_string(gen + 1) +
                                 " exceeds the population cap");
      }
    }
    population = next;
  }
  return population;
}

std::pair<std::uint64_t, std::uint64_t> coupled_generation_k_sample(
    const MonotoneCoupling& coupling, int k, Stream& rng, std::uint64_t cap) {
  if (k < 1) throw PreconditionError("generation index must be >= 1");
  std::uint64_t pop1 = 1, pop2 = 1;
  for (int gen = 0; gen < k; ++gen) {
    std::uint64_t next1 = 0, next2 = 0;
    for (std::uint64_t i = 0; i < pop2; ++i) {
      const auto [a, b] = coupling.sample(rng);
      next1 += static_cast<std::uint64_t>(a);
      next2 += static_cast<std::uint64_t>(b);
    }
    for (std::uint64_t i = pop2; i < pop1; ++i) {
      next1 += static_cast<std::uint64_t>(coupling.first().sample(rng));
      if (next1 > cap) break;
    }
    if (next1 > cap) {
      throw PopulationOverflow("generation " + std::to_string(gen + 1) +
                               " exceeds the population cap");
    }
    pop1 = next1;
    pop2 = next2;
  }
  return {pop1, pop2};
}

}  // namespace gwspeed
