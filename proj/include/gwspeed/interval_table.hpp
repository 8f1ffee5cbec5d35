#pragma once

// Interval tables that turn one uniform draw into a move of a biased walk.
// Templated on the scalar so the audit can run the same construction in
// exact rational arithmetic.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gwspeed {

/// Where a walk goes: its parent, or the child with a 0-based index.
struct Destination {
  std::int32_t child = -1;

  static constexpr Destination parent() { return {}; }
  static constexpr Destination to_child(std::int32_t i) { return {i}; }
  constexpr bool is_parent() const { return child < 0; }

  friend constexpr bool operator==(Destination, Destination) = default;
};

template <class Real>
struct BasicIntervalEntry {
  Real lo;
  Real hi;
  Destination to;
};

/**
 * Ordered bands covering (0,1]. The first band is closed at 0, the rest are
 * (lo, hi]. Zero-length bands are not stored.
 */
template <class Real>
class BasicIntervalTable {
 public:
  using Entry = BasicIntervalEntry<Real>;

  void append(const Real& lo, const Real& hi, Destination to) {
    if (hi > lo) entries_.push_back({lo, hi, to});
  }

  std::span<const Entry> entries() const { return entries_; }

  /// Band containing u. Values past the last endpoint (rounding residue in
  /// floating point) fall into the last band.
  Destination lookup(const Real& u) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), u,
                               [](const Entry& e, const Real& x) { return e.hi < x; });
    if (it == entries_.end()) --it;
    return it->to;
  }

  /// Total length assigned to a destination.
  Real measure(Destination to) const {
    Real total = 0;
    for (const auto& e : entries_) {
      if (e.to == to) total += e.hi - e.lo;
    }
    return total;
  }

 private:
  std::vector<Entry> entries_;
};

template <class Real>
struct BasicEtas {
  Real eta1, eta2, eta3, eta4, eta5;
};

enum class CouplingCase {
  backward_eta3_ge_eta4,  // Z1 >= Z2, eta3 >= eta4
  backward_eta3_lt_eta4,  // Z1 >= Z2, eta3 < eta4
  first_has_fewer,        // Z1 < Z2: independent single-walk tables
};

const char* to_string(CouplingCase c);

template <class Real>
struct BasicTablePair {
  BasicIntervalTable<Real> first;
  BasicIntervalTable<Real> second;
  CouplingCase kind;
};

struct TableOptions {
  /// Child k of the band sequence is x_{Z+1-k} as in the published
  /// construction; when false, band k maps to child k. Both give the same law.
  bool literal_child_order = true;
};

/// Backbone back-step probability 1/(d*beta+1).
template <class Real>
Real backbone_threshold(const Real& beta, int d) {
  return Real(1) / (Real(d) * beta + Real(1));
}

/// Parent probability 1/(Z*beta+1) of the single-walk law.
template <class Real>
Real parent_probability(int z, const Real& beta) {
  return Real(1) / (Real(z) * beta + Real(1));
}

template <class Real>
BasicEtas<Real> compute_etas(int z1, int z2, const Real& beta, int d = 1) {
  const Real a = backbone_threshold(beta, d);
  const Real up = Real(1) - a;  // = d*beta/(d*beta+1)
  BasicEtas<Real> e;
  e.eta1 = up / Real(z1);
  e.eta2 = up * (Real(1) / Real(z2) - Real(1) / Real(z1));
  e.eta3 = (a - parent_probability(z2, beta)) / Real(z2);
  e.eta4 = (a - parent_probability(z1, beta)) / Real(z1);
  e.eta5 = e.eta3 >= e.eta4 ? Real(e.eta3 - e.eta4) : Real(e.eta4 - e.eta3);
  return e;
}

/// Single-walk law. Non-root: parent band [0, 1/(Z beta+1)], then child j in
/// natural order with length beta/(Z beta+1). Root: Z bands of 1/Z.
template <class Real>
BasicIntervalTable<Real> single_walk_table(int z, const Real& beta, bool at_root) {
  BasicIntervalTable<Real> t;
  if (at_root) {
    for (int j = 1; j <= z; ++j) {
      t.append(Real(j - 1) / Real(z), Real(j) / Real(z), Destination::to_child(j - 1));
    }
    return t;
  }
  const Real p = parent_probability(z, beta);
  const Real band = beta / (Real(z) * beta + Real(1));
  t.append(Real(0), p, Destination::parent());
  for (int j = 1; j <= z; ++j) {
    t.append(p + Real(j - 1) * band, p + Real(j) * band, Destination::to_child(j - 1));
  }
  return t;
}

/**
 * The three-walk coupling tables for offspring counts (z1, z2).
 *
 * With a = 1/(d beta + 1): the forward region (a, 1] sends both walks to
 * children; the backward region [0, a] sends each walk to its parent on
 * [0, 1/(Z_i beta + 1)] and splits the rest by the eta3 >= eta4 or
 * eta3 < eta4 sub-case. When z1 < z2 each walk uses its own single-walk
 * table. Every band endpoint is computed as start + i*eta, exactly as the
 * construction is written, so the audit sees the true arithmetic residue.
 */
template <class Real>
BasicTablePair<Real> coupled_tables_from_etas(int z1, int z2, const Real& beta, int d,
                                              const BasicEtas<Real>& eta,
                                              TableOptions opts = {}) {
  BasicTablePair<Real> out;
  if (z1 < z2) {
    out.first = single_walk_table(z1, beta, false);
    out.second = single_walk_table(z2, beta, false);
    out.kind = CouplingCase::first_has_fewer;
    return out;
  }
  // i is 1-based band order; returns 0-based child index.
  auto child = [&](int z, int i) {
    return Destination::to_child(opts.literal_child_order ? z - i : i - 1);
  };
  const Real a = backbone_threshold(beta, d);
  const Real p1 = parent_probability(z1, beta);
  const Real p2 = parent_probability(z2, beta);
  auto& t1 = out.first;
  auto& t2 = out.second;

  if (eta.eta3 >= eta.eta4) {
    out.kind = CouplingCase::backward_eta3_ge_eta4;
    t1.append(Real(0), p1, Destination::parent());
    for (int i = 1; i <= z1; ++i) {
      t1.append(p1 + Real(i - 1) * eta.eta4, p1 + Real(i) * eta.eta4, child(z1, i));
    }
    t2.append(Real(0), p2, Destination::parent());
    for (int i = 1; i <= z2; ++i) {
      t2.append(p2 + Real(i - 1) * eta.eta5, p2 + Real(i) * eta.eta5, child(z2, i));
    }
    const Real s = p2 + Real(z2) * eta.eta5;
    for (int i = 1; i <= z2; ++i) {
      t2.append(s + Real(i - 1) * eta.eta4, s + Real(i) * eta.eta4, child(z2, i));
    }
  } else {
    out.kind = CouplingCase::backward_eta3_lt_eta4;
    t1.append(Real(0), p1, Destination::parent());
    for (int i = 1; i <= z1 - z2; ++i) {
      t1.append(p1 + Real(i - 1) * eta.eta4, p1 + Real(i) * eta.eta4, child(z1, i));
    }
    const Real s = p1 + Real(z1 - z2) * eta.eta4;
    for (int i = 1; i <= z2; ++i) {
      t1.append(s + Real(i - 1) * eta.eta5, s + Real(i) * eta.eta5, child(z2, i));
    }
    for (int i = 1; i <= z2; ++i) {
      t1.append(p2 + Real(i - 1) * eta.eta3, p2 + Real(i) * eta.eta3, child(z2, i));
    }
    t2.append(Real(0), p2, Destination::parent());
    for (int i = 1; i <= z2; ++i) {
      t2.append(p2 + Real(i - 1) * eta.eta3, p2 + Real(i) * eta.eta3, child(z2, i));
    }
  }

  for (int i = 1; i <= z1; ++i) {
    t1.append(a + Real(i - 1) * eta.eta1, a + Real(i) * eta.eta1, child(z1, i));
  }
  for (int i = 1; i <= z2; ++i) {
    t2.append(a + Real(i - 1) * eta.eta2, a + Real(i) * eta.eta2, child(z2, i));
  }
  const Real s = a + Real(z2) * eta.eta2;
  for (int i = 1; i <= z2; ++i) {
    t2.append(s + Real(i - 1) * eta.eta1, s + Real(i) * eta.eta1, child(z2, i));
  }
  return out;
}

template <class Real>
BasicTablePair<Real> coupled_tables(int z1, int z2, const Real& beta, int d = 1,
                                    TableOptions opts = {}) {
  return coupled_tables_from_etas(z1, z2, beta, d, compute_etas(z1, z2, beta, d), opts);
}

using IntervalTable = BasicIntervalTable<double>;
using TablePair = BasicTablePair<double>;
using Etas = BasicEtas<double>;

}  // namespace gwspeed
