#include <cmath>
#include <sstream>
#include <string>

#include "gwspeed/coupled_walk.hpp"
#include "gwspeed/errors.hpp"
#include "rational.hpp"

namespace gwspeed {

namespace detail {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  const auto trim = [](std::string& v) {
    const auto b = v.find_first_not_of(" \t");
    const auto e = v.find_last_not_of(" \t");
    v = b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
  };
  trim(s);
  if (s.empty()) throw ConfigError("empty rational");
  try {
    if (const auto slash = s.find('/'); slash != std::string::npos) {
      std::string num = s.substr(0, slash), den = s.substr(slash + 1);
      trim(num);
      trim(den);
      BigInt q(den);
      if (q == 0) throw ConfigError("zero denominator in '" + s + "'");
      return Rational(parse_rational(num)) / Rational(q);
    }
    bool negative = false;
    std::string body = s;
    if (body[0] == '-' || body[0] == '+') {
      negative = body[0] == '-';
      body = body.substr(1);
    }
    const auto dot = body.find('.');
    std::string digits = body;
    std::size_t frac = 0;
    if (dot != std::string::npos) {
      frac = body.size() - dot - 1;
      digits = body.substr(0, dot) + body.substr(dot + 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("not a rational number: '" + s + "'");
    }
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac; ++i) scale *= 10;
    Rational r(BigInt(digits), scale);
    return negative ? Rational(-r) : r;
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    throw ConfigError("not a rational number: '" + s + "'");
  }
}

Rational exact(double x) { return Rational(x); }

}  // namespace detail

namespace {

template <class Real>
Real abs_diff(const Real& a, const Real& b) {
  return a > b ? Real(a - b) : Real(b - a);
}

double as_double(double x) { return x; }
double as_double(const detail::Rational& x) { return detail::to_double(x); }

struct TableErrors {
  double tiling = 0.0;
  double marginal = 0.0;
  bool forward_parent = false;
};

// Tiling gap, marginal error and forward-lockstep violation of one table
// against the single-walk law with z children.
template <class Real>
TableErrors check_table(const BasicIntervalTable<Real>& t, int z, const Real& beta,
                        const Real& a) {
  TableErrors out;
  const auto entries = t.entries();
  if (entries.empty()) {
    out.tiling = 1.0;
    return out;
  }
  Real worst_tiling = abs_diff(entries.front().lo, Real(0));
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const Real g = abs_diff(entries[i].lo, entries[i - 1].hi);
    if (g > worst_tiling) worst_tiling = g;
  }
  const Real tail = abs_diff(entries.back().hi, Real(1));
  if (tail > worst_tiling) worst_tiling = tail;
  out.tiling = as_double(worst_tiling);

  Real worst_marginal = abs_diff(t.measure(Destination::parent()), parent_probability(z, beta));
  const Real child_mass = beta / (Real(z) * beta + Real(1));
  for (int j = 0; j < z; ++j) {
    const Real e = abs_diff(t.measure(Destination::to_child(j)), child_mass);
    if (e > worst_marginal) worst_marginal = e;
  }
  out.marginal = as_double(worst_marginal);

  for (const auto& e : entries) {
    if (e.to.is_parent() && e.hi > a) out.forward_parent = true;
  }
  return out;
}

void tally(AuditReport& r, CouplingCase c) {
  switch (c) {
    case CouplingCase::backward_eta3_ge_eta4:
      ++r.eta3_ge_eta4;
      break;
    case CouplingCase::backward_eta3_lt_eta4:
      ++r.eta3_lt_eta4;
      break;
    case CouplingCase::first_has_fewer:
      ++r.first_has_fewer;
      break;
  }
}

template <class Real>
void check_pair(AuditReport& report, const BasicTablePair<Real>& tp, int z1, int z2,
                const Real& beta, const std::string& beta_text, int d, double tol) {
  const Real a = backbone_threshold(beta, d);
  const TableErrors e1 = check_table(tp.first, z1, beta, a);
  const TableErrors e2 = check_table(tp.second, z2, beta, a);
  tally(report, tp.kind);
  ++report.pairs_checked;
  const double tiling = std::max(e1.tiling, e2.tiling);
  const double marginal = std::max(e1.marginal, e2.marginal);
  report.max_tiling_gap = std::max(report.max_tiling_gap, tiling);
  report.max_marginal_error = std::max(report.max_marginal_error, marginal);
  const bool bad = report.exact ? (tiling != 0.0 || marginal != 0.0) : (tiling > tol || marginal > tol);
  if (bad || e1.forward_parent || e2.forward_parent) {
    std::ostringstream os;
    os.precision(17);
    os << "z1=" << z1 << " z2=" << z2 << " beta=" << beta_text << " case=" << to_string(tp.kind)
       << " tiling_gap=" << tiling << " marginal_error=" << marginal
       << (e1.forward_parent || e2.forward_parent ? " parent band above 1/(d*beta+1)" : "");
    throw AuditFailure(os.str());
  }
}

}  // namespace

AuditReport audit_tables(int zmax, std::span<const double> betas, double tol, int d,
                         const TableBuilder& builder) {
  if (zmax < 1) throw PreconditionError("zmax must be >= 1");
  if (d < 1) throw PreconditionError("d must be >= 1");
  AuditReport report;
  report.zmax = zmax;
  report.beta_count = betas.size();
  for (const double beta : betas) {
    if (!(beta > 1.0)) throw PreconditionError("audit betas must be > 1");
    std::ostringstream bt;
    bt.precision(17);
    bt << beta;
    for (int z1 = d; z1 <= zmax; ++z1) {
      for (int z2 = d; z2 <= zmax; ++z2) {
        const TablePair tp = builder ? builder(z1, z2, beta, d) : coupled_tables(z1, z2, beta, d);
        check_pair(report, tp, z1, z2, beta, bt.str(), d, tol);
      }
    }
  }
  return report;
}

AuditReport audit_tables_exact(int zmax, std::span<const std::string> betas, int d) {
  using detail::Rational;
  if (zmax < 1) throw PreconditionError("zmax must be >= 1");
  if (d < 1) throw PreconditionError("d must be >= 1");
  AuditReport report;
  report.zmax = zmax;
  report.beta_count = betas.size();
  report.exact = true;
  for (const auto& text : betas) {
    const Rational beta = detail::parse_rational(text);
    if (!(beta > 1)) throw PreconditionError("audit betas must be > 1");
    for (int z1 = d; z1 <= zmax; ++z1) {
      for (int z2 = d; z2 <= zmax; ++z2) {
        const auto tp = coupled_tables<Rational>(z1, z2, beta, d);
        check_pair<Rational>(report, tp, z1, z2, beta, text, d, 0.0);
      }
    }
  }
  return report;
}

}  // namespace gwspeed
