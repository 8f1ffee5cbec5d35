#pragma once

// Exact rational helpers shared by the table audit and the threshold sums.

#include <boost/multiprecision/cpp_int.hpp>

#include <string_view>

namespace gwspeed::detail {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "p/q", an integer, or a plain decimal such as "5.76" exactly.
Rational parse_rational(std::string_view text);

/// Exact value of a double (every finite double is a dyadic rational).
Rational exact(double x);

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace gwspeed::detail
