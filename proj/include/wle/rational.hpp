#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "wle/error.hpp"

namespace wle {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Tolerance applied only where an exact rational is compared against a
/// transcendental value such as ln n.
inline constexpr double kLnTolerance = 1e-12;

inline std::string to_fraction_string(const Rational& q) {
  return boost::multiprecision::numerator(q).str() + "/" +
         boost::multiprecision::denominator(q).str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// 17 significant digits, enough to round-trip a double.
inline std::string to_decimal_string(const Rational& q) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", to_double(q));
  return buf;
}

inline std::string to_decimal_string(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Accepts "p/q" or a plain integer.
inline Rational parse_rational(std::string_view text) {
  auto parse_int = [&](std::string_view s) -> BigInt {
    if (s.empty()) throw Error(ErrorCode::InvalidArgument, "empty rational component");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw Error(ErrorCode::InvalidArgument, "bad rational: " + std::string(text));
    for (std::size_t k = i; k < s.size(); ++k)
      if (s[k] < '0' || s[k] > '9')
        throw Error(ErrorCode::InvalidArgument, "bad rational: " + std::string(text));
    return BigInt(std::string(s));
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  BigInt den = parse_int(text.substr(slash + 1));
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator: " + std::string(text));
  return Rational(parse_int(text.substr(0, slash)), den);
}

/// Exact check of 2^exponent >= bound.
inline bool pow2_at_least(unsigned exponent, const BigInt& bound) {
  return (BigInt(1) << exponent) >= bound;
}

}  // namespace wle
