#pragma once

#include <gmpxx.h>

#include <string>

#include "dred/error.hpp"

namespace dred {

// Exact rational scalar.  GMP keeps the integers arbitrary precision so
// repeated normalization never overflows or rounds.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  if (den == 0) throw Error("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline bool rat_is_integer(const Rational& q) {
  return q.get_den() == 1;
}

// Exact integer power; negative exponents invert (error on zero base).
inline Rational rat_pow(const Rational& base, long exp) {
  if (exp == 0) return Rational(1);
  if (base == 0 && exp < 0) throw Error("zero raised to a negative power");
  Rational b = base;
  long e = exp;
  if (e < 0) {
    b = Rational(1) / b;
    e = -e;
  }
  Rational out(1);
  while (e > 0) {
    if (e & 1) out *= b;
    b *= b;
    e >>= 1;
  }
  out.canonicalize();
  return out;
}

inline std::string rat_to_string(const Rational& q) {
  return q.get_str();
}

// Three-way comparison usable inside lexicographic chains.
inline int rat_cmp(const Rational& a, const Rational& b) {
  return cmp(a, b);
}

}  // namespace dred
