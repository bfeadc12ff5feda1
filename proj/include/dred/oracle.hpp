#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dred/eval.hpp"

namespace dred {

// Policy for the randomized half of the zero test.
struct ZeroCheck {
  int samples = 5;                // usable samples required
  std::uint64_t seed = 0xd5eed;   // fixed by default so runs are reproducible
  double tol = 1e-9;              // |value| at or below this is zero-like
  int max_attempts = 400;         // draw budget before giving up
};

// A value with magnitude in [1/4, 2] and a denominator no larger than 8:
// big enough to stay clear of singular guards, small enough that floating
// subexpressions stay well conditioned.
Rational random_sample_value(std::mt19937_64& rng);

// Builds a point covering every independent variable and parameter of the
// context and every derivative atom occurring in exprs.  Each atom gets an
// independent value: for deciding ring identities the jet coordinates are
// free variables, and independent draws have no blind spots at high
// derivative orders.
EvalPoint random_point(const std::vector<Expr>& exprs, const ContextPtr& ctx,
                       std::mt19937_64& rng);

// Decides whether e is identically zero.  The symbolic normal form gives the
// verdict; random evaluation must agree with it, and a disagreement is
// always a hard ZeroGuardError, never a silently adjusted answer.  Samples
// that hit singular regions are redrawn; running out of draws raises
// InconclusiveError rather than passing by default.
bool guarded_zero(const Expr& e, const ContextPtr& ctx, const ZeroCheck& opt = {});

// guarded_zero(a - b).
bool guarded_equal(const Expr& a, const Expr& b, const ContextPtr& ctx,
                   const ZeroCheck& opt = {});

}  // namespace dred
