#pragma once

#include <vector>

#include "dred/expr.hpp"

namespace dred {

// Exact-until-forced numeric value.  Ring operations stay in rational
// arithmetic; ln and exp promote to double.  The exact path makes the
// randomized zero test sharp: a polynomial expression over sampled jet
// coordinates is zero at a sample iff its value compares equal to zero.
struct NumValue {
  bool exact = true;
  Rational r = Rational(0);
  double d = 0.0;

  double as_double() const { return exact ? r.get_d() : d; }
  bool is_exact_zero() const { return exact && r == 0; }
};

// One evaluation point: values for the independent variables and parameters,
// plus a value for every derivative atom that occurs in the expression.
// Atoms are treated as independent jet coordinates; nothing ties D(u,t) to
// u or f'(u) to f(u), which is exactly what testing ring identities needs.
struct EvalPoint {
  std::vector<Rational> independents;
  std::vector<Rational> parameters;
  std::vector<std::pair<DerivAtom, Rational>> jets;  // sorted by deriv_atom_cmp

  const Rational* find_jet(const DerivAtom& a) const;
  void set_jet(const DerivAtom& a, Rational v);
};

// Evaluates e at p.  Throws SingularPointError when the sample lands in a
// numerically unusable region: a reciprocal base at or near zero, ln of a
// non-positive or tiny argument, or an exp argument large enough to wreck
// the error budget.  Callers redraw the sample.  A missing jet value is a
// SemanticError (the point was built for a different expression).
NumValue eval_numeric(const Expr& e, const ContextPtr& ctx, const EvalPoint& p);

}  // namespace dred
