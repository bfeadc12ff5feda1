#pragma once

#include <vector>

#include "dred/expr.hpp"

namespace dred {

// Point-symmetry generator: one coefficient per independent variable (xi)
// and one per dependent variable (eta).  Coefficients may involve the
// variables themselves but never derivatives; the action on derivative
// atoms comes from prolongation.
struct Generator {
  ContextPtr ctx;
  std::vector<Expr> xi;
  std::vector<Expr> eta;
};

// Checks the shape invariants; throws SemanticError or UnsupportedError.
void validate_generator(const Generator& X);

// W^a = eta^a - xi^j u^a_j, normalized, one entry per dependent variable.
std::vector<Expr> characteristics(const Generator& X);

// The prolonged coefficient acting on one derivative atom u^a_J:
//   zeta^a_J = D_J(W^a) + xi^j u^a_{J,j}
// For an empty multi-index this is just eta^a.  Normalized.
Expr prolongation_coefficient(const Generator& X, const DerivAtom& atom);

// Applies the prolonged generator to an expression (to whatever derivative
// order the expression actually contains) and normalizes.
Expr apply_generator(const Generator& X, const Expr& e);

// Pointwise linear combination over a shared context.  Coefficient
// expressions are typically constants or parameters.
Generator combine(const std::vector<Generator>& gens,
                  const std::vector<Expr>& coeffs);

}  // namespace dred
