#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dred/exprmat.hpp"
#include "dred/oracle.hpp"
#include "dred/symmetry.hpp"

namespace dred {

// Similarity variables of one generator: the invariants survive a
// reduction, and the canonical variable q straightens X into d/dq.
// All defining expressions live in the source context; the inverse maps
// live in the target context.
struct CanonicalResult {
  ContextPtr from;
  ContextPtr to;  // invariants first (same order), canonical variable last
  std::vector<std::pair<std::string, Expr>> invariants;
  std::pair<std::string, Expr> canonical_var;
  std::vector<std::pair<std::string, Expr>> dependents;  // new name, old expr
  // Closed-form inverse maps, one entry per old variable.
  // canonical_coordinates always fills these; hand-built results may leave
  // them empty when the forward maps are affine (build_change inverts those
  // itself) and must supply them otherwise.
  std::vector<Expr> inverse_independents;
  std::vector<Expr> inverse_dependents;
};

struct CanonicalOptions {
  int stage = 1;                  // variable name pool: r,s,q,w then n,m,v
  bool invariant_profile = true;  // new dependents depend on invariants only
};

// Straightening coordinates for a generator made of translations and
// scalings (each xi^j either free of the variables or a multiple of its own
// x^j, and eta^a likewise).  Invariants are listed in reverse declaration
// order, skipping the pivot (the first variable with nonzero xi), which
// becomes the canonical variable.  X annihilates every invariant and maps
// the canonical variable to 1; both facts are checked before returning.
// Generators outside this class raise UnsupportedError naming the offending
// coefficient.
CanonicalResult canonical_coordinates(const Generator& X,
                                      const CanonicalOptions& opt = {});

// A validated point change of variables with its chain-rule data:
//   A[i][k]     = derivative of old x_k along new variable i,
//   A_inv[i][k] = derivative of new variable k along old x_i, rewritten in
//                 the new variables,
//   J           = det(A).
// Row order follows the new context in A, the old context in A_inv.
struct CoordinateChange {
  ContextPtr from;
  ContextPtr to;
  std::vector<std::pair<std::string, Expr>> new_independents;
  std::vector<std::pair<std::string, Expr>> new_dependents;
  std::vector<Expr> old_independents;  // inverse maps, new-context exprs
  std::vector<Expr> old_dependents;
  ExprMat A;
  ExprMat A_inv;
  Expr J;
};

// Completes a CanonicalResult into a usable change: synthesizes affine
// inverses when none are given, confirms both round trips numerically,
// builds A_inv entrywise by total differentiation, inverts it through the
// adjugate to get A, and rejects a zero Jacobian (ChangeError).
CoordinateChange build_change(const CanonicalResult& cr, const ContextPtr& ctx,
                              const ZeroCheck& opt = {});

// Rewrites an expression of the old context in the new variables.
// Derivative atoms go through the chain rule D_old = A_inv * D_new applied
// recursively; arbitrary functions migrate by name, which requires their
// argument's inverse map to be a bare new dependent.
Expr rewrite(const CoordinateChange& ch, const Expr& e);

// Image of a derivative-free expression under explicit maps: independent
// symbols and bare dependent atoms are replaced positionally, parameters
// through param_map.  Normalized.
Expr point_substitute(const Expr& e, const std::vector<Expr>& independents,
                      const std::vector<Expr>& dependents,
                      const std::vector<int>& param_map);

// Transported conserved vector: J * A_inv^T * T, componentwise in the new
// variables.  Satisfies J * div(T) = div~(T~) identically.
std::vector<Expr> transform_conserved(const std::vector<Expr>& T,
                                      const CoordinateChange& ch);

// Same vector computed the other way: component i is the determinant of A
// with row i replaced by the rewritten components of T.  Kept as an
// independent cross-check of transform_conserved.
std::vector<Expr> transform_conserved_rowrep(const std::vector<Expr>& T,
                                             const CoordinateChange& ch);

// Transport of the association bracket: J * A_inv^T * [T, X] rewritten in
// the new variables.  Equals the prolonged action of the transformed X on
// the transformed components; zero exactly when the reduction carries the
// conservation law over.
std::vector<Expr> transformed_bracket(const std::vector<Expr>& T,
                                      const Generator& X,
                                      const CoordinateChange& ch);

// Push-forward of a point generator: xi~^j = Y(new var j), eta~^a =
// Y(new dependent a), both rewritten in the new variables.
Generator transform_generator(const Generator& Y, const CoordinateChange& ch);

// Restriction of a generator to a context that keeps a subset of its
// independents (matched by name).  Components of kept variables must be
// free of the dropped ones; otherwise the generator does not descend and a
// ChangeError explains which component blocks it.
Generator project_generator(const Generator& Y, const ContextPtr& sub);

}  // namespace dred
