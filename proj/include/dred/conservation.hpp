#pragma once

#include <utility>
#include <vector>

#include "dred/expr.hpp"
#include "dred/oracle.hpp"
#include "dred/symmetry.hpp"

namespace dred {

// Zero-test policy for conservation-level claims: more samples than the
// expression-level default.
inline ZeroCheck conservation_check() {
  ZeroCheck opt;
  opt.samples = 20;
  return opt;
}

// A PDE system in solved form: each equation isolates one leading
// derivative atom, lead = rhs, with the rhs free of every lead atom and of
// their derivative extensions.  Reduction modulo the system substitutes
// leads until none remain.
struct PdeSystem {
  ContextPtr ctx;
  std::vector<DerivAtom> leads;
  std::vector<Expr> rhs;        // normalized
  std::vector<Expr> equations;  // lead - rhs, normalized (for reporting)
};

// Builds the solved form from (lead, equation) pairs.  The equation must be
// linear in its lead atom, and the lead coefficient must not itself involve
// the lead; anything else is an UnsupportedError.  Leads must be distinct
// and none may extend another.
PdeSystem make_system(const ContextPtr& ctx,
                      const std::vector<std::pair<DerivAtom, Expr>>& equations);

// Eliminates every lead atom (and extensions) from e by iterated
// substitution; throws UnsupportedError if the rewriting does not reach a
// lead-free form.
Expr reduce_mod_system(const Expr& e, const PdeSystem& sys);

struct DivergenceReport {
  Expr divergence;  // D_i T^i as written, normalized
  Expr reduced;     // modulo the system
  bool conserved = false;
  bool trivial = false;  // every component already vanishes on solutions
};

// Checks D_i T^i = 0 modulo the system; the verdict is the guarded
// symbolic-plus-numeric zero test.  T needs one component per independent
// variable.
DivergenceReport check_divergence(const std::vector<Expr>& T,
                                  const PdeSystem& sys,
                                  const ZeroCheck& opt = conservation_check());

// [T^i, X] = X(T^i) + T^i D_k(xi^k) - T^k D_k(xi^i), normalized.
std::vector<Expr> bracket(const std::vector<Expr>& T, const Generator& X);

struct AssociationResult {
  bool associated = false;
  std::vector<Expr> brackets;          // as written
  std::vector<Expr> reduced_brackets;  // modulo the system
};

// X is associated with T when every bracket component vanishes on
// solutions of the system.
AssociationResult is_associated(const std::vector<Expr>& T, const Generator& X,
                                const PdeSystem& sys,
                                const ZeroCheck& opt = conservation_check());

}  // namespace dred
