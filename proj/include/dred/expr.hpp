#pragma once

#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "dred/context.hpp"
#include "dred/rational.hpp"

namespace dred {

// A derivative atom is one jet-space coordinate:
//   - dependent base: u, D(u,t), D(u,t,x), ... with a sorted multi-index
//     over independent-variable indices (empty = the function itself);
//   - function base: f(u), f'(u), f''(u), ... with a formal prime order
//     (the multi-index stays empty; spatial derivatives of f(u) expand
//     through the chain rule instead of being stored).
struct DerivAtom {
  SymbolKind base_kind = SymbolKind::Dependent;  // Dependent or Function
  int base = 0;
  std::vector<int> multi_index;  // sorted ascending
  int prime_order = 0;           // function bases only

  bool operator==(const DerivAtom& o) const {
    return base_kind == o.base_kind && base == o.base &&
           multi_index == o.multi_index && prime_order == o.prime_order;
  }
};

int deriv_atom_cmp(const DerivAtom& a, const DerivAtom& b);

struct ExprNode;

// Immutable expression handle.  Subtrees are shared; no operation mutates
// an existing node, so expressions are safe to share across threads.
class Expr {
 public:
  Expr();  // 0

  static Expr constant(Rational v);
  static Expr constant(long v) { return constant(Rational(v)); }
  static Expr symbol(SymbolKind kind, int index);
  static Expr atom(DerivAtom a);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr power(Expr base, long exponent);
  static Expr ln(Expr arg);
  static Expr exp(Expr arg);
  static Expr neg(Expr arg);

  const ExprNode& node() const { return *node_; }

  bool is_constant() const;
  bool is_literal_zero() const;  // constant node 0 (use normalize for deep test)
  const Rational& constant_value() const;

  bool operator==(const Expr& o) const;
  bool operator!=(const Expr& o) const { return !(*this == o); }

 protected:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const ExprNode> node_;
};

struct ConstantNode {
  Rational value;
};
struct SymbolNode {  // independent variable or parameter
  SymbolKind kind;
  int index;
};
struct DerivNode {
  DerivAtom atom;
};
struct SumNode {
  std::vector<Expr> terms;
};
struct ProductNode {
  std::vector<Expr> factors;
};
struct PowerNode {
  Expr base;
  long exponent;
};
struct LnNode {
  Expr arg;
};
struct ExpNode {
  Expr arg;
};
struct NegNode {
  Expr arg;
};

struct ExprNode {
  std::variant<ConstantNode, SymbolNode, DerivNode, SumNode, ProductNode,
               PowerNode, LnNode, ExpNode, NegNode>
      v;
};

template <class T>
const T* node_as(const Expr& e) {
  return std::get_if<T>(&e.node().v);
}

// Arithmetic conveniences (build raw trees; use normalize() to simplify).
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// Total structural order; 0 iff structurally identical.
int expr_cmp(const Expr& a, const Expr& b);

// ---- queries --------------------------------------------------------------

// Calls fn for every symbol / derivative-atom occurrence, including inside
// ln/exp arguments and power bases.  Exactly one pointer is non-null per call.
void visit_atoms(const Expr& e,
                 const std::function<void(const SymbolNode*, const DerivAtom*)>& fn);

bool contains_symbol(const Expr& e, SymbolKind kind, int index);
bool contains_dependent_atoms(const Expr& e);

// True if e contains the atom itself or any derivative extension of it
// (same base; multi-index a multiset superset / prime order >=).
bool contains_atom_or_extension(const Expr& e, const DerivAtom& a);

// Highest derivative-atom order (|multi_index| or prime order) in e.
int max_derivative_order(const Expr& e);

// ---- derivations ------------------------------------------------------------

// A derivation is determined by its action on the jet coordinates; sums,
// products, powers, ln and exp extend it by linearity, the Leibniz rule and
// the chain rule.  The total derivative and a prolonged generator are both
// instances.
struct DerivationAction {
  // derivative of an independent-variable / parameter symbol
  std::function<Expr(const SymbolNode&)> on_symbol;
  // derivative of a dependent-base derivative atom
  std::function<Expr(const DerivAtom&)> on_dependent;
  // full derivative of a function-base atom (chain rule already applied)
  std::function<Expr(const DerivAtom&)> on_function;
};

Expr derive(const Expr& e, const DerivationAction& action);

// Total derivative along one independent variable (raw tree; callers
// normalize the final result once).
Expr total_derivative_raw(const Expr& e, const ContextPtr& ctx, int indep);

// Normalized repeated total derivative.
Expr total_derivative(const Expr& e, const ContextPtr& ctx,
                      const std::vector<int>& indeps);

// Jet-space partial derivative with respect to one coordinate (independent
// symbol, parameter, or derivative atom).  Distinct jet coordinates are
// independent; f^(p)(u) depends on the coordinate u through the chain rule.
Expr partial_by_symbol(const Expr& e, SymbolKind kind, int index);
Expr partial_by_atom(const Expr& e, const ContextPtr& ctx, const DerivAtom& a);

// ---- substitution -----------------------------------------------------------

// Simultaneous structural substitution.  Keys must be symbols or derivative
// atoms.  When a dependent-base key u_J is bound and e contains an extension
// u_{J+K}, the replacement is D_K applied to the bound value.  When several
// keys match an atom, the longest key multi-index wins (ties: smallest
// lexicographically).  Function-base keys match exactly.
//
// The occurs-check rejects a binding whose value contains its own key or an
// extension of it, since iterating such a binding cannot terminate.
struct Binding {
  Expr key;  // SymbolNode or DerivNode expression
  Expr value;
};

Expr substitute(const Expr& e, const ContextPtr& ctx,
                const std::vector<Binding>& bindings);

// Rebuilds e against another context, mapping every symbol by name.
// Errors if a name is missing or changed kind.
Expr migrate(const Expr& e, const ContextPtr& from, const ContextPtr& to);

// ---- normal form -------------------------------------------------------------

// Rewrites e as an expanded sum of monomials with rational coefficients over
// a fixed total order of atoms.  Within the supported class (symbols,
// derivative atoms, ln, exp and integer powers thereof) the result is a
// unique canonical form, so structural equality decides expression equality.
// Reciprocals of non-monomial bases are kept as opaque atoms with their
// rational content extracted.
Expr normalize(const Expr& e);

// Divides out the common monomial factor (including rational content) of all
// terms: 2*x*y + 4*x^2 -> y + 2*x.  Zero stays zero.
Expr strip_content(const Expr& e);

// normalize(e) == 0.  Symbolic half of the zero test; callers needing the
// randomized numeric guard use oracle::guarded_zero.
bool is_zero_normal(const Expr& e);

}  // namespace dred
