#include "dred/eval.hpp"

#include <algorithm>
#include <cmath>

#include "dred/error.hpp"

namespace dred {

namespace {

// Conditioning limits.  Samples are drawn with magnitudes of order one, so
// anything outside these windows signals a bad draw rather than real data.
constexpr double kMinReciprocalBase = 1e-3;
constexpr double kMinLnArg = 1e-3;
constexpr double kMaxExpArg = 8.0;

bool jet_less(const std::pair<DerivAtom, Rational>& a, const DerivAtom& b) {
  return deriv_atom_cmp(a.first, b) < 0;
}

NumValue exact(Rational v) { return NumValue{true, std::move(v), 0.0}; }

NumValue inexact(double v) {
  if (!std::isfinite(v)) throw SingularPointError("non-finite value");
  return NumValue{false, Rational(0), v};
}

NumValue nv_add(const NumValue& a, const NumValue& b) {
  if (a.exact && b.exact) return exact(a.r + b.r);
  return inexact(a.as_double() + b.as_double());
}

NumValue nv_mul(const NumValue& a, const NumValue& b) {
  if (a.exact && b.exact) return exact(a.r * b.r);
  return inexact(a.as_double() * b.as_double());
}

NumValue nv_neg(const NumValue& a) {
  if (a.exact) return exact(-a.r);
  return inexact(-a.d);
}

NumValue nv_pow(const NumValue& a, long k) {
  if (a.exact) {
    if (k < 0 && a.r == 0) throw SingularPointError("reciprocal of zero");
    return exact(rat_pow(a.r, k));
  }
  if (k < 0 && std::abs(a.d) < kMinReciprocalBase)
    throw SingularPointError("reciprocal base too close to zero");
  return inexact(std::pow(a.d, static_cast<double>(k)));
}

NumValue nv_ln(const NumValue& a) {
  const double v = a.as_double();
  if (v < kMinLnArg) throw SingularPointError("ln argument too small");
  return inexact(std::log(v));
}

NumValue nv_exp(const NumValue& a) {
  const double v = a.as_double();
  if (std::abs(v) > kMaxExpArg) throw SingularPointError("exp argument too large");
  return inexact(std::exp(v));
}

}  // namespace

const Rational* EvalPoint::find_jet(const DerivAtom& a) const {
  auto it = std::lower_bound(jets.begin(), jets.end(), a, jet_less);
  if (it != jets.end() && deriv_atom_cmp(it->first, a) == 0) return &it->second;
  return nullptr;
}

void EvalPoint::set_jet(const DerivAtom& a, Rational v) {
  auto it = std::lower_bound(jets.begin(), jets.end(), a, jet_less);
  if (it != jets.end() && deriv_atom_cmp(it->first, a) == 0) {
    it->second = std::move(v);
  } else {
    jets.insert(it, {a, std::move(v)});
  }
}

NumValue eval_numeric(const Expr& e, const ContextPtr& ctx, const EvalPoint& p) {
  return std::visit(
      [&](const auto& n) -> NumValue {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          return exact(n.value);
        } else if constexpr (std::is_same_v<T, SymbolNode>) {
          const auto& pool = n.kind == SymbolKind::Independent ? p.independents
                                                               : p.parameters;
          if (n.index < 0 || n.index >= static_cast<int>(pool.size()))
            throw SemanticError("evaluation point has no value for '" +
                                ctx->name_of(n.kind, n.index) + "'");
          return exact(pool[n.index]);
        } else if constexpr (std::is_same_v<T, DerivNode>) {
          const Rational* v = p.find_jet(n.atom);
          if (!v)
            throw SemanticError("evaluation point has no value for an atom of '" +
                                ctx->name_of(n.atom.base_kind, n.atom.base) + "'");
          return exact(*v);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          NumValue acc = exact(Rational(0));
          for (const auto& t : n.terms) acc = nv_add(acc, eval_numeric(t, ctx, p));
          return acc;
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          NumValue acc = exact(Rational(1));
          for (const auto& f : n.factors) acc = nv_mul(acc, eval_numeric(f, ctx, p));
          return acc;
        } else if constexpr (std::is_same_v<T, PowerNode>) {
          return nv_pow(eval_numeric(n.base, ctx, p), n.exponent);
        } else if constexpr (std::is_same_v<T, LnNode>) {
          return nv_ln(eval_numeric(n.arg, ctx, p));
        } else if constexpr (std::is_same_v<T, ExpNode>) {
          return nv_exp(eval_numeric(n.arg, ctx, p));
        } else {
          static_assert(std::is_same_v<T, NegNode>);
          return nv_neg(eval_numeric(n.arg, ctx, p));
        }
      },
      e.node().v);
}

}  // namespace dred
