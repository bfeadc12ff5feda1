#include "dred/conservation.hpp"

#include <string>

#include "dred/error.hpp"
#include "dred/printer.hpp"

namespace dred {

namespace {

constexpr int kMaxReductionPasses = 50;

// a is b or a derivative extension of b (same base, multi-index superset).
bool extends(const DerivAtom& a, const DerivAtom& b) {
  if (a.base_kind != b.base_kind || a.base != b.base) return false;
  if (a.base_kind == SymbolKind::Function) return a.prime_order >= b.prime_order;
  std::size_t i = 0;
  for (int v : a.multi_index) {
    if (i < b.multi_index.size() && v == b.multi_index[i]) ++i;
  }
  return i == b.multi_index.size();
}

bool contains_any_lead(const Expr& e, const PdeSystem& sys) {
  bool found = false;
  visit_atoms(e, [&](const SymbolNode*, const DerivAtom* a) {
    if (!a || found) return;
    for (const auto& lead : sys.leads)
      if (extends(*a, lead)) {
        found = true;
        return;
      }
  });
  return found;
}

}  // namespace

PdeSystem make_system(const ContextPtr& ctx,
                      const std::vector<std::pair<DerivAtom, Expr>>& equations) {
  if (equations.empty()) throw SemanticError("a system needs at least one equation");
  PdeSystem sys;
  sys.ctx = ctx;
  for (const auto& [lead, eq] : equations) {
    if (lead.base_kind != SymbolKind::Dependent || lead.multi_index.empty())
      throw SemanticError("a lead must be a derivative of a dependent variable");
    for (const auto& other : sys.leads)
      if (extends(lead, other) || extends(other, lead))
        throw SemanticError("leads must not extend one another");

    const Expr coeff = normalize(partial_by_atom(eq, ctx, lead));
    if (is_zero_normal(coeff))
      throw SemanticError("equation does not contain its lead derivative");
    if (contains_atom_or_extension(coeff, lead))
      throw UnsupportedError("equation is nonlinear in its lead derivative");
    const Expr rest =
        normalize(eq - coeff * Expr::atom(DerivAtom(lead)));
    if (contains_atom_or_extension(rest, lead))
      throw UnsupportedError(
          "equation mixes its lead derivative with derivatives of it");

    // rhs = -rest / coeff; the division must stay exact and lead-free
    const Expr rhs = normalize(Expr::constant(-1) * rest * Expr::power(coeff, -1));
    sys.leads.push_back(lead);
    sys.rhs.push_back(rhs);
    sys.equations.push_back(normalize(Expr::atom(DerivAtom(lead)) - rhs));
  }
  // no rhs may contain any lead of the system, or reduction cannot terminate
  for (const auto& r : sys.rhs)
    if (contains_any_lead(r, sys))
      throw UnsupportedError("solved form is circular: a right-hand side "
                             "contains a lead derivative");
  return sys;
}

Expr reduce_mod_system(const Expr& e, const PdeSystem& sys) {
  std::vector<Binding> bindings;
  for (std::size_t i = 0; i < sys.leads.size(); ++i)
    bindings.push_back({Expr::atom(DerivAtom(sys.leads[i])), sys.rhs[i]});

  Expr cur = e;
  for (int pass = 0; pass < kMaxReductionPasses; ++pass) {
    if (!contains_any_lead(cur, sys)) return normalize(cur);
    cur = normalize(substitute(cur, sys.ctx, bindings));
  }
  if (!contains_any_lead(cur, sys)) return normalize(cur);
  throw UnsupportedError("reduction modulo the system did not terminate");
}

DivergenceReport check_divergence(const std::vector<Expr>& T,
                                  const PdeSystem& sys, const ZeroCheck& opt) {
  const ContextPtr& ctx = sys.ctx;
  if (static_cast<int>(T.size()) != ctx->independent_count())
    throw SemanticError("conserved vector needs one component per "
                        "independent variable");

  Expr div = Expr::constant(0);
  for (int i = 0; i < ctx->independent_count(); ++i)
    div = div + total_derivative_raw(T[i], ctx, i);

  DivergenceReport report;
  report.divergence = normalize(div);
  report.reduced = reduce_mod_system(report.divergence, sys);
  report.conserved = guarded_zero(report.reduced, ctx, opt);

  report.trivial = report.conserved;
  for (const auto& t : T) {
    if (!report.trivial) break;
    if (!guarded_zero(reduce_mod_system(t, sys), ctx, opt)) report.trivial = false;
  }
  return report;
}

std::vector<Expr> bracket(const std::vector<Expr>& T, const Generator& X) {
  validate_generator(X);
  const ContextPtr& ctx = X.ctx;
  const int n = ctx->independent_count();
  if (static_cast<int>(T.size()) != n)
    throw SemanticError("conserved vector needs one component per "
                        "independent variable");

  std::vector<Expr> div_xi;
  for (int k = 0; k < n; ++k) div_xi.push_back(total_derivative_raw(X.xi[k], ctx, k));

  std::vector<Expr> out;
  for (int i = 0; i < n; ++i) {
    Expr b = apply_generator(X, T[i]);
    for (int k = 0; k < n; ++k) {
      b = b + T[i] * div_xi[k];
      b = b - T[k] * total_derivative_raw(X.xi[i], ctx, k);
    }
    out.push_back(normalize(b));
  }
  return out;
}

AssociationResult is_associated(const std::vector<Expr>& T, const Generator& X,
                                const PdeSystem& sys, const ZeroCheck& opt) {
  AssociationResult res;
  res.brackets = bracket(T, X);
  res.associated = true;
  for (const auto& b : res.brackets) {
    res.reduced_brackets.push_back(reduce_mod_system(b, sys));
    if (!guarded_zero(res.reduced_brackets.back(), sys.ctx, opt))
      res.associated = false;
  }
  return res;
}

}  // namespace dred
