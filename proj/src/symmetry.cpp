#include "dred/symmetry.hpp"

#include <map>

#include "dred/error.hpp"

namespace dred {

namespace {

bool has_proper_derivative(const Expr& e) {
  bool found = false;
  visit_atoms(e, [&](const SymbolNode*, const DerivAtom* a) {
    if (a && (!a->multi_index.empty() || a->prime_order > 0)) found = true;
  });
  return found;
}

}  // namespace

void validate_generator(const Generator& X) {
  if (!X.ctx) throw SemanticError("generator has no context");
  if (static_cast<int>(X.xi.size()) != X.ctx->independent_count() ||
      static_cast<int>(X.eta.size()) != X.ctx->dependent_count())
    throw SemanticError("generator coefficient count does not match the context");
  for (const auto& c : X.xi)
    if (has_proper_derivative(c))
      throw UnsupportedError("generator coefficients must not contain derivatives");
  for (const auto& c : X.eta)
    if (has_proper_derivative(c))
      throw UnsupportedError("generator coefficients must not contain derivatives");
}

std::vector<Expr> characteristics(const Generator& X) {
  validate_generator(X);
  std::vector<Expr> out;
  for (int a = 0; a < X.ctx->dependent_count(); ++a) {
    Expr w = X.eta[a];
    for (int j : X.ctx->dependent_args(a))
      w = w - X.xi[j] * Expr::atom(DerivAtom{SymbolKind::Dependent, a, {j}, 0});
    out.push_back(normalize(w));
  }
  return out;
}

Expr prolongation_coefficient(const Generator& X, const DerivAtom& atom) {
  if (atom.base_kind != SymbolKind::Dependent)
    throw SemanticError("prolongation acts on dependent-variable atoms");
  const int a = atom.base;
  if (atom.multi_index.empty()) return normalize(X.eta[a]);

  Expr w = X.eta[a];
  for (int j : X.ctx->dependent_args(a))
    w = w - X.xi[j] * Expr::atom(DerivAtom{SymbolKind::Dependent, a, {j}, 0});

  Expr zeta = w;
  for (int j : atom.multi_index) zeta = total_derivative_raw(zeta, X.ctx, j);
  for (int j : X.ctx->dependent_args(a)) {
    std::vector<int> extended = atom.multi_index;
    extended.push_back(j);
    zeta = zeta + X.xi[j] * Expr::atom(DerivAtom{SymbolKind::Dependent, a,
                                                 std::move(extended), 0});
  }
  return normalize(zeta);
}

Expr apply_generator(const Generator& X, const Expr& e) {
  validate_generator(X);
  auto cache = std::make_shared<std::map<DerivAtom, Expr, bool (*)(
      const DerivAtom&, const DerivAtom&)>>(
      +[](const DerivAtom& a, const DerivAtom& b) {
        return deriv_atom_cmp(a, b) < 0;
      });

  DerivationAction action;
  action.on_symbol = [&X](const SymbolNode& s) -> Expr {
    if (s.kind == SymbolKind::Independent) return X.xi[s.index];
    return Expr::constant(0);
  };
  action.on_dependent = [&X, cache](const DerivAtom& a) -> Expr {
    auto it = cache->find(a);
    if (it != cache->end()) return it->second;
    Expr z = prolongation_coefficient(X, a);
    cache->emplace(a, z);
    return z;
  };
  action.on_function = [&X](const DerivAtom& a) -> Expr {
    const int arg = X.ctx->function_arg(a.base);
    return Expr::atom(DerivAtom{SymbolKind::Function, a.base, {},
                                a.prime_order + 1}) *
           X.eta[arg];
  };
  return normalize(derive(e, action));
}

Generator combine(const std::vector<Generator>& gens,
                  const std::vector<Expr>& coeffs) {
  if (gens.empty()) throw SemanticError("empty generator combination");
  if (gens.size() != coeffs.size())
    throw SemanticError("generator combination needs one coefficient per generator");
  const ContextPtr& ctx = gens[0].ctx;
  for (const auto& g : gens)
    if (g.ctx != ctx)
      throw SemanticError("combined generators must share one context");

  Generator out;
  out.ctx = ctx;
  out.xi.assign(ctx->independent_count(), Expr::constant(0));
  out.eta.assign(ctx->dependent_count(), Expr::constant(0));
  for (std::size_t k = 0; k < gens.size(); ++k) {
    for (std::size_t j = 0; j < out.xi.size(); ++j)
      out.xi[j] = out.xi[j] + coeffs[k] * gens[k].xi[j];
    for (std::size_t a = 0; a < out.eta.size(); ++a)
      out.eta[a] = out.eta[a] + coeffs[k] * gens[k].eta[a];
  }
  for (auto& e : out.xi) e = normalize(e);
  for (auto& e : out.eta) e = normalize(e);
  validate_generator(out);
  return out;
}

}  // namespace dred
