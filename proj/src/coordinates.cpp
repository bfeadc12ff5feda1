#include "dred/coordinates.hpp"

#include <map>
#include <optional>
#include <utility>

#include "dred/conservation.hpp"
#include "dred/printer.hpp"

namespace dred {

namespace {

struct AtomLess {
  bool operator()(const DerivAtom& a, const DerivAtom& b) const {
    return deriv_atom_cmp(a, b) < 0;
  }
};

// ---- map validation ---------------------------------------------------------

// Forward and inverse maps must be point expressions: symbols, bare
// dependents, arithmetic, ln/exp.  `allow_dependents` is off for
// independent-variable maps (a fibre-preserving change keeps the new
// independents free of the dependents).
void check_point_expr(const Expr& e, const ContextPtr& ctx, bool allow_dependents,
                      const std::string& what) {
  visit_atoms(e, [&](const SymbolNode* s, const DerivAtom* a) {
    if (s) {
      int count = s->kind == SymbolKind::Independent ? ctx->independent_count()
                                                     : ctx->parameter_count();
      if (s->index < 0 || s->index >= count)
        throw ChangeError(what + " refers to a symbol outside its context");
      return;
    }
    if (a->base_kind == SymbolKind::Function)
      throw ChangeError(what + " must not contain arbitrary functions");
    if (!a->multi_index.empty() || a->prime_order != 0)
      throw ChangeError(what + " must not contain derivatives");
    if (!allow_dependents)
      throw ChangeError(what + " must not involve the dependent variables");
    if (a->base < 0 || a->base >= ctx->dependent_count())
      throw ChangeError(what + " refers to a symbol outside its context");
  });
}

// ---- symbol correspondence --------------------------------------------------

std::vector<int> map_parameters(const ContextPtr& from, const ContextPtr& to) {
  std::vector<int> out(from->parameter_count(), -1);
  for (int p = 0; p < from->parameter_count(); ++p) {
    auto hit = to->lookup(from->parameter_name(p));
    if (!hit || hit->first != SymbolKind::Parameter)
      throw ChangeError("parameter '" + from->parameter_name(p) +
                        "' has no counterpart across the change");
    out[p] = hit->second;
  }
  return out;
}

// Bare new dependent named by an inverse dependent map, or -1.
int bare_dependent(const Expr& e) {
  if (auto* d = node_as<DerivNode>(e))
    if (d->atom.base_kind == SymbolKind::Dependent && d->atom.multi_index.empty())
      return d->atom.base;
  return -1;
}

std::vector<int> map_functions(const ContextPtr& from, const ContextPtr& to,
                               const std::vector<int>& dep_image) {
  std::vector<int> out(from->function_count(), -1);
  for (int f = 0; f < from->function_count(); ++f) {
    const std::string& name = from->function_name(f);
    auto hit = to->lookup(name);
    if (!hit || hit->first != SymbolKind::Function)
      throw ChangeError("function '" + name +
                        "' has no counterpart across the change");
    int img = dep_image[from->function_arg(f)];
    if (img < 0)
      throw ChangeError("function '" + name +
                        "' cannot migrate: its argument does not map to a "
                        "bare new dependent");
    if (to->function_arg(hit->second) != img)
      throw ChangeError("function '" + name +
                        "' takes a different argument in the new variables");
    out[f] = hit->second;
  }
  return out;
}

// ---- point rewrite ----------------------------------------------------------

// Structural image of a derivative-free expression under coordinate maps.
// Used for map entries and round-trip checks; the full Rewriter below
// handles derivative atoms.
Expr point_rewrite(const Expr& e, const std::vector<Expr>& indep_img,
                   const std::vector<Expr>& dep_img,
                   const std::vector<int>& param_map) {
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          return e;
        } else if constexpr (std::is_same_v<T, SymbolNode>) {
          if (n.kind == SymbolKind::Independent) return indep_img.at(n.index);
          return Expr::symbol(SymbolKind::Parameter, param_map.at(n.index));
        } else if constexpr (std::is_same_v<T, DerivNode>) {
          if (n.atom.base_kind != SymbolKind::Dependent ||
              !n.atom.multi_index.empty())
            throw Error("point_rewrite on a non-point expression");
          return dep_img.at(n.atom.base);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          std::vector<Expr> out;
          out.reserve(n.terms.size());
          for (const auto& t : n.terms)
            out.push_back(point_rewrite(t, indep_img, dep_img, param_map));
          return Expr::sum(std::move(out));
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          std::vector<Expr> out;
          out.reserve(n.factors.size());
          for (const auto& f : n.factors)
            out.push_back(point_rewrite(f, indep_img, dep_img, param_map));
          return Expr::product(std::move(out));
        } else if constexpr (std::is_same_v<T, PowerNode>) {
          return Expr::power(point_rewrite(n.base, indep_img, dep_img, param_map),
                             n.exponent);
        } else if constexpr (std::is_same_v<T, LnNode>) {
          return Expr::ln(point_rewrite(n.arg, indep_img, dep_img, param_map));
        } else if constexpr (std::is_same_v<T, ExpNode>) {
          return Expr::exp(point_rewrite(n.arg, indep_img, dep_img, param_map));
        } else {
          static_assert(std::is_same_v<T, NegNode>);
          return Expr::neg(point_rewrite(n.arg, indep_img, dep_img, param_map));
        }
      },
      e.node().v);
}

// ---- full rewriter ----------------------------------------------------------

class Rewriter {
 public:
  explicit Rewriter(const CoordinateChange& ch)
      : ch_(ch), param_map_(map_parameters(ch.from, ch.to)) {
    dep_image_.reserve(ch.old_dependents.size());
    for (const Expr& d : ch.old_dependents) dep_image_.push_back(bare_dependent(d));
    func_map_ = map_functions(ch.from, ch.to, dep_image_);
  }

  Expr operator()(const Expr& e) { return normalize(walk(e)); }

 private:
  Expr walk(const Expr& e) {
    return std::visit(
        [&](const auto& n) -> Expr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ConstantNode>) {
            return e;
          } else if constexpr (std::is_same_v<T, SymbolNode>) {
            if (n.kind == SymbolKind::Independent)
              return ch_.old_independents.at(n.index);
            return Expr::symbol(SymbolKind::Parameter, param_map_.at(n.index));
          } else if constexpr (std::is_same_v<T, DerivNode>) {
            return atom_image(n.atom);
          } else if constexpr (std::is_same_v<T, SumNode>) {
            std::vector<Expr> out;
            out.reserve(n.terms.size());
            for (const auto& t : n.terms) out.push_back(walk(t));
            return Expr::sum(std::move(out));
          } else if constexpr (std::is_same_v<T, ProductNode>) {
            std::vector<Expr> out;
            out.reserve(n.factors.size());
            for (const auto& f : n.factors) out.push_back(walk(f));
            return Expr::product(std::move(out));
          } else if constexpr (std::is_same_v<T, PowerNode>) {
            return Expr::power(walk(n.base), n.exponent);
          } else if constexpr (std::is_same_v<T, LnNode>) {
            return Expr::ln(walk(n.arg));
          } else if constexpr (std::is_same_v<T, ExpNode>) {
            return Expr::exp(walk(n.arg));
          } else {
            static_assert(std::is_same_v<T, NegNode>);
            return Expr::neg(walk(n.arg));
          }
        },
        e.node().v);
  }

  // Chain rule, one derivative at a time: the image of D_k h is
  // sum_j A_inv[k][j] * D~_j(image of h).
  Expr atom_image(const DerivAtom& a) {
    if (a.base_kind == SymbolKind::Function)
      return Expr::atom({SymbolKind::Function, func_map_.at(a.base), {},
                         a.prime_order});
    auto it = cache_.find(a);
    if (it != cache_.end()) return it->second;
    Expr img;
    if (a.multi_index.empty()) {
      img = ch_.old_dependents.at(a.base);
    } else {
      DerivAtom parent = a;
      int k = parent.multi_index.back();
      parent.multi_index.pop_back();
      Expr pe = atom_image(parent);
      std::vector<Expr> terms;
      for (std::size_t j = 0; j < ch_.A_inv[k].size(); ++j) {
        if (ch_.A_inv[k][j].is_literal_zero()) continue;
        terms.push_back(ch_.A_inv[k][j] *
                        total_derivative(pe, ch_.to, {static_cast<int>(j)}));
      }
      img = normalize(Expr::sum(std::move(terms)));
    }
    cache_.emplace(a, img);
    return img;
  }

  const CoordinateChange& ch_;
  std::vector<int> param_map_;
  std::vector<int> func_map_;
  std::vector<int> dep_image_;
  std::map<DerivAtom, Expr, AtomLess> cache_;
};

// ---- affine inversion -------------------------------------------------------

// Splits e as sum_k coeff_k * key_k + rest, with every coeff and the rest
// free of the key symbols; empty result means e is not affine in the keys.
bool affine_split(const Expr& e, const std::vector<Expr>& keys,
                  const ContextPtr& ctx, bool over_dependents,
                  std::vector<Expr>& coeffs, Expr& rest) {
  auto free_of_keys = [&](const Expr& x) {
    bool ok = true;
    visit_atoms(x, [&](const SymbolNode* s, const DerivAtom* a) {
      if (!over_dependents && s && s->kind == SymbolKind::Independent) ok = false;
      if (over_dependents && a && a->base_kind == SymbolKind::Dependent) ok = false;
    });
    return ok;
  };
  coeffs.clear();
  Expr acc = e;
  for (const Expr& key : keys) {
    Expr c;
    if (auto* d = node_as<DerivNode>(key))
      c = normalize(partial_by_atom(e, ctx, d->atom));
    else {
      auto* s = node_as<SymbolNode>(key);
      c = normalize(partial_by_symbol(e, s->kind, s->index));
    }
    if (!free_of_keys(c)) return false;
    coeffs.push_back(c);
    acc = acc - c * key;
  }
  rest = normalize(acc);
  return free_of_keys(rest);
}

// x = M^{-1} (x~ - b): inverts forward maps that are affine over `keys`
// with key-free coefficients.  Images of the new variables are given by
// `new_syms` (new-context exprs); coefficients are carried over with
// `carry` before use.
std::vector<Expr> invert_affine(const std::vector<Expr>& forward,
                                const std::vector<Expr>& keys,
                                const std::vector<Expr>& new_syms,
                                const ContextPtr& ctx, bool over_dependents,
                                const std::function<Expr(const Expr&)>& carry,
                                const ZeroCheck& opt, const std::string& what) {
  std::size_t n = keys.size();
  ExprMat coef(n);
  std::vector<Expr> rest(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!affine_split(forward[j], keys, ctx, over_dependents, coef[j], rest[j]))
      throw ChangeError("no closed-form inverse for the " + what +
                        " maps; supply one explicitly");
  }
  Expr det = mat_det(coef);
  if (guarded_zero(det, ctx, opt))
    throw ChangeError("degenerate change of variables: the " + what +
                      " maps are not invertible");
  ExprMat adj = mat_adjugate(coef);
  std::vector<Expr> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Expr> terms;
    for (std::size_t j = 0; j < n; ++j) {
      if (adj[k][j].is_literal_zero()) continue;
      terms.push_back(carry(adj[k][j]) * (new_syms[j] - carry(rest[j])));
    }
    out[k] = normalize(Expr::sum(std::move(terms)) * Expr::power(carry(det), -1));
  }
  return out;
}

// ---- canonical coordinates helpers ------------------------------------------

enum class CoeffKind { Zero, Translation, Scaling };

struct CoeffClass {
  CoeffKind kind = CoeffKind::Zero;
  Expr value;  // shift for translations, rate for scalings
};

bool free_of_variables(const Expr& e) {
  bool ok = true;
  visit_atoms(e, [&](const SymbolNode* s, const DerivAtom* a) {
    if (s && s->kind == SymbolKind::Independent) ok = false;
    if (a) ok = false;  // dependents and arbitrary functions both disqualify
  });
  return ok;
}

CoeffClass classify_coefficient(const Expr& coeff, const Expr& own,
                                const std::string& name,
                                const ContextPtr& ctx) {
  Expr c = normalize(coeff);
  if (is_zero_normal(c)) return {CoeffKind::Zero, Expr()};
  if (free_of_variables(c)) return {CoeffKind::Translation, c};
  Expr rate = normalize(c * Expr::power(own, -1));
  if (free_of_variables(rate)) return {CoeffKind::Scaling, rate};
  throw UnsupportedError(
      "coefficient for '" + name +
      "' is neither a constant shift nor a multiple of its own variable: " +
      print(c, ctx));
}

std::string fresh_name(const std::string& base, std::vector<std::string>& taken) {
  std::string name = base;
  for (int k = 2; ; ++k) {
    bool clash = false;
    for (const auto& t : taken)
      if (t == name) { clash = true; break; }
    if (!clash) break;
    name = base + std::to_string(k);
  }
  taken.push_back(name);
  return name;
}

}  // namespace

Expr point_substitute(const Expr& e, const std::vector<Expr>& independents,
                      const std::vector<Expr>& dependents,
                      const std::vector<int>& param_map) {
  return normalize(point_rewrite(e, independents, dependents, param_map));
}

CanonicalResult canonical_coordinates(const Generator& X,
                                      const CanonicalOptions& opt) {
  validate_generator(X);
  const ContextPtr& ctx = X.ctx;
  int n = ctx->independent_count();
  int m = ctx->dependent_count();

  std::vector<CoeffClass> xi(n), eta(m);
  for (int j = 0; j < n; ++j)
    xi[j] = classify_coefficient(X.xi[j], Expr::symbol(SymbolKind::Independent, j),
                                 ctx->independent_name(j), ctx);
  for (int a = 0; a < m; ++a)
    eta[a] = classify_coefficient(
        X.eta[a], Expr::atom({SymbolKind::Dependent, a, {}, 0}),
        ctx->dependent_name(a), ctx);

  int pivot = -1;
  for (int j = 0; j < n && pivot < 0; ++j)
    if (xi[j].kind != CoeffKind::Zero) pivot = j;
  if (pivot < 0)
    throw UnsupportedError(
        "every independent-variable coefficient is zero; there is no "
        "direction to reduce along");

  // The canonical variable in old coordinates: X(Q) = 1.
  Expr x_p = Expr::symbol(SymbolKind::Independent, pivot);
  Expr q_old = xi[pivot].kind == CoeffKind::Translation
                   ? normalize(x_p * Expr::power(xi[pivot].value, -1))
                   : normalize(Expr::ln(x_p) * Expr::power(xi[pivot].value, -1));

  auto invariant_of = [&](const CoeffClass& c, const Expr& own) {
    switch (c.kind) {
      case CoeffKind::Zero: return normalize(own);
      case CoeffKind::Translation: return normalize(own - c.value * q_old);
      case CoeffKind::Scaling:
        return normalize(own * Expr::exp(Expr::neg(c.value * q_old)));
    }
    throw Error("bad coefficient class");
  };

  // Name pools; collisions with anything visible in either context are
  // resolved by numbering.
  std::vector<std::string> taken;
  for (int i = 0; i < n; ++i) taken.push_back(ctx->independent_name(i));
  for (int a = 0; a < m; ++a) taken.push_back(ctx->dependent_name(a));
  for (int p = 0; p < ctx->parameter_count(); ++p)
    taken.push_back(ctx->parameter_name(p));
  for (int f = 0; f < ctx->function_count(); ++f)
    taken.push_back(ctx->function_name(f));

  std::vector<std::string> inv_pool, dep_pool;
  std::string canon_base;
  if (opt.stage == 1) {
    inv_pool = {"r", "s"};
    dep_pool = {"w"};
    canon_base = "q";
  } else if (opt.stage == 2) {
    inv_pool = {"n"};
    dep_pool = {"v"};
    canon_base = "m";
  } else {
    canon_base = "q" + std::to_string(opt.stage);
  }

  CanonicalResult cr;
  cr.from = ctx;

  // Invariants in reverse declaration order, pivot skipped.
  std::vector<int> inv_sources;
  for (int j = n - 1; j >= 0; --j) {
    if (j == pivot) continue;
    inv_sources.push_back(j);
    std::size_t i = cr.invariants.size();
    std::string base = i < inv_pool.size() ? inv_pool[i] : "z";
    cr.invariants.emplace_back(
        fresh_name(base, taken),
        invariant_of(xi[j], Expr::symbol(SymbolKind::Independent, j)));
  }
  cr.canonical_var = {fresh_name(canon_base, taken), q_old};
  for (int a = 0; a < m; ++a) {
    std::string base = static_cast<std::size_t>(a) < dep_pool.size()
                           ? dep_pool[a]
                           : "w";
    cr.dependents.emplace_back(
        fresh_name(base, taken),
        invariant_of(eta[a], Expr::atom({SymbolKind::Dependent, a, {}, 0})));
  }

  // Straightening is only correct if the invariants really are invariant.
  for (const auto& [name, expr] : cr.invariants)
    if (!is_zero_normal(apply_generator(X, expr)))
      throw Error("internal: generator does not annihilate invariant " + name);
  for (const auto& [name, expr] : cr.dependents)
    if (!is_zero_normal(apply_generator(X, expr)))
      throw Error("internal: generator does not annihilate invariant " + name);
  if (!is_zero_normal(normalize(apply_generator(X, q_old) - Expr::constant(1))))
    throw Error("internal: canonical variable is not straightened");

  // Target context.
  ContextBuilder cb;
  std::vector<std::string> inv_names;
  for (const auto& [name, expr] : cr.invariants) {
    cb.independent(name);
    inv_names.push_back(name);
  }
  cb.independent(cr.canonical_var.first);
  for (const auto& [name, expr] : cr.dependents) {
    if (opt.invariant_profile)
      cb.dependent(name, inv_names);
    else
      cb.dependent(name);
  }
  for (int p = 0; p < ctx->parameter_count(); ++p)
    cb.parameter(ctx->parameter_name(p));
  for (int f = 0; f < ctx->function_count(); ++f)
    cb.function(ctx->function_name(f),
                cr.dependents[ctx->function_arg(f)].first);
  cr.to = cb.build();

  // Closed-form inverses.
  auto carry = [&](const Expr& e) { return migrate(e, ctx, cr.to); };
  Expr q_sym = Expr::symbol(SymbolKind::Independent, n - 1);
  cr.inverse_independents.assign(n, Expr());
  cr.inverse_independents[pivot] =
      xi[pivot].kind == CoeffKind::Translation
          ? normalize(carry(xi[pivot].value) * q_sym)
          : normalize(Expr::exp(carry(xi[pivot].value) * q_sym));
  auto original_of = [&](const CoeffClass& c, const Expr& inv_sym) {
    switch (c.kind) {
      case CoeffKind::Zero: return inv_sym;
      case CoeffKind::Translation:
        return normalize(inv_sym + carry(c.value) * q_sym);
      case CoeffKind::Scaling:
        return normalize(inv_sym * Expr::exp(carry(c.value) * q_sym));
    }
    throw Error("bad coefficient class");
  };
  for (std::size_t i = 0; i < inv_sources.size(); ++i)
    cr.inverse_independents[inv_sources[i]] = original_of(
        xi[inv_sources[i]],
        Expr::symbol(SymbolKind::Independent, static_cast<int>(i)));
  for (int a = 0; a < m; ++a)
    cr.inverse_dependents.push_back(
        original_of(eta[a], Expr::atom({SymbolKind::Dependent, a, {}, 0})));
  return cr;
}

CoordinateChange build_change(const CanonicalResult& cr, const ContextPtr& ctx,
                              const ZeroCheck& opt) {
  if (cr.from != ctx)
    throw SemanticError("canonical result was built over a different context");
  if (!cr.to) throw SemanticError("canonical result has no target context");
  int n = ctx->independent_count();
  int m = ctx->dependent_count();
  if (static_cast<int>(cr.invariants.size()) != n - 1 ||
      static_cast<int>(cr.dependents.size()) != m ||
      cr.to->independent_count() != n || cr.to->dependent_count() != m)
    throw SemanticError("coordinate change must keep the variable counts");
  for (int i = 0; i + 1 < n; ++i)
    if (cr.to->independent_name(i) != cr.invariants[i].first)
      throw SemanticError("target context does not list the invariants in order");
  if (cr.to->independent_name(n - 1) != cr.canonical_var.first)
    throw SemanticError("the canonical variable must come last in the target");
  for (int a = 0; a < m; ++a)
    if (cr.to->dependent_name(a) != cr.dependents[a].first)
      throw SemanticError("target context does not match the new dependents");

  CoordinateChange ch;
  ch.from = ctx;
  ch.to = cr.to;
  ch.new_independents = cr.invariants;
  ch.new_independents.push_back(cr.canonical_var);
  ch.new_dependents = cr.dependents;

  for (const auto& [name, e] : ch.new_independents)
    check_point_expr(e, ctx, false, "definition of '" + name + "'");
  for (const auto& [name, e] : ch.new_dependents)
    check_point_expr(e, ctx, true, "definition of '" + name + "'");

  std::vector<int> param_map = map_parameters(ctx, ch.to);
  std::vector<int> rev_param_map = map_parameters(ch.to, ctx);

  // Inverse maps: explicit when supplied, affine inversion otherwise.
  std::vector<Expr> fwd_ind;
  for (const auto& [name, e] : ch.new_independents) fwd_ind.push_back(e);
  if (!cr.inverse_independents.empty()) {
    if (static_cast<int>(cr.inverse_independents.size()) != n)
      throw SemanticError("need one inverse map per old independent");
    ch.old_independents = cr.inverse_independents;
  } else {
    std::vector<Expr> keys, new_syms;
    for (int k = 0; k < n; ++k) {
      keys.push_back(Expr::symbol(SymbolKind::Independent, k));
      new_syms.push_back(Expr::symbol(SymbolKind::Independent, k));
    }
    ch.old_independents = invert_affine(
        fwd_ind, keys, new_syms, ctx, false,
        [&](const Expr& e) { return migrate(e, ctx, ch.to); }, opt,
        "independent-variable");
  }
  for (int k = 0; k < n; ++k)
    check_point_expr(ch.old_independents[k], ch.to, false,
                     "inverse map for '" + ctx->independent_name(k) + "'");

  std::vector<Expr> fwd_dep;
  for (const auto& [name, e] : ch.new_dependents) fwd_dep.push_back(e);
  if (!cr.inverse_dependents.empty()) {
    if (static_cast<int>(cr.inverse_dependents.size()) != m)
      throw SemanticError("need one inverse map per old dependent");
    ch.old_dependents = cr.inverse_dependents;
  } else {
    std::vector<Expr> keys, new_syms;
    for (int b = 0; b < m; ++b) {
      keys.push_back(Expr::atom({SymbolKind::Dependent, b, {}, 0}));
      new_syms.push_back(Expr::atom({SymbolKind::Dependent, b, {}, 0}));
    }
    // Coefficients may involve the old independents; carry them over with
    // the already-known independent inverses.
    ch.old_dependents = invert_affine(
        fwd_dep, keys, new_syms, ctx, true,
        [&](const Expr& e) {
          return point_rewrite(e, ch.old_independents, {}, param_map);
        },
        opt, "dependent-variable");
  }
  for (int b = 0; b < m; ++b)
    check_point_expr(ch.old_dependents[b], ch.to, true,
                     "inverse map for '" + ctx->dependent_name(b) + "'");

  // Both round trips, checked with the guarded zero test.
  std::vector<Expr> new_dep_syms;
  for (int a = 0; a < m; ++a)
    new_dep_syms.push_back(Expr::atom({SymbolKind::Dependent, a, {}, 0}));
  for (int j = 0; j < n; ++j) {
    Expr img = normalize(point_rewrite(fwd_ind[j], ch.old_independents,
                                       ch.old_dependents, param_map));
    if (!guarded_equal(img, Expr::symbol(SymbolKind::Independent, j), ch.to, opt))
      throw ChangeError("inverse maps do not invert the definition of '" +
                        ch.new_independents[j].first + "'");
  }
  for (int a = 0; a < m; ++a) {
    Expr img = normalize(point_rewrite(fwd_dep[a], ch.old_independents,
                                       ch.old_dependents, param_map));
    if (!guarded_equal(img, new_dep_syms[a], ch.to, opt))
      throw ChangeError("inverse maps do not invert the definition of '" +
                        ch.new_dependents[a].first + "'");
  }
  std::vector<Expr> old_dep_syms;
  for (int b = 0; b < m; ++b)
    old_dep_syms.push_back(Expr::atom({SymbolKind::Dependent, b, {}, 0}));
  for (int k = 0; k < n; ++k) {
    Expr img = normalize(
        point_rewrite(ch.old_independents[k], fwd_ind, fwd_dep, rev_param_map));
    if (!guarded_equal(img, Expr::symbol(SymbolKind::Independent, k), ctx, opt))
      throw ChangeError("round trip fails for old variable '" +
                        ctx->independent_name(k) + "'");
  }
  for (int b = 0; b < m; ++b) {
    Expr img = normalize(
        point_rewrite(ch.old_dependents[b], fwd_ind, fwd_dep, rev_param_map));
    if (!guarded_equal(img, old_dep_syms[b], ctx, opt))
      throw ChangeError("round trip fails for old variable '" +
                        ctx->dependent_name(b) + "'");
  }

  // Chain-rule matrices.  A_inv is direct total differentiation of the
  // forward maps; A is its exact inverse through the adjugate.
  ch.A_inv.assign(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      ch.A_inv[i][k] = normalize(point_rewrite(
          total_derivative(fwd_ind[k], ctx, {i}), ch.old_independents, {},
          param_map));
  Expr det_inv = mat_det(ch.A_inv);
  if (guarded_zero(det_inv, ch.to, opt))
    throw ChangeError("degenerate change of variables: the Jacobian vanishes");
  ExprMat adj = mat_adjugate(ch.A_inv);
  Expr scale = Expr::power(det_inv, -1);
  ch.A.assign(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) ch.A[i][k] = normalize(adj[i][k] * scale);
  ch.J = mat_det(ch.A);
  return ch;
}

Expr rewrite(const CoordinateChange& ch, const Expr& e) {
  Rewriter rw(ch);
  return rw(e);
}

namespace {

// J * A_inv^T applied to already-rewritten components.
std::vector<Expr> transport(const std::vector<Expr>& imgs,
                            const CoordinateChange& ch) {
  std::size_t n = imgs.size();
  std::vector<Expr> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (std::size_t k = 0; k < n; ++k) {
      if (ch.A_inv[k][i].is_literal_zero()) continue;
      terms.push_back(ch.A_inv[k][i] * imgs[k]);
    }
    out[i] = normalize(ch.J * Expr::sum(std::move(terms)));
  }
  return out;
}

std::vector<Expr> rewrite_components(const std::vector<Expr>& T,
                                     const CoordinateChange& ch) {
  if (T.size() != static_cast<std::size_t>(ch.from->independent_count()))
    throw SemanticError("need one component per independent variable");
  Rewriter rw(ch);
  std::vector<Expr> imgs;
  imgs.reserve(T.size());
  for (const Expr& t : T) imgs.push_back(rw(t));
  return imgs;
}

}  // namespace

std::vector<Expr> transform_conserved(const std::vector<Expr>& T,
                                      const CoordinateChange& ch) {
  return transport(rewrite_components(T, ch), ch);
}

std::vector<Expr> transform_conserved_rowrep(const std::vector<Expr>& T,
                                             const CoordinateChange& ch) {
  std::vector<Expr> imgs = rewrite_components(T, ch);
  std::vector<Expr> out(imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    ExprMat mat = ch.A;
    mat[i] = imgs;
    out[i] = mat_det(mat);
  }
  return out;
}

std::vector<Expr> transformed_bracket(const std::vector<Expr>& T,
                                      const Generator& X,
                                      const CoordinateChange& ch) {
  return transport(rewrite_components(bracket(T, X), ch), ch);
}

Generator transform_generator(const Generator& Y, const CoordinateChange& ch) {
  validate_generator(Y);
  if (Y.ctx != ch.from)
    throw SemanticError("generator belongs to a different context");
  Rewriter rw(ch);
  Generator out;
  out.ctx = ch.to;
  for (const auto& [name, e] : ch.new_independents)
    out.xi.push_back(rw(apply_generator(Y, e)));
  for (const auto& [name, e] : ch.new_dependents)
    out.eta.push_back(rw(apply_generator(Y, e)));
  validate_generator(out);
  return out;
}

Generator project_generator(const Generator& Y, const ContextPtr& sub) {
  validate_generator(Y);
  std::vector<int> keep;
  for (int i = 0; i < sub->independent_count(); ++i) {
    auto hit = Y.ctx->lookup(sub->independent_name(i));
    if (!hit || hit->first != SymbolKind::Independent)
      throw SemanticError("projection target variable '" +
                          sub->independent_name(i) + "' is not in the source");
    keep.push_back(hit->second);
  }
  std::vector<int> dropped;
  for (int i = 0; i < Y.ctx->independent_count(); ++i)
    if (!sub->has_name(Y.ctx->independent_name(i))) dropped.push_back(i);

  auto check_free = [&](const Expr& e, const std::string& what) {
    for (int d : dropped)
      if (contains_symbol(e, SymbolKind::Independent, d))
        throw ChangeError("not inheritable: the component for '" + what +
                          "' involves the dropped variable '" +
                          Y.ctx->independent_name(d) + "'");
  };

  Generator out;
  out.ctx = sub;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    check_free(Y.xi[keep[i]], sub->independent_name(static_cast<int>(i)));
    out.xi.push_back(migrate(Y.xi[keep[i]], Y.ctx, sub));
  }
  for (int a = 0; a < sub->dependent_count(); ++a) {
    auto hit = Y.ctx->lookup(sub->dependent_name(a));
    if (!hit || hit->first != SymbolKind::Dependent)
      throw SemanticError("projection target dependent '" +
                          sub->dependent_name(a) + "' is not in the source");
    check_free(Y.eta[hit->second], sub->dependent_name(a));
    out.eta.push_back(migrate(Y.eta[hit->second], Y.ctx, sub));
  }
  validate_generator(out);
  return out;
}

}  // namespace dred
