#include "dred/expr.hpp"

#include <algorithm>

namespace dred {

int deriv_atom_cmp(const DerivAtom& a, const DerivAtom& b) {
  if (a.base_kind != b.base_kind)
    return a.base_kind == SymbolKind::Dependent ? -1 : 1;
  if (a.base != b.base) return a.base < b.base ? -1 : 1;
  if (a.prime_order != b.prime_order) return a.prime_order < b.prime_order ? -1 : 1;
  if (a.multi_index.size() != b.multi_index.size())
    return a.multi_index.size() < b.multi_index.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.multi_index.size(); ++i)
    if (a.multi_index[i] != b.multi_index[i])
      return a.multi_index[i] < b.multi_index[i] ? -1 : 1;
  return 0;
}

namespace {

Expr make(ExprNode n) {
  struct Access : Expr {
    static Expr wrap(std::shared_ptr<const ExprNode> p) {
      return Access(std::move(p));
    }
    explicit Access(std::shared_ptr<const ExprNode> p) : Expr(std::move(p)) {}
  };
  return Access::wrap(std::make_shared<const ExprNode>(std::move(n)));
}

}  // namespace

Expr::Expr() : node_(std::make_shared<const ExprNode>(ExprNode{ConstantNode{Rational(0)}})) {}

Expr Expr::constant(Rational v) {
  v.canonicalize();
  return make(ExprNode{ConstantNode{std::move(v)}});
}

Expr Expr::symbol(SymbolKind kind, int index) {
  if (kind != SymbolKind::Independent && kind != SymbolKind::Parameter)
    throw Error("symbol nodes hold independents or parameters only");
  return make(ExprNode{SymbolNode{kind, index}});
}

Expr Expr::atom(DerivAtom a) {
  if (a.base_kind == SymbolKind::Dependent) {
    if (a.prime_order != 0) throw Error("prime order on a dependent-base atom");
    std::sort(a.multi_index.begin(), a.multi_index.end());
  } else if (a.base_kind == SymbolKind::Function) {
    if (!a.multi_index.empty()) throw Error("multi-index on a function-base atom");
    if (a.prime_order < 0) throw Error("negative prime order");
  } else {
    throw Error("derivative atom base must be dependent or function");
  }
  return make(ExprNode{DerivNode{std::move(a)}});
}

Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.empty()) return Expr();
  if (terms.size() == 1) return terms[0];
  return make(ExprNode{SumNode{std::move(terms)}});
}

Expr Expr::product(std::vector<Expr> factors) {
  if (factors.empty()) return constant(1);
  if (factors.size() == 1) return factors[0];
  return make(ExprNode{ProductNode{std::move(factors)}});
}

Expr Expr::power(Expr base, long exponent) {
  if (exponent == 1) return base;
  return make(ExprNode{PowerNode{std::move(base), exponent}});
}

Expr Expr::ln(Expr arg) { return make(ExprNode{LnNode{std::move(arg)}}); }
Expr Expr::exp(Expr arg) { return make(ExprNode{ExpNode{std::move(arg)}}); }
Expr Expr::neg(Expr arg) { return make(ExprNode{NegNode{std::move(arg)}}); }

bool Expr::is_constant() const {
  return std::holds_alternative<ConstantNode>(node_->v);
}

bool Expr::is_literal_zero() const {
  auto* c = std::get_if<ConstantNode>(&node_->v);
  return c && c->value == 0;
}

const Rational& Expr::constant_value() const {
  auto* c = std::get_if<ConstantNode>(&node_->v);
  if (!c) throw Error("not a constant expression");
  return c->value;
}

bool Expr::operator==(const Expr& o) const { return expr_cmp(*this, o) == 0; }

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, Expr::neg(b)}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant()) {
    if (b.constant_value() == 0) throw Error("division by constant zero");
    return Expr::product({a, Expr::constant(Rational(1) / b.constant_value())});
  }
  return Expr::product({a, Expr::power(b, -1)});
}
Expr operator-(const Expr& a) { return Expr::neg(a); }

int expr_cmp(const Expr& a, const Expr& b) {
  const auto& va = a.node().v;
  const auto& vb = b.node().v;
  if (va.index() != vb.index()) return va.index() < vb.index() ? -1 : 1;
  auto cmp_vec = [](const std::vector<Expr>& x, const std::vector<Expr>& y) {
    if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (int c = expr_cmp(x[i], y[i])) return c;
    return 0;
  };
  switch (va.index()) {
    case 0: {
      int c = rat_cmp(std::get<ConstantNode>(va).value, std::get<ConstantNode>(vb).value);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case 1: {
      const auto& x = std::get<SymbolNode>(va);
      const auto& y = std::get<SymbolNode>(vb);
      if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind) ? -1 : 1;
      if (x.index != y.index) return x.index < y.index ? -1 : 1;
      return 0;
    }
    case 2:
      return deriv_atom_cmp(std::get<DerivNode>(va).atom, std::get<DerivNode>(vb).atom);
    case 3:
      return cmp_vec(std::get<SumNode>(va).terms, std::get<SumNode>(vb).terms);
    case 4:
      return cmp_vec(std::get<ProductNode>(va).factors, std::get<ProductNode>(vb).factors);
    case 5: {
      const auto& x = std::get<PowerNode>(va);
      const auto& y = std::get<PowerNode>(vb);
      if (x.exponent != y.exponent) return x.exponent < y.exponent ? -1 : 1;
      return expr_cmp(x.base, y.base);
    }
    case 6:
      return expr_cmp(std::get<LnNode>(va).arg, std::get<LnNode>(vb).arg);
    case 7:
      return expr_cmp(std::get<ExpNode>(va).arg, std::get<ExpNode>(vb).arg);
    case 8:
      return expr_cmp(std::get<NegNode>(va).arg, std::get<NegNode>(vb).arg);
  }
  throw Error("bad node");
}

// ---- queries ----------------------------------------------------------------

void visit_atoms(const Expr& e,
                 const std::function<void(const SymbolNode*, const DerivAtom*)>& fn) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
        } else if constexpr (std::is_same_v<T, SymbolNode>) {
          fn(&n, nullptr);
        } else if constexpr (std::is_same_v<T, DerivNode>) {
          fn(nullptr, &n.atom);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          for (const auto& t : n.terms) visit_atoms(t, fn);
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          for (const auto& f : n.factors) visit_atoms(f, fn);
        } else if constexpr (std::is_same_v<T, PowerNode>) {
          visit_atoms(n.base, fn);
        } else {
          visit_atoms(n.arg, fn);
        }
      },
      e.node().v);
}

bool contains_symbol(const Expr& e, SymbolKind kind, int index) {
  bool found = false;
  visit_atoms(e, [&](const SymbolNode* s, const DerivAtom*) {
    if (s && s->kind == kind && s->index == index) found = true;
  });
  return found;
}

bool contains_dependent_atoms(const Expr& e) {
  bool found = false;
  visit_atoms(e, [&](const SymbolNode*, const DerivAtom* a) {
    if (a) found = true;
  });
  return found;
}

namespace {

// True when sub is a multiset subset of sup (both sorted).
bool multi_index_subset(const std::vector<int>& sub, const std::vector<int>& sup) {
  std::size_t j = 0;
  for (int v : sub) {
    while (j < sup.size() && sup[j] < v) ++j;
    if (j >= sup.size() || sup[j] != v) return false;
    ++j;
  }
  return true;
}

bool is_extension(const DerivAtom& key, const DerivAtom& a) {
  if (key.base_kind != a.base_kind || key.base != a.base) return false;
  if (key.base_kind == SymbolKind::Function) return a.prime_order >= key.prime_order;
  return multi_index_subset(key.multi_index, a.multi_index);
}

}  // namespace

bool contains_atom_or_extension(const Expr& e, const DerivAtom& a) {
  bool found = false;
  visit_atoms(e, [&](const SymbolNode*, const DerivAtom* x) {
    if (x && is_extension(a, *x)) found = true;
  });
  return found;
}

int max_derivative_order(const Expr& e) {
  int order = 0;
  visit_atoms(e, [&](const SymbolNode*, const DerivAtom* a) {
    if (!a) return;
    int o = a->base_kind == SymbolKind::Function ? a->prime_order
                                                 : static_cast<int>(a->multi_index.size());
    order = std::max(order, o);
  });
  return order;
}

// ---- derivations --------------------------------------------------------------

Expr derive(const Expr& e, const DerivationAction& action) {
  return std::visit(
      [&](const auto& n) -> Expr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          return Expr();
        } else if constexpr (std::is_same_v<T, SymbolNode>) {
          return action.on_symbol(n);
        } else if constexpr (std::is_same_v<T, DerivNode>) {
          return n.atom.base_kind == SymbolKind::Dependent ? action.on_dependent(n.atom)
                                                           : action.on_function(n.atom);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          std::vector<Expr> out;
          out.reserve(n.terms.size());
          for (const auto& t : n.terms) out.push_back(derive(t, action));
          return Expr::sum(std::move(out));
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          std::vector<Expr> out;
          for (std::size_t i = 0; i < n.factors.size(); ++i) {
            std::vector<Expr> fs = n.factors;
            fs[i] = derive(n.factors[i], action);
            out.push_back(Expr::product(std::move(fs)));
          }
          return Expr::sum(std::move(out));
        } else if constexpr (std::is_same_v<T, PowerNode>) {
          // d(b^k) = k b^(k-1) db
          return Expr::product({Expr::constant(n.exponent),
                                Expr::power(n.base, n.exponent - 1),
                                derive(n.base, action)});
        } else if constexpr (std::is_same_v<T, LnNode>) {
          return Expr::product({Expr::power(n.arg, -1), derive(n.arg, action)});
        } else if constexpr (std::is_same_v<T, ExpNode>) {
          return Expr::product({Expr::exp(n.arg), derive(n.arg, action)});
        } else {
          static_assert(std::is_same_v<T, NegNode>);
          return Expr::neg(derive(n.arg, action));
        }
      },
      e.node().v);
}

Expr total_derivative_raw(const Expr& e, const ContextPtr& ctx, int indep) {
  if (indep < 0 || indep >= ctx->independent_count())
    throw SemanticError("total derivative along a non-independent variable");
  DerivationAction d;
  d.on_symbol = [indep](const SymbolNode& s) {
    if (s.kind == SymbolKind::Independent && s.index == indep) return Expr::constant(1);
    return Expr();
  };
  d.on_dependent = [indep, &ctx](const DerivAtom& a) {
    if (!ctx->depends_on(a.base, indep)) return Expr();
    DerivAtom ext = a;
    ext.multi_index.push_back(indep);
    return Expr::atom(std::move(ext));
  };
  d.on_function = [indep, &ctx](const DerivAtom& a) {
    int arg = ctx->function_arg(a.base);
    if (!ctx->depends_on(arg, indep)) return Expr();
    DerivAtom fprime = a;
    fprime.prime_order += 1;
    DerivAtom darg{SymbolKind::Dependent, arg, {indep}, 0};
    return Expr::product({Expr::atom(std::move(fprime)), Expr::atom(std::move(darg))});
  };
  return derive(e, d);
}

Expr total_derivative(const Expr& e, const ContextPtr& ctx,
                      const std::vector<int>& indeps) {
  Expr cur = e;
  for (int i : indeps) cur = total_derivative_raw(cur, ctx, i);
  return normalize(cur);
}

Expr partial_by_symbol(const Expr& e, SymbolKind kind, int index) {
  DerivationAction d;
  d.on_symbol = [kind, index](const SymbolNode& s) {
    return (s.kind == kind && s.index == index) ? Expr::constant(1) : Expr();
  };
  d.on_dependent = [](const DerivAtom&) { return Expr(); };
  d.on_function = [](const DerivAtom&) { return Expr(); };
  return normalize(derive(e, d));
}

Expr partial_by_atom(const Expr& e, const ContextPtr& ctx, const DerivAtom& a) {
  DerivationAction d;
  d.on_symbol = [](const SymbolNode&) { return Expr(); };
  d.on_dependent = [&a](const DerivAtom& x) {
    return x == a ? Expr::constant(1) : Expr();
  };
  d.on_function = [&a, &ctx](const DerivAtom& x) -> Expr {
    // f^(p)(u) depends on the bare coordinate u only.
    if (a.base_kind == SymbolKind::Dependent && a.multi_index.empty() &&
        ctx->function_arg(x.base) == a.base) {
      DerivAtom fprime = x;
      fprime.prime_order += 1;
      return Expr::atom(std::move(fprime));
    }
    return Expr();
  };
  return normalize(derive(e, d));
}

// ---- substitution ---------------------------------------------------------------

namespace {

struct PreparedBinding {
  bool is_symbol = false;
  SymbolNode sym{SymbolKind::Independent, 0};
  DerivAtom atom;
  Expr value;
};

}  // namespace

Expr substitute(const Expr& e, const ContextPtr& ctx,
                const std::vector<Binding>& bindings) {
  std::vector<PreparedBinding> prepared;
  prepared.reserve(bindings.size());
  for (const auto& b : bindings) {
    PreparedBinding p;
    if (auto* s = node_as<SymbolNode>(b.key)) {
      p.is_symbol = true;
      p.sym = *s;
      if (contains_symbol(b.value, s->kind, s->index))
        throw CycleError("cyclic binding: value contains its own key");
    } else if (auto* d = node_as<DerivNode>(b.key)) {
      p.atom = d->atom;
      if (contains_atom_or_extension(b.value, d->atom))
        throw CycleError("cyclic binding: value contains its key or an extension of it");
    } else {
      throw SemanticError("substitution key must be a symbol or a derivative atom");
    }
    p.value = b.value;
    prepared.push_back(std::move(p));
  }

  std::function<Expr(const Expr&)> walk = [&](const Expr& x) -> Expr {
    return std::visit(
        [&](const auto& n) -> Expr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ConstantNode>) {
            return x;
          } else if constexpr (std::is_same_v<T, SymbolNode>) {
            for (const auto& p : prepared)
              if (p.is_symbol && p.sym.kind == n.kind && p.sym.index == n.index)
                return p.value;
            return x;
          } else if constexpr (std::is_same_v<T, DerivNode>) {
            const PreparedBinding* best = nullptr;
            for (const auto& p : prepared) {
              if (p.is_symbol) continue;
              if (!is_extension(p.atom, n.atom)) continue;
              if (p.atom.base_kind == SymbolKind::Function &&
                  p.atom.prime_order != n.atom.prime_order)
                continue;  // function keys match exactly
              if (!best || p.atom.multi_index.size() > best->atom.multi_index.size() ||
                  (p.atom.multi_index.size() == best->atom.multi_index.size() &&
                   p.atom.multi_index < best->atom.multi_index))
                best = &p;
            }
            if (!best) return x;
            // remaining derivatives = atom multi-index minus key multi-index
            std::vector<int> rest;
            std::size_t j = 0;
            for (int v : n.atom.multi_index) {
              if (j < best->atom.multi_index.size() && best->atom.multi_index[j] == v) {
                ++j;
              } else {
                rest.push_back(v);
              }
            }
            Expr out = best->value;
            for (int i : rest) out = total_derivative_raw(out, ctx, i);
            return out;
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
        x.node().v);
  };
  return walk(e);
}

Expr migrate(const Expr& e, const ContextPtr& from, const ContextPtr& to) {
  auto map_sym = [&](SymbolKind kind, int index) -> std::pair<SymbolKind, int> {
    const std::string& name = from->name_of(kind, index);
    auto hit = to->lookup(name);
    if (!hit) throw SemanticError("migrate: '" + name + "' not present in target context");
    if (hit->first != kind)
      throw SemanticError("migrate: '" + name + "' changed kind between contexts");
    return *hit;
  };
  std::function<Expr(const Expr&)> walk = [&](const Expr& x) -> Expr {
    return std::visit(
        [&](const auto& n) -> Expr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ConstantNode>) {
            return x;
          } else if constexpr (std::is_same_v<T, SymbolNode>) {
            auto [k, i] = map_sym(n.kind, n.index);
            return Expr::symbol(k, i);
          } else if constexpr (std::is_same_v<T, DerivNode>) {
            DerivAtom a = n.atom;
            auto [k, i] = map_sym(a.base_kind, a.base);
            a.base = i;
            for (int& m : a.multi_index) {
              auto [mk, mi] = map_sym(SymbolKind::Independent, m);
              (void)mk;
              m = mi;
            }
            return Expr::atom(std::move(a));
          } else if constexpr (std::is_same_v<T, SumNode>) {
            std::vector<Expr> out;
            for (const auto& t : n.terms) out.push_back(walk(t));
            return Expr::sum(std::move(out));
          } else if constexpr (std::is_same_v<T, ProductNode>) {
            std::vector<Expr> out;
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
        x.node().v);
  };
  return walk(e);
}

}  // namespace dred
