#include "dred/printer.hpp"

#include <string>
#include <vector>

namespace dred {

namespace {

enum Prec { kAdd = 0, kMul = 1, kUnary = 2, kPow = 3, kAtomPrec = 4 };

std::string print_at(const Expr& e, const ContextPtr& ctx, int prec);

std::string atom_text(const DerivAtom& a, const ContextPtr& ctx) {
  if (a.base_kind == SymbolKind::Function) {
    std::string s = ctx->function_name(a.base);
    s.append(static_cast<std::size_t>(a.prime_order), '\'');
    s += '(';
    s += ctx->dependent_name(ctx->function_arg(a.base));
    s += ')';
    return s;
  }
  const std::string& name = ctx->dependent_name(a.base);
  if (a.multi_index.empty()) return name;
  std::string s = "D(" + name;
  for (int i : a.multi_index) {
    s += ',';
    s += ctx->independent_name(i);
  }
  s += ')';
  return s;
}

// Splits a leading minus off a term so sums can render "a - b".
bool split_sign(const Expr& e, Expr& positive) {
  if (auto* n = node_as<NegNode>(e)) {
    positive = n->arg;
    return true;
  }
  if (auto* c = node_as<ConstantNode>(e)) {
    if (c->value < 0) {
      positive = Expr::constant(-c->value);
      return true;
    }
    return false;
  }
  if (auto* p = node_as<ProductNode>(e)) {
    if (!p->factors.empty() && p->factors[0].is_constant() &&
        p->factors[0].constant_value() < 0) {
      Rational c = -p->factors[0].constant_value();
      std::vector<Expr> fs(p->factors.begin() + 1, p->factors.end());
      if (c != 1) fs.insert(fs.begin(), Expr::constant(c));
      positive = Expr::product(std::move(fs));
      return true;
    }
  }
  return false;
}

std::string print_at(const Expr& e, const ContextPtr& ctx, int prec) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          std::string s = rat_to_string(n.value);
          if (n.value < 0 && prec > kAdd) return "(" + s + ")";
          return s;
        } else if constexpr (std::is_same_v<T, SymbolNode>) {
          return ctx->name_of(n.kind, n.index);
        } else if constexpr (std::is_same_v<T, DerivNode>) {
          return atom_text(n.atom, ctx);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          std::string s;
          for (std::size_t i = 0; i < n.terms.size(); ++i) {
            Expr pos;
            bool negative = split_sign(n.terms[i], pos);
            const Expr& term = negative ? pos : n.terms[i];
            if (i == 0) {
              if (negative) s += '-';
            } else {
              s += negative ? " - " : " + ";
            }
            s += print_at(term, ctx, kAdd + 1);
          }
          if (prec > kAdd) return "(" + s + ")";
          return s;
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          std::string s;
          for (std::size_t i = 0; i < n.factors.size(); ++i) {
            if (i) s += '*';
            s += print_at(n.factors[i], ctx, kMul + 1);
          }
          if (prec > kMul) return "(" + s + ")";
          return s;
        } else if constexpr (std::is_same_v<T, PowerNode>) {
          std::string s = print_at(n.base, ctx, kAtomPrec);
          s += '^';
          s += std::to_string(n.exponent);
          return s;
        } else if constexpr (std::is_same_v<T, LnNode>) {
          return "ln(" + print_at(n.arg, ctx, kAdd) + ")";
        } else if constexpr (std::is_same_v<T, ExpNode>) {
          return "exp(" + print_at(n.arg, ctx, kAdd) + ")";
        } else {
          static_assert(std::is_same_v<T, NegNode>);
          std::string s = "-" + print_at(n.arg, ctx, kUnary + 1);
          if (prec > kUnary) return "(" + s + ")";
          return s;
        }
      },
      e.node().v);
}

}  // namespace

std::string print(const Expr& e, const ContextPtr& ctx) {
  Expr positive;
  if (split_sign(e, positive)) {
    return "-" + print_at(positive, ctx, kUnary + 1);
  }
  return print_at(e, ctx, kAdd);
}

}  // namespace dred
