// Canonical normal form: expanded sums of monomials with exact rational
// coefficients over a totally ordered atom set.  Atoms are independent /
// parameter symbols, derivative atoms, ln(arg), exp(arg) and reciprocals of
// non-monomial bases; arguments and bases are themselves stored normalized,
// so structural comparison of normal forms decides equality.
//
// Simplification rules beyond ring arithmetic:
//   exp factors of one monomial merge:  exp(a)^j * exp(b)^k -> exp(j*a + k*b)
//   exp(k*ln(B) + rest) -> B^k * exp(rest)   for integer k
//   ln(exp(x)) -> x,  ln(1) -> 0,  exp(0) -> 1
//   (sum)^(-k) is kept as an opaque atom with rational content extracted;
//   equal bases cancel by exponent arithmetic.

#include <algorithm>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "dred/expr.hpp"

namespace dred {

namespace {

struct NExpr;
using NExprPtr = std::shared_ptr<const NExpr>;

enum class AtomTag { IndepSym, ParamSym, DepAtom, FuncAtom, Ln, Exp, SumPow };

struct NAtom {
  AtomTag tag = AtomTag::IndepSym;
  int sym = 0;       // IndepSym / ParamSym
  DerivAtom atom;    // DepAtom / FuncAtom
  NExprPtr arg;      // Ln / Exp / SumPow
};

struct NMono {
  // sorted by atom, exponents never zero
  std::vector<std::pair<NAtom, long>> factors;
};

struct NExpr {
  // sorted by monomial, coefficients never zero
  std::vector<std::pair<NMono, Rational>> terms;
};

int nexpr_cmp(const NExpr& a, const NExpr& b);

int natom_cmp(const NAtom& a, const NAtom& b) {
  if (a.tag != b.tag) return static_cast<int>(a.tag) < static_cast<int>(b.tag) ? -1 : 1;
  switch (a.tag) {
    case AtomTag::IndepSym:
    case AtomTag::ParamSym:
      if (a.sym != b.sym) return a.sym < b.sym ? -1 : 1;
      return 0;
    case AtomTag::DepAtom:
    case AtomTag::FuncAtom:
      return deriv_atom_cmp(a.atom, b.atom);
    case AtomTag::Ln:
    case AtomTag::Exp:
    case AtomTag::SumPow:
      return nexpr_cmp(*a.arg, *b.arg);
  }
  throw Error("bad atom tag");
}

int nmono_cmp(const NMono& a, const NMono& b) {
  std::size_t n = std::min(a.factors.size(), b.factors.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = natom_cmp(a.factors[i].first, b.factors[i].first)) return c;
    if (a.factors[i].second != b.factors[i].second)
      return a.factors[i].second < b.factors[i].second ? -1 : 1;
  }
  if (a.factors.size() != b.factors.size())
    return a.factors.size() < b.factors.size() ? -1 : 1;
  return 0;
}

int nexpr_cmp(const NExpr& a, const NExpr& b) {
  std::size_t n = std::min(a.terms.size(), b.terms.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = nmono_cmp(a.terms[i].first, b.terms[i].first)) return c;
    int rc = rat_cmp(a.terms[i].second, b.terms[i].second);
    if (rc) return rc < 0 ? -1 : 1;
  }
  if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size() ? -1 : 1;
  return 0;
}

NExpr n_zero() { return NExpr{}; }

NExpr n_const(Rational c) {
  NExpr e;
  if (c != 0) e.terms.push_back({NMono{}, std::move(c)});
  return e;
}

bool n_is_one(const NExpr& e) {
  return e.terms.size() == 1 && e.terms[0].first.factors.empty() && e.terms[0].second == 1;
}

NExpr n_add(const NExpr& a, const NExpr& b) {
  NExpr out;
  std::size_t i = 0, j = 0;
  while (i < a.terms.size() || j < b.terms.size()) {
    int c;
    if (i >= a.terms.size())
      c = 1;
    else if (j >= b.terms.size())
      c = -1;
    else
      c = nmono_cmp(a.terms[i].first, b.terms[j].first);
    if (c < 0) {
      out.terms.push_back(a.terms[i++]);
    } else if (c > 0) {
      out.terms.push_back(b.terms[j++]);
    } else {
      Rational s = a.terms[i].second + b.terms[j].second;
      if (s != 0) out.terms.push_back({a.terms[i].first, std::move(s)});
      ++i;
      ++j;
    }
  }
  return out;
}

NExpr n_scale(const NExpr& a, const Rational& c) {
  if (c == 0) return n_zero();
  NExpr out = a;
  for (auto& t : out.terms) t.second *= c;
  return out;
}

NExpr n_mul(const NExpr& a, const NExpr& b);
NExpr n_pow(const NExpr& a, long k);

// Builds a normalized term from a raw factor map, triggering exp merging,
// exp(k*ln B) folding and positive sum-power expansion as needed.
NExpr finalize_term(Rational coeff, std::map<NAtom, long, bool (*)(const NAtom&, const NAtom&)>& fmap);

bool natom_less(const NAtom& a, const NAtom& b) { return natom_cmp(a, b) < 0; }

using FactorMap = std::map<NAtom, long, bool (*)(const NAtom&, const NAtom&)>;

FactorMap empty_factor_map() { return FactorMap(&natom_less); }

void add_factor(FactorMap& m, const NAtom& a, long exp) {
  if (exp == 0) return;
  auto [it, inserted] = m.emplace(a, exp);
  if (!inserted) {
    it->second += exp;
    if (it->second == 0) m.erase(it);
  }
}

// exp-argument post-processing: extract integer multiples of lone ln atoms.
// Returns the product of the extracted B^k parts; `arg` keeps the rest.
NExpr extract_ln_powers(NExpr& arg) {
  NExpr multiplier = n_const(Rational(1));
  NExpr rest;
  for (const auto& [mono, coeff] : arg.terms) {
    if (mono.factors.size() == 1 && mono.factors[0].first.tag == AtomTag::Ln &&
        mono.factors[0].second == 1 && rat_is_integer(coeff) &&
        coeff.get_num().fits_slong_p()) {
      long k = coeff.get_num().get_si();
      multiplier = n_mul(multiplier, n_pow(*mono.factors[0].first.arg, k));
    } else {
      rest.terms.push_back({mono, coeff});
    }
  }
  arg = std::move(rest);
  return multiplier;
}

NExpr finalize_term(Rational coeff, FactorMap& fmap) {
  if (coeff == 0) return n_zero();

  // Merge all exp factors into a single exp atom.
  NExpr exp_arg = n_zero();
  bool have_exp = false;
  for (auto it = fmap.begin(); it != fmap.end();) {
    if (it->first.tag == AtomTag::Exp) {
      have_exp = true;
      exp_arg = n_add(exp_arg, n_scale(*it->first.arg, Rational(it->second)));
      it = fmap.erase(it);
    } else {
      ++it;
    }
  }

  std::vector<NExpr> multipliers;
  if (have_exp) {
    NExpr m = extract_ln_powers(exp_arg);
    if (!n_is_one(m)) multipliers.push_back(std::move(m));
    if (!exp_arg.terms.empty()) {
      NAtom e;
      e.tag = AtomTag::Exp;
      e.arg = std::make_shared<const NExpr>(std::move(exp_arg));
      add_factor(fmap, e, 1);
    }
  }

  // Expand sum-power factors whose exponent became non-negative.
  for (auto it = fmap.begin(); it != fmap.end();) {
    if (it->first.tag == AtomTag::SumPow && it->second > 0) {
      multipliers.push_back(n_pow(*it->first.arg, it->second));
      it = fmap.erase(it);
    } else {
      ++it;
    }
  }

  NMono mono;
  mono.factors.assign(fmap.begin(), fmap.end());
  NExpr out;
  out.terms.push_back({std::move(mono), std::move(coeff)});
  for (const auto& m : multipliers) out = n_mul(out, m);
  return out;
}

NExpr n_mul_term(const NMono& ma, const Rational& ca, const NMono& mb, const Rational& cb) {
  FactorMap fmap = empty_factor_map();
  for (const auto& [a, e] : ma.factors) add_factor(fmap, a, e);
  for (const auto& [a, e] : mb.factors) add_factor(fmap, a, e);
  return finalize_term(ca * cb, fmap);
}

NExpr n_mul(const NExpr& a, const NExpr& b) {
  NExpr out;
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms)
      out = n_add(out, n_mul_term(ma, ca, mb, cb));
  return out;
}

// Inverts a single-term expression exactly.
NExpr n_invert_term(const NMono& m, const Rational& c) {
  if (c == 0) throw Error("reciprocal of zero");
  FactorMap fmap = empty_factor_map();
  for (const auto& [a, e] : m.factors) add_factor(fmap, a, -e);
  return finalize_term(Rational(1) / c, fmap);
}

NExpr n_pow(const NExpr& a, long k) {
  if (k == 0) return n_const(Rational(1));
  if (a.terms.empty()) {
    if (k < 0) throw Error("reciprocal of zero");
    return n_zero();
  }
  if (k > 0) {
    NExpr out = n_const(Rational(1));
    NExpr base = a;
    long e = k;
    while (e > 0) {
      if (e & 1) out = n_mul(out, base);
      if (e >>= 1) base = n_mul(base, base);
    }
    return out;
  }
  // negative exponent
  if (a.terms.size() == 1) {
    NExpr inv = n_invert_term(a.terms[0].first, a.terms[0].second);
    return n_pow(inv, -k);
  }
  // multi-term base: extract rational content, keep an opaque reciprocal atom
  Rational content = a.terms[0].second;
  NExpr base = n_scale(a, Rational(1) / content);
  NAtom sp;
  sp.tag = AtomTag::SumPow;
  sp.arg = std::make_shared<const NExpr>(std::move(base));
  FactorMap fmap = empty_factor_map();
  add_factor(fmap, sp, k);
  return finalize_term(rat_pow(content, k), fmap);
}

NExpr n_ln(const NExpr& a) {
  if (n_is_one(a)) return n_zero();
  if (a.terms.size() == 1 && a.terms[0].second == 1 &&
      a.terms[0].first.factors.size() == 1 &&
      a.terms[0].first.factors[0].first.tag == AtomTag::Exp &&
      a.terms[0].first.factors[0].second == 1) {
    return *a.terms[0].first.factors[0].first.arg;  // ln(exp(x)) = x
  }
  NAtom l;
  l.tag = AtomTag::Ln;
  l.arg = std::make_shared<const NExpr>(a);
  FactorMap fmap = empty_factor_map();
  add_factor(fmap, l, 1);
  return finalize_term(Rational(1), fmap);
}

NExpr n_exp(const NExpr& a) {
  if (a.terms.empty()) return n_const(Rational(1));
  NExpr arg = a;
  NExpr multiplier = extract_ln_powers(arg);
  if (arg.terms.empty()) return multiplier;
  NAtom e;
  e.tag = AtomTag::Exp;
  e.arg = std::make_shared<const NExpr>(std::move(arg));
  FactorMap fmap = empty_factor_map();
  add_factor(fmap, e, 1);
  return n_mul(multiplier, finalize_term(Rational(1), fmap));
}

NExpr to_normal(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> NExpr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          return n_const(n.value);
        } else if constexpr (std::is_same_v<T, SymbolNode>) {
          NAtom a;
          a.tag = n.kind == SymbolKind::Independent ? AtomTag::IndepSym : AtomTag::ParamSym;
          a.sym = n.index;
          FactorMap fmap = empty_factor_map();
          add_factor(fmap, a, 1);
          return finalize_term(Rational(1), fmap);
        } else if constexpr (std::is_same_v<T, DerivNode>) {
          NAtom a;
          a.tag = n.atom.base_kind == SymbolKind::Dependent ? AtomTag::DepAtom
                                                            : AtomTag::FuncAtom;
          a.atom = n.atom;
          FactorMap fmap = empty_factor_map();
          add_factor(fmap, a, 1);
          return finalize_term(Rational(1), fmap);
        } else if constexpr (std::is_same_v<T, SumNode>) {
          NExpr out;
          for (const auto& t : n.terms) out = n_add(out, to_normal(t));
          return out;
        } else if constexpr (std::is_same_v<T, ProductNode>) {
          NExpr out = n_const(Rational(1));
          for (const auto& f : n.factors) {
            out = n_mul(out, to_normal(f));
            if (out.terms.empty()) return out;
          }
          return out;
        } else if constexpr (std::is_same_v<T, PowerNode>) {
          return n_pow(to_normal(n.base), n.exponent);
        } else if constexpr (std::is_same_v<T, LnNode>) {
          return n_ln(to_normal(n.arg));
        } else if constexpr (std::is_same_v<T, ExpNode>) {
          return n_exp(to_normal(n.arg));
        } else {
          static_assert(std::is_same_v<T, NegNode>);
          return n_scale(to_normal(n.arg), Rational(-1));
        }
      },
      e.node().v);
}

Expr emit(const NExpr& n);

Expr emit_atom(const NAtom& a) {
  switch (a.tag) {
    case AtomTag::IndepSym:
      return Expr::symbol(SymbolKind::Independent, a.sym);
    case AtomTag::ParamSym:
      return Expr::symbol(SymbolKind::Parameter, a.sym);
    case AtomTag::DepAtom:
    case AtomTag::FuncAtom:
      return Expr::atom(a.atom);
    case AtomTag::Ln:
      return Expr::ln(emit(*a.arg));
    case AtomTag::Exp:
      return Expr::exp(emit(*a.arg));
    case AtomTag::SumPow:
      return emit(*a.arg);  // exponent applied by the caller
  }
  throw Error("bad atom tag");
}

Expr emit_term(const NMono& m, const Rational& c) {
  std::vector<Expr> factors;
  if (m.factors.empty()) return Expr::constant(c);
  if (c != 1) factors.push_back(Expr::constant(c));
  for (const auto& [a, e] : m.factors) factors.push_back(Expr::power(emit_atom(a), e));
  return Expr::product(std::move(factors));
}

Expr emit(const NExpr& n) {
  if (n.terms.empty()) return Expr();
  std::vector<Expr> terms;
  terms.reserve(n.terms.size());
  for (const auto& [m, c] : n.terms) terms.push_back(emit_term(m, c));
  return Expr::sum(std::move(terms));
}

}  // namespace

Expr normalize(const Expr& e) { return emit(to_normal(e)); }

namespace {

// A sum with reciprocal atoms can hide a zero across terms
// (x*(x+y)^-1 + y*(x+y)^-1 - 1).  Multiplying through by each reciprocal
// base at the atom level clears the denominators: exponents merge first,
// and only then do the surviving positive powers expand, so base/reciprocal
// pairs cancel exactly.  Nested reciprocals unwrap one level per pass.
bool n_is_zero(NExpr n) {
  for (;;) {
    if (n.terms.empty()) return true;
    FactorMap need = empty_factor_map();
    for (const auto& [mono, coeff] : n.terms) {
      for (const auto& [a, e] : mono.factors) {
        if (a.tag == AtomTag::SumPow && e < 0) {
          auto [it, inserted] = need.emplace(a, -e);
          if (!inserted) it->second = std::max(it->second, -e);
        }
      }
    }
    if (need.empty()) return false;
    NMono denom;
    denom.factors.assign(need.begin(), need.end());
    NExpr cleared;
    for (const auto& [mono, coeff] : n.terms)
      cleared = n_add(cleared, n_mul_term(mono, coeff, denom, Rational(1)));
    n = std::move(cleared);
  }
}

}  // namespace

bool is_zero_normal(const Expr& e) { return n_is_zero(to_normal(e)); }

Expr strip_content(const Expr& e) {
  NExpr n = to_normal(e);
  if (n.terms.empty()) return Expr();
  // common factor exponents: min over all terms (0 when absent)
  FactorMap common = empty_factor_map();
  for (const auto& [a, exp] : n.terms[0].first.factors) add_factor(common, a, exp);
  for (std::size_t t = 1; t < n.terms.size() && !common.empty(); ++t) {
    FactorMap next = empty_factor_map();
    for (const auto& [a, exp] : n.terms[t].first.factors) add_factor(next, a, exp);
    for (auto it = common.begin(); it != common.end();) {
      auto hit = next.find(it->first);
      long other = hit == next.end() ? 0 : hit->second;
      long m = std::min(it->second, other);
      if (m == 0) {
        it = common.erase(it);
      } else {
        it->second = m;
        ++it;
      }
    }
  }
  NMono divisor;
  divisor.factors.assign(common.begin(), common.end());
  NExpr inv = n_invert_term(divisor, n.terms[0].second);
  return emit(n_mul(n, inv));
}

}  // namespace dred
