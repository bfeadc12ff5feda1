#include "doctest.h"

#include "dred/context.hpp"
#include "dred/expr.hpp"

namespace dred {
namespace {

ContextPtr wave_ctx() {
  return ContextBuilder()
      .independent("t")
      .independent("x")
      .independent("y")
      .dependent("u")
      .parameter("c1")
      .parameter("c2")
      .function("f", "u")
      .function("g", "u")
      .build();
}

Expr sym(const ContextPtr& ctx, const std::string& name) {
  auto found = ctx->lookup(name);
  REQUIRE(found.has_value());
  return Expr::symbol(found->first, found->second);
}

Expr dep(const ContextPtr& ctx, const std::string& name, std::vector<int> multi = {}) {
  auto found = ctx->lookup(name);
  REQUIRE(found.has_value());
  REQUIRE(found->second >= 0);
  return Expr::atom(DerivAtom{SymbolKind::Dependent, found->second, std::move(multi), 0});
}

Expr fn(const ContextPtr& ctx, const std::string& name, int primes = 0) {
  auto found = ctx->lookup(name);
  REQUIRE(found.has_value());
  return Expr::atom(DerivAtom{SymbolKind::Function, found->second, {}, primes});
}

bool same(const Expr& a, const Expr& b) {
  return expr_cmp(normalize(a), normalize(b)) == 0;
}

TEST_CASE("normal form collects and cancels") {
  auto ctx = wave_ctx();
  Expr x = sym(ctx, "x");
  Expr u = dep(ctx, "u");

  CHECK(same(x + x, Expr::constant(2) * x));
  CHECK(is_zero_normal(u * u - Expr::power(u, 2)));
  CHECK(is_zero_normal(x - x));
  CHECK(same((x + u) * (x - u), Expr::power(x, 2) - Expr::power(u, 2)));
  CHECK(same(Expr::power(Expr::power(x, 2), 3), Expr::power(x, 6)));
  CHECK(same(x / x, Expr::constant(1)));
  CHECK(same(Expr::constant(rat(2, 3)) * Expr::constant(3), Expr::constant(2)));
  CHECK(normalize(x + x) == normalize(Expr::constant(2) * x));  // shared canonical shape
}

TEST_CASE("normalize is idempotent") {
  auto ctx = wave_ctx();
  Expr x = sym(ctx, "x");
  Expr u = dep(ctx, "u");
  Expr e = (x + u) * Expr::power(x - u, 2) - Expr::ln(Expr::exp(x)) / (u + x);
  Expr n = normalize(e);
  CHECK(expr_cmp(n, normalize(n)) == 0);
}

TEST_CASE("ln and exp structural rules") {
  auto ctx = wave_ctx();
  Expr x = sym(ctx, "x");
  Expr y = sym(ctx, "y");

  CHECK(same(Expr::ln(Expr::exp(x)), x));
  CHECK(same(Expr::exp(Expr::ln(x)), x));
  CHECK(is_zero_normal(Expr::ln(Expr::constant(1))));
  CHECK(same(Expr::exp(Expr::constant(0)), Expr::constant(1)));
  CHECK(same(Expr::exp(Expr::ln(x) + Expr::ln(y)), x * y));
  CHECK(same(Expr::exp(Expr::constant(2) * Expr::ln(x)), Expr::power(x, 2)));
  CHECK(same(Expr::exp(x) * Expr::exp(-x), Expr::constant(1)));
  CHECK(same(Expr::exp(x) * Expr::exp(y), Expr::exp(x + y)));
  // non-integer ln multiples stay under exp
  Expr half = Expr::constant(rat(1, 2)) * Expr::ln(x);
  CHECK_FALSE(is_zero_normal(Expr::exp(half) - x));
}

TEST_CASE("sum reciprocals cancel in the zero test") {
  auto ctx = wave_ctx();
  Expr x = sym(ctx, "x");
  Expr y = sym(ctx, "y");
  Expr s = x + y;

  CHECK(is_zero_normal(Expr::power(s, -1) * s - Expr::constant(1)));
  CHECK(is_zero_normal(Expr::power(s, -2) * s - Expr::power(s, -1)));
  CHECK(is_zero_normal(Expr::power(Expr::constant(2) * x + Expr::constant(2) * y, -1) * s -
                       Expr::constant(rat(1, 2))));
  CHECK(is_zero_normal(Expr::power(s, -2) * Expr::power(s, 3) - s));
  CHECK_FALSE(is_zero_normal(Expr::power(s, -1) * s - Expr::constant(2)));
  CHECK_FALSE(is_zero_normal(Expr::power(s, -1)));
  // reciprocals normalize with unit leading coefficient, so scalar multiples
  // of the same base share one atom
  CHECK(same(Expr::power(Expr::constant(2) * x + Expr::constant(2) * y, -1) *
                 Expr::constant(2),
             Expr::power(s, -1)));
  // nested reciprocals unwrap one level per clearing pass
  Expr nested = Expr::power(x + Expr::power(s, -1), -1);
  CHECK(is_zero_normal(nested * (x + Expr::power(s, -1)) - Expr::constant(1)));
}

TEST_CASE("total derivatives commute") {
  auto ctx = wave_ctx();
  Expr u = dep(ctx, "u");
  Expr ux = dep(ctx, "u", {1});
  Expr e = fn(ctx, "f") * ux + Expr::power(u, 3);

  Expr dtdx = total_derivative(e, ctx, {0, 1});
  Expr dxdt = total_derivative(e, ctx, {1, 0});
  CHECK(expr_cmp(dtdx, dxdt) == 0);
  CHECK_FALSE(is_zero_normal(dtdx));
}

TEST_CASE("total derivative applies chain and Leibniz rules") {
  auto ctx = wave_ctx();
  Expr u = dep(ctx, "u");
  Expr ut = dep(ctx, "u", {0});
  Expr ux = dep(ctx, "u", {1});
  Expr utx = dep(ctx, "u", {0, 1});
  Expr f = fn(ctx, "f");
  Expr fp = fn(ctx, "f", 1);

  CHECK(same(total_derivative(f, ctx, {0}), fp * ut));
  CHECK(same(total_derivative(f * ux, ctx, {0}), fp * ut * ux + f * utx));
  CHECK(same(total_derivative(Expr::ln(u), ctx, {1}), ux / u));
  CHECK(same(total_derivative(Expr::exp(u), ctx, {1}), Expr::exp(u) * ux));
  CHECK(same(total_derivative(sym(ctx, "x"), ctx, {1}), Expr::constant(1)));
  CHECK(is_zero_normal(total_derivative(sym(ctx, "x"), ctx, {0})));
  CHECK(is_zero_normal(total_derivative(sym(ctx, "c1"), ctx, {0})));
}

TEST_CASE("dependency masks cut derivatives") {
  auto ctx = ContextBuilder()
                 .independent("q")
                 .independent("r")
                 .independent("s")
                 .dependent("w", {"r", "s"})
                 .build();
  Expr w = Expr::atom(DerivAtom{SymbolKind::Dependent, 0, {}, 0});
  CHECK(is_zero_normal(total_derivative(w, ctx, {0})));
  CHECK_FALSE(is_zero_normal(total_derivative(w, ctx, {1})));
}

TEST_CASE("jet partials treat coordinates independently") {
  auto ctx = wave_ctx();
  Expr u = dep(ctx, "u");
  Expr ux = dep(ctx, "u", {1});
  Expr f = fn(ctx, "f");
  Expr e = f * ux + Expr::power(u, 2) * ux;

  DerivAtom a_ux{SymbolKind::Dependent, 0, {1}, 0};
  DerivAtom a_u{SymbolKind::Dependent, 0, {}, 0};
  CHECK(same(partial_by_atom(e, ctx, a_ux), f + Expr::power(u, 2)));
  CHECK(same(partial_by_atom(e, ctx, a_u),
             fn(ctx, "f", 1) * ux + Expr::constant(2) * u * ux));
  CHECK(is_zero_normal(partial_by_symbol(e, SymbolKind::Independent, 0)));
  CHECK(same(partial_by_symbol(sym(ctx, "x") * u, SymbolKind::Independent, 1), u));
}

TEST_CASE("substitution extends derivative bindings") {
  auto ctx = wave_ctx();
  Expr t = sym(ctx, "t");
  Expr x = sym(ctx, "x");
  Expr u = dep(ctx, "u");
  Expr ut = dep(ctx, "u", {0});
  Expr ux = dep(ctx, "u", {1});

  // u -> t*x, so u_t -> x and u_x -> t
  std::vector<Binding> b{{u, t * x}};
  CHECK(same(substitute(ut * ux, ctx, b), t * x));
  CHECK(same(substitute(fn(ctx, "f"), ctx, b), fn(ctx, "f")));

  // the longest matching key wins over the base binding
  std::vector<Binding> b2{{u, t * x}, {ut, Expr::constant(7)}};
  CHECK(same(substitute(ut, ctx, b2), Expr::constant(7)));

  // parameters substitute directly
  std::vector<Binding> b3{{sym(ctx, "c1"), Expr::constant(rat(1, 2))}};
  CHECK(same(substitute(sym(ctx, "c1") * x, ctx, b3), Expr::constant(rat(1, 2)) * x));
}

TEST_CASE("substitution rejects self-referential bindings") {
  auto ctx = wave_ctx();
  Expr u = dep(ctx, "u");
  Expr ut = dep(ctx, "u", {0});
  CHECK_THROWS_AS(substitute(u, ctx, {{u, u + sym(ctx, "x")}}), CycleError);
  CHECK_THROWS_AS(substitute(u, ctx, {{u, ut}}), CycleError);
}

TEST_CASE("migration maps symbols by name") {
  auto a = ContextBuilder().independent("t").independent("x").dependent("u").build();
  auto b = ContextBuilder().independent("x").independent("t").dependent("u").build();
  Expr e = Expr::atom(DerivAtom{SymbolKind::Dependent, 0, {0, 1}, 0}) *
           Expr::symbol(SymbolKind::Independent, 0);  // u_tx * t in a
  Expr m = migrate(e, a, b);
  Expr expected = Expr::atom(DerivAtom{SymbolKind::Dependent, 0, {0, 1}, 0}) *
                  Expr::symbol(SymbolKind::Independent, 1);  // u_xt * t in b
  CHECK(expr_cmp(normalize(m), normalize(expected)) == 0);

  auto c = ContextBuilder().independent("t").dependent("x").dependent("u").build();
  CHECK_THROWS_AS(migrate(e, a, c), SemanticError);
}

TEST_CASE("strip_content divides out the common monomial") {
  auto ctx = wave_ctx();
  Expr x = sym(ctx, "x");
  Expr y = sym(ctx, "y");
  Expr e = Expr::constant(2) * x * y + Expr::constant(4) * Expr::power(x, 2);
  CHECK(same(strip_content(e), y + Expr::constant(2) * x));
  CHECK(is_zero_normal(strip_content(Expr::constant(0))));
  // negative powers count toward the common factor
  Expr r = Expr::power(x, -2) * y + Expr::power(x, -1);
  CHECK(same(strip_content(r), y + x));
}

TEST_CASE("queries see every atom") {
  auto ctx = wave_ctx();
  Expr u = dep(ctx, "u");
  Expr utt = dep(ctx, "u", {0, 0});
  Expr e = Expr::exp(utt) * Expr::power(sym(ctx, "c1") + u, -1);

  CHECK(contains_symbol(e, SymbolKind::Parameter, 0));
  CHECK_FALSE(contains_symbol(e, SymbolKind::Parameter, 1));
  CHECK(contains_dependent_atoms(e));
  CHECK(max_derivative_order(e) == 2);
  CHECK(max_derivative_order(fn(ctx, "g", 3)) == 3);

  DerivAtom base{SymbolKind::Dependent, 0, {}, 0};
  DerivAtom a_ut{SymbolKind::Dependent, 0, {0}, 0};
  DerivAtom a_ux{SymbolKind::Dependent, 0, {1}, 0};
  CHECK(contains_atom_or_extension(e, base));
  CHECK(contains_atom_or_extension(e, a_ut));   // u_tt extends u_t
  CHECK_FALSE(contains_atom_or_extension(e, a_ux));
}

}  // namespace
}  // namespace dred
