#include <string>
#include <vector>

#include "doctest.h"

#include "dred/context.hpp"
#include "dred/expr.hpp"
#include "dred/parser.hpp"
#include "dred/printer.hpp"

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

TEST_CASE("parser resolves declared symbols and derivatives") {
  auto ctx = wave_ctx();
  CHECK(expr_cmp(parse("u_tx", ctx), parse("D(u,t,x)", ctx)) == 0);
  CHECK(expr_cmp(parse("u_tx", ctx), parse("D(u,x,t)", ctx)) == 0);
  CHECK(expr_cmp(parse("D(D(u,t),x)", ctx), parse("u_xt", ctx)) == 0);
  CHECK(expr_cmp(parse("u", ctx),
                 Expr::atom(DerivAtom{SymbolKind::Dependent, 0, {}, 0})) == 0);
  CHECK(expr_cmp(parse("f''(u)", ctx),
                 Expr::atom(DerivAtom{SymbolKind::Function, 0, {}, 2})) == 0);
  CHECK(expr_cmp(parse("c2", ctx), Expr::symbol(SymbolKind::Parameter, 1)) == 0);
}

TEST_CASE("derivative operator is eager") {
  auto ctx = wave_ctx();
  CHECK(expr_cmp(parse("D(f(u),t)", ctx), parse("f'(u)*u_t", ctx)) == 0);
  CHECK(expr_cmp(parse("D(u*u,x)", ctx), parse("2*u*u_x", ctx)) == 0);
  CHECK(expr_cmp(parse("D(f(u)*u_x,x)", ctx),
                 parse("f'(u)*u_x^2 + f(u)*u_xx", ctx)) == 0);
  CHECK(expr_cmp(parse("D(x*t,t)", ctx), parse("x", ctx)) == 0);
  CHECK(is_zero_normal(parse("D(c1*u,y) - c1*u_y", ctx)));
}

TEST_CASE("precedence and associativity") {
  auto ctx = wave_ctx();
  CHECK(is_zero_normal(parse("-u^2 + (0 - 1)*u^2 - (-2)*u^2", ctx)));
  CHECK(is_zero_normal(parse("2*x + 3*x - 5*x", ctx)));
  CHECK(is_zero_normal(parse("x - y - y - (x - 2*y)", ctx)));
  CHECK(is_zero_normal(parse("x/2/y - x*(2*y)^-1", ctx)));
  CHECK(is_zero_normal(parse("x^-2 - x^(-2)", ctx)));
  CHECK(is_zero_normal(parse("x^2^3 - x^8", ctx)));
  CHECK(is_zero_normal(parse("2*u^2 - 2*u*u", ctx)));
  CHECK(is_zero_normal(parse("ln(exp(t)) - t", ctx)));
}

TEST_CASE("printing is a parse fixpoint") {
  auto ctx = wave_ctx();
  const std::vector<std::string> inputs = {
      "u",
      "-u_t",
      "f(u)*u_x",
      "g(u)*u_y",
      "u_tt - D(f(u)*u_x,x) - D(g(u)*u_y,y)",
      "c1*c2*u_tx + u^3 - 2/3*x",
      "(x + y)^-1",
      "(2*x + 2*y)^-2",
      "exp(2*u) * ln(x)",
      "x/y - y/x",
      "t*x*y*u_txy",
  };
  for (const auto& s : inputs) {
    CAPTURE(s);
    Expr e = parse(s, ctx);
    const std::string once = print(e, ctx);
    Expr back = parse(once, ctx);
    CHECK(expr_cmp(e, back) == 0);
    CHECK(print(back, ctx) == once);
  }
}

TEST_CASE("printed shapes are stable") {
  auto ctx = wave_ctx();
  CHECK(print(parse("x+x", ctx), ctx) == "2*x");
  CHECK(print(parse("u_t*(0-1)", ctx), ctx) == "-D(u,t)");
  CHECK(print(parse("x - y", ctx), ctx) == "x - y");
  CHECK(print(parse("4/6", ctx), ctx) == "2/3");
  CHECK(print(parse("0*x", ctx), ctx) == "0");
  CHECK(print(parse("f'(u)", ctx), ctx) == "f'(u)");
}

TEST_CASE("parse errors carry positions") {
  auto ctx = wave_ctx();
  auto pos_of = [&](const std::string& s) -> std::size_t {
    try {
      parse(s, ctx);
    } catch (const ParseError& e) {
      return e.position;
    }
    FAIL("expected a parse error for: " << s);
    return static_cast<std::size_t>(-1);
  };

  CHECK(pos_of("u_t + zz") == 6);
  CHECK(pos_of("u_tz") == 0);
  CHECK(pos_of("D(t,x)") == 2);
  CHECK(pos_of("D(c1,t)") == 2);
  CHECK(pos_of("D(u)") == 3);
  CHECK(pos_of("f(x)") == 2);
  CHECK(pos_of("g(2*u)") == 2);
  CHECK(pos_of("u'") == 0);
  CHECK(pos_of("x^y") == 2);
  CHECK(pos_of("x^(2/3)") == 4);
  CHECK(pos_of("x +") == 3);
  CHECK(pos_of("x) + y") == 1);
  CHECK(pos_of("(x + y") == 6);
  CHECK(pos_of("x $ y") == 2);
  CHECK_THROWS_AS(parse("h(u)", ctx), ParseError);
  CHECK_THROWS_AS(parse("", ctx), ParseError);
}

TEST_CASE("shorthand needs single-character independents") {
  auto ctx = ContextBuilder()
                 .independent("tau")
                 .independent("x")
                 .dependent("u")
                 .build();
  CHECK_THROWS_AS(parse("u_x", ctx), ParseError);
  CHECK(expr_cmp(parse("D(u,x)", ctx),
                 Expr::atom(DerivAtom{SymbolKind::Dependent, 0, {1}, 0})) == 0);
}

TEST_CASE("shorthand respects dependency masks") {
  auto ctx = ContextBuilder()
                 .independent("q")
                 .independent("r")
                 .dependent("w", {"r"})
                 .build();
  CHECK_THROWS_AS(parse("w_q", ctx), ParseError);
  CHECK(is_zero_normal(parse("D(w,q)", ctx)));
  CHECK_FALSE(is_zero_normal(parse("w_r", ctx)));
}

}  // namespace
}  // namespace dred
