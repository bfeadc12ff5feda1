#include <sstream>
#include <string>

#include "doctest.h"

#include "dred/coordinates.hpp"
#include "dred/error.hpp"
#include "dred/parser.hpp"
#include "dred/printer.hpp"
#include "dred/problem.hpp"

namespace dred {
namespace {

Problem from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_problem(in, "mem");
}

TEST_CASE("the bundled wave problem loads") {
  Problem p = load_problem(DRED_PROBLEM_DIR "/wave2p1.problem");

  CHECK(p.ctx->independent_count() == 3);
  CHECK(p.ctx->dependent_count() == 1);
  CHECK(p.ctx->parameter_count() == 2);
  CHECK(p.ctx->function_count() == 2);
  REQUIRE(p.generators.size() == 4);
  CHECK(p.generators[0].first == "X1");
  CHECK(p.generators[3].first == "X4");
  CHECK(print(p.generators[3].second.xi[0], p.ctx) == "t");
  CHECK(print(p.generators[3].second.eta[0], p.ctx) == "0");

  REQUIRE(p.system.leads.size() == 1);
  CHECK(print(Expr::atom(p.system.leads[0]), p.ctx) == "D(u,t,t)");
  REQUIRE(p.conserved.size() == 3);
  CHECK(print(normalize(p.conserved[0]), p.ctx) == "-D(u,t)");

  REQUIRE(p.strategy.has_value());
  CHECK(*p.strategy == Strategy::UserCombination);
  REQUIRE(p.combos.size() == 2);
  CHECK(p.combos[0] == "X1 + c1*X2 + c2*X3");
  CHECK(p.combos[1] == "X4");
  CHECK(p.changes.empty());

  CHECK(check_divergence(p.conserved, p.system).conserved);
}

TEST_CASE("the loaded problem drives the full reduction") {
  Problem p = load_problem(DRED_PROBLEM_DIR "/wave2p1.problem");
  PipelineOptions opt;
  opt.strategy = *p.strategy;
  opt.combos = p.combos;
  ReductionTrace trace = run_pipeline(p.system, p.conserved, p.generators, opt);
  REQUIRE(trace.complete);
  auto fctx = trace.final_system.ctx;
  CHECK(guarded_equal(
      trace.integral->lhs,
      parse("v_n*(-c2^2*n^2 + 2*c1*c2*n + n^2*g(v) - c1^2 + f(v))", fctx),
      fctx));
}

TEST_CASE("missing sections are reported together") {
  CHECK_THROWS_WITH_AS(
      (void)from_text(""),
      "mem: missing required sections: vars, deps, pde, conserved",
      SemanticError);
  CHECK_THROWS_WITH_AS(
      (void)from_text("vars t x\ndeps u\n"),
      "mem: missing required sections: pde, conserved", SemanticError);
}

TEST_CASE("expression errors carry the line and the offending name") {
  std::string text =
      "vars t x\n"
      "deps u\n"
      "pde lead=D(u,t,t): D(u,t,t) - z\n"
      "conserved -D(u,t) ; D(u,x)\n";
  CHECK_THROWS_WITH_AS((void)from_text(text), doctest::Contains("mem:3"),
                       SemanticError);
  CHECK_THROWS_WITH_AS((void)from_text(text), doctest::Contains("z"),
                       SemanticError);
}

TEST_CASE("section-level diagnostics") {
  std::string base =
      "vars t x\n"
      "deps u\n"
      "pde lead=D(u,t,t): D(u,t,t) - D(u,x,x)\n"
      "conserved -D(u,t) ; D(u,x)\n";

  CHECK_THROWS_WITH_AS((void)from_text(base + "orbit t\n"),
                       doctest::Contains("unknown section 'orbit'"),
                       SemanticError);
  CHECK_THROWS_WITH_AS((void)from_text(base + "sym X1: xi_z = 1\n"),
                       doctest::Contains("unknown coefficient 'xi_z'"),
                       SemanticError);
  CHECK_THROWS_WITH_AS(
      (void)from_text(base + "sym X1: xi_t = 1\nsym X1: xi_x = 1\n"),
      doctest::Contains("duplicate generator name 'X1'"), SemanticError);
  CHECK_THROWS_WITH_AS((void)from_text(base + "vars t x\n"),
                       doctest::Contains("duplicate 'vars' line"),
                       SemanticError);
  CHECK_THROWS_WITH_AS((void)from_text(base + "strategy sideways\n"),
                       doctest::Contains("expected 'first', 'exhaustive'"),
                       SemanticError);
  CHECK_THROWS_WITH_AS((void)from_text(base + "inverse 1: t = q\n"),
                       doctest::Contains("no 'change 1:' line"), SemanticError);
  CHECK_THROWS_WITH_AS((void)from_text(base + "pde: D(u,t)\n"),
                       doctest::Contains("lead=<derivative>"), SemanticError);

  std::string bad_count =
      "vars t x\n"
      "deps u\n"
      "pde lead=D(u,t,t): D(u,t,t) - D(u,x,x)\n"
      "conserved -D(u,t)\n";
  CHECK_THROWS_WITH_AS((void)from_text(bad_count),
                       doctest::Contains("one component per"), SemanticError);
}

TEST_CASE("a declared change overrides the construction for its stage") {
  std::string text =
      "vars t x y\n"
      "deps u\n"
      "params c1 c2\n"
      "funcs f(u) g(u)\n"
      "pde lead=D(u,t,t): D(u,t,t) - D(f(u)*D(u,x), x) - D(g(u)*D(u,y), y)\n"
      "conserved -D(u,t) ; f(u)*D(u,x) ; g(u)*D(u,y)\n"
      "sym X1: xi_t = 1\n"
      "change 1: r = y - c2*t, s = x - c1*t, q = t, w = u\n"
      "inverse 1: t = q, x = s + c1*q, y = r + c2*q, u = w\n";
  Problem p = from_text(text);

  CHECK(!stage_change(p, 2, p.ctx).has_value());
  auto cr = stage_change(p, 1, p.ctx);
  REQUIRE(cr.has_value());
  CHECK(cr->invariants[0].first == "r");
  CHECK(cr->canonical_var.first == "q");
  CHECK(cr->dependents[0].first == "w");
  REQUIRE(cr->inverse_independents.size() == 3);
  CHECK(print(cr->inverse_independents[0], cr->to) == "q");

  // the stored inverses survive build_change validation
  CoordinateChange ch = build_change(*cr, p.ctx);
  CHECK(print(ch.J, ch.to) == "-1");
}

TEST_CASE("change and inverse lines are validated") {
  std::string head =
      "vars t x y\n"
      "deps u\n"
      "params c1 c2\n"
      "pde lead=D(u,t,t): D(u,t,t) - D(u,x,x) - D(u,y,y)\n"
      "conserved -D(u,t) ; D(u,x) ; D(u,y)\n";

  Problem short_change =
      from_text(head + "change 1: r = y - c2*t, q = t, w = u\n");
  CHECK_THROWS_WITH_AS((void)stage_change(short_change, 1, short_change.ctx),
                       doctest::Contains("need 2 invariant(s)"), SemanticError);

  Problem no_y = from_text(
      head +
      "change 1: r = y - c2*t, s = x - c1*t, q = t, w = u\n"
      "inverse 1: t = q, x = s + c1*q, u = w\n");
  CHECK_THROWS_WITH_AS((void)stage_change(no_y, 1, no_y.ctx),
                       doctest::Contains("missing 'y'"), SemanticError);

  CHECK_THROWS_WITH_AS(
      (void)from_text(head + "change 0: r = y\n"),
      doctest::Contains("stage numbers start at 1"), SemanticError);
  CHECK_THROWS_WITH_AS(
      (void)from_text(head + "change 1: r = y, s = x, q = t, w = u\n"
                             "change 1: r = x, s = y, q = t, w = u\n"),
      doctest::Contains("duplicate change for stage 1"), SemanticError);
}

TEST_CASE("generator lookup reports what exists") {
  Problem p = load_problem(DRED_PROBLEM_DIR "/wave2p1.problem");
  CHECK(&find_generator(p, "X2") == &p.generators[1].second);
  CHECK_THROWS_WITH_AS((void)find_generator(p, "X9"),
                       doctest::Contains("X1, X2, X3, X4"), SemanticError);
}

}  // namespace
}  // namespace dred
