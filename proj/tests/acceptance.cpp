// Acceptance runner: exercises the engine end to end on the bundled wave
// problem and prints one PASS/FAIL line per criterion.  Exits 0 only when
// every criterion holds.  All tolerances are pinned here.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dred/commands.hpp"
#include "dred/coordinates.hpp"
#include "dred/pipeline.hpp"
#include "dred/printer.hpp"
#include "dred/problem.hpp"

#include "support/property_suites.hpp"

namespace {

using namespace dred;
using Clock = std::chrono::steady_clock;

constexpr double kTol = 1e-9;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string fmt_s(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2fs", v);
  return buf;
}

struct Outcome {
  bool ok = false;
  std::string detail;
};

int g_failures = 0;

void report(int num, const std::string& label,
            const std::function<Outcome()>& body) {
  Outcome out;
  try {
    out = body();
  } catch (const Error& e) {
    out.ok = false;
    out.detail = std::string("error: ") + e.what();
  }
  if (!out.ok) ++g_failures;
  std::printf("criterion %2d: %s  %s%s%s\n", num, out.ok ? "PASS" : "FAIL",
              label.c_str(), out.detail.empty() ? "" : " -- ",
              out.detail.c_str());
  std::fflush(stdout);
}

ZeroCheck sampled(int samples) {
  ZeroCheck opt;
  opt.samples = samples;
  opt.tol = kTol;
  opt.max_attempts = std::max(400, 6 * samples);
  return opt;
}

// Random affine n-variable change with a random degree <= 2 flux, mirroring
// the shape of the engine's own coordinate constructions.
struct RandomCase {
  ContextPtr ctx;
  CoordinateChange ch;
  std::vector<Expr> T;
};

ContextPtr flat_ctx(int nvars) {
  ContextBuilder b;
  const char* names[] = {"t", "x", "y"};
  for (int i = 0; i < nvars; ++i) b.independent(names[i]);
  b.dependent("u");
  return b.build();
}

std::vector<std::string> jet_pool(int nvars) {
  std::vector<std::string> pool = {"t", "x", "u", "u_t", "u_x"};
  if (nvars > 2) {
    pool.push_back("y");
    pool.push_back("u_y");
  }
  return pool;
}

Expr random_component(std::mt19937_64& rng, const ContextPtr& ctx,
                      const std::vector<std::string>& pool) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
  std::uniform_int_distribution<int> entry(-2, 2);
  std::string s = pool[pick(rng)] + "*" + pool[pick(rng)];
  s += " + " + std::to_string(entry(rng)) + "*" + pool[pick(rng)];
  return parse(s, ctx);
}

RandomCase random_affine_case(std::mt19937_64& rng, int nvars) {
  RandomCase rc;
  rc.ctx = flat_ctx(nvars);
  std::uniform_int_distribution<int> entry(-2, 2);
  const char* var_names[] = {"t", "x", "y"};
  const char* new_names[] = {"a", "b", "c"};

  while (true) {
    std::vector<std::vector<int>> m(nvars, std::vector<int>(nvars));
    for (auto& row : m)
      for (auto& v : row) v = entry(rng);
    // reject singular matrices
    double det;
    if (nvars == 2) {
      det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    } else {
      det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
            m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
            m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
    if (det == 0) continue;

    CanonicalResult cr;
    cr.from = rc.ctx;
    ContextBuilder to;
    for (int i = 0; i < nvars; ++i) {
      std::string line;
      for (int k = 0; k < nvars; ++k)
        line += (k ? " + " : "") + std::to_string(m[i][k]) + "*" + var_names[k];
      line += " + " + std::to_string(entry(rng));
      if (i + 1 < nvars)
        cr.invariants.push_back({new_names[i], parse(line, rc.ctx)});
      else
        cr.canonical_var = {new_names[i], parse(line, rc.ctx)};
      to.independent(new_names[i]);
    }
    cr.dependents = {{"w", parse("u", rc.ctx)}};
    to.dependent("w");
    cr.to = to.build();
    rc.ch = build_change(cr, rc.ctx);
    break;
  }

  auto pool = jet_pool(nvars);
  for (int i = 0; i < nvars; ++i)
    rc.T.push_back(random_component(rng, rc.ctx, pool));
  return rc;
}

Expr divergence_of(const std::vector<Expr>& T, const ContextPtr& ctx) {
  Expr d;
  for (std::size_t i = 0; i < T.size(); ++i)
    d = d + total_derivative(T[i], ctx, {static_cast<int>(i)});
  return normalize(d);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: dred_acceptance <problem-file>\n";
    return 2;
  }

  Problem p;
  try {
    p = load_problem(argv[1]);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const ContextPtr& ctx = p.ctx;

  // Shared pipeline run (criteria 4-10 draw on its steps).
  PipelineOptions popt;
  if (p.strategy) popt.strategy = *p.strategy;
  popt.combos = p.combos;
  popt.change_provider = [&p](int stage, const ContextPtr& cur) {
    return stage_change(p, stage, cur);
  };
  ReductionTrace trace;
  double pipeline_secs = 0.0;
  std::string pipeline_error;
  {
    auto t0 = Clock::now();
    try {
      trace = run_pipeline(p.system, p.conserved, p.generators, popt);
    } catch (const Error& e) {
      pipeline_error = e.what();
    }
    pipeline_secs = seconds_since(t0);
  }

  // The test changes shared by criteria 6-8: both pipeline stages plus 20
  // random affine cases (ten 2-variable, ten 3-variable).
  std::vector<RandomCase> cases;
  if (trace.steps.size() == 2) {
    cases.push_back({ctx, trace.steps[0].change, p.conserved});
    cases.push_back({trace.steps[0].reduced_ctx, trace.steps[1].change,
                     trace.steps[0].reduced_T});
  }
  std::mt19937_64 rng(0xacce97ULL);
  for (int k = 0; k < 20; ++k)
    cases.push_back(random_affine_case(rng, 2 + k % 2));
  std::string stage_note = pipeline_error.empty() ? trace.diagnostic : pipeline_error;

  report(1, "divergence of the declared flux vanishes on solutions", [&] {
    auto t0 = Clock::now();
    DivergenceReport dr = check_divergence(p.conserved, p.system, sampled(100));
    bool symbolic = is_zero_normal(dr.reduced);
    double res = max_residual(dr.reduced, ctx, sampled(100));
    double secs = seconds_since(t0);
    Outcome out;
    out.ok = dr.conserved && symbolic && res <= kTol && secs < 5.0;
    out.detail = std::string("symbolic ") + (symbolic ? "0" : "nonzero") +
                 ", max residual " + fmt(res) + " over 100 samples, " +
                 fmt_s(secs);
    return out;
  });

  report(2, "association table: X1, X2, X3 associated; X4 not", [&] {
    auto t0 = Clock::now();
    bool ok = true;
    for (const char* name : {"X1", "X2", "X3"})
      ok = ok &&
           is_associated(p.conserved, find_generator(p, name), p.system).associated;
    AssociationResult a4 =
        is_associated(p.conserved, find_generator(p, "X4"), p.system);
    ok = ok && !a4.associated;
    std::string t_comp = print(normalize(a4.reduced_brackets[0]), ctx);
    ok = ok && t_comp == "-D(u,t)";
    ok = ok && guarded_equal(a4.reduced_brackets[0], parse("-u_t", ctx), ctx);
    double secs = seconds_since(t0);
    Outcome out;
    out.ok = ok && secs < 5.0;
    out.detail = "X4 bracket t-component " + t_comp + ", " + fmt_s(secs);
    return out;
  });

  report(3, "first-stage flux components match the frozen forms", [&] {
    Generator combo;
    combo.ctx = ctx;
    combo.xi = {parse("1", ctx), parse("c1", ctx), parse("c2", ctx)};
    combo.eta = {parse("0", ctx)};
    CoordinateChange ch = build_change(canonical_coordinates(combo), ctx);
    std::vector<Expr> Tt = transform_conserved(p.conserved, ch);
    const char* golden[] = {
        "c1*c2*D(w,s) + c2^2*D(w,r) - D(w,r)*g(w)",
        "c1*c2*D(w,r) + c1^2*D(w,s) - D(w,s)*f(w)",
        "-c1*D(w,s) - c2*D(w,r)",
    };
    Outcome out;
    out.ok = Tt.size() == 3;
    for (int i = 0; i < 3 && out.ok; ++i) {
      std::string got = print(Tt[i], ch.to);
      if (got != golden[i]) {
        out.ok = false;
        out.detail = "component " + std::to_string(i) + " printed as " + got;
      }
    }
    if (out.ok) out.detail = "three components byte-identical";
    return out;
  });

  report(4, "the scaling generator descends to r*d/dr + s*d/ds", [&] {
    if (trace.steps.empty()) return Outcome{false, pipeline_error};
    const auto& inh = trace.steps[0].inherited;
    for (const auto& g : inh)
      if (g.name == "X4") {
        std::string form = format_generator(g.projected);
        return Outcome{g.inheritable && form == "r*d/dr + s*d/ds",
                       "push-forward " + form};
      }
    return Outcome{false, "X4 missing from the inherited report"};
  });

  report(5, "pipeline reaches the first integral in the scaling variables", [&] {
    if (!pipeline_error.empty()) return Outcome{false, pipeline_error};
    Outcome out;
    if (!trace.complete || !trace.integral || trace.steps.size() != 2)
      return Outcome{false, "trace incomplete: " + trace.diagnostic};
    auto final_ctx = trace.steps[1].reduced_ctx;
    Expr want = parse(
        "v_n*(-c2^2*n^2 + 2*c1*c2*n + n^2*g(v) - c1^2 + f(v))", final_ctx);
    bool lhs_ok = guarded_equal(trace.integral->lhs, want, final_ctx);
    bool defs_ok = false, v_ok = false;
    for (const auto& [name, expr] : trace.steps[1].definitions) {
      if (name == "n")
        defs_ok = guarded_equal(expr, parse("(x - c1*t)*(y - c2*t)^-1", ctx), ctx);
      if (name == "v") v_ok = guarded_equal(expr, parse("u", ctx), ctx);
    }
    out.ok = lhs_ok && defs_ok && v_ok &&
             trace.integral->constant_name == "C" && pipeline_secs < 30.0;
    out.detail = "integral and n, v definitions verified, " + fmt_s(pipeline_secs);
    return out;
  });

  report(6, "row-replacement transport agrees with the matrix transport", [&] {
    if (cases.size() != 22)
      return Outcome{false, "stage changes unavailable: " + stage_note};
    double worst = 0.0;
    for (const auto& rc : cases) {
      std::vector<Expr> a = transform_conserved(rc.T, rc.ch);
      std::vector<Expr> b = transform_conserved_rowrep(rc.T, rc.ch);
      if (a.size() != b.size()) return Outcome{false, "size mismatch"};
      for (std::size_t i = 0; i < a.size(); ++i) {
        Expr diff = normalize(a[i] - b[i]);
        if (!is_zero_normal(diff))
          return Outcome{false, "nonzero normalized difference in component " +
                                    std::to_string(i)};
        worst = std::max(worst, max_residual(diff, rc.ch.to, sampled(20)));
      }
    }
    Outcome out;
    out.ok = worst <= kTol;
    out.detail = "22 changes, all components identical; max residual " +
                 fmt(worst);
    return out;
  });

  report(7, "divergence transports with the Jacobian factor", [&] {
    if (cases.size() != 22)
      return Outcome{false, "stage changes unavailable: " + stage_note};
    int symbolic = 0;
    for (const auto& rc : cases) {
      std::vector<Expr> Tt = transform_conserved(rc.T, rc.ch);
      Expr lhs = normalize(rc.ch.J * rewrite(rc.ch, divergence_of(rc.T, rc.ctx)));
      Expr diff = lhs - divergence_of(Tt, rc.ch.to);
      if (is_zero_normal(normalize(diff))) ++symbolic;
      if (!guarded_zero(diff, rc.ch.to, sampled(100)))
        return Outcome{false, "identity fails"};
    }
    Outcome out;
    out.ok = true;
    out.detail = "22 changes; " + std::to_string(symbolic) +
                 " symbolically zero, rest confirmed at 100 samples";
    return out;
  });

  report(8, "chain-rule matrices reproduce the rewritten derivatives", [&] {
    if (cases.size() != 22)
      return Outcome{false, "stage changes unavailable: " + stage_note};
    std::mt19937_64 hrng(0xc4a19ULL);
    double worst = 0.0;
    for (const auto& rc : cases) {
      std::vector<std::string> pool;
      for (int i = 0; i < rc.ctx->independent_count(); ++i)
        pool.push_back(rc.ctx->independent_name(i));
      for (int d = 0; d < rc.ctx->dependent_count(); ++d) {
        pool.push_back(rc.ctx->dependent_name(d));
        for (int i : rc.ctx->dependent_args(d))
          pool.push_back(rc.ctx->dependent_name(d) + "_" +
                         rc.ctx->independent_name(i));
      }
      int n = static_cast<int>(rc.ch.A.size());
      for (int rep = 0; rep < 3; ++rep) {
        Expr h = random_component(hrng, rc.ctx, pool);
        for (int i = 0; i < n; ++i) {
          Expr lhs = total_derivative(rewrite(rc.ch, h), rc.ch.to, {i});
          Expr rhs;
          for (int k = 0; k < n; ++k)
            rhs = rhs +
                  rc.ch.A[i][k] * rewrite(rc.ch, total_derivative(h, rc.ctx, {k}));
          worst = std::max(
              worst, max_residual(normalize(lhs - rhs), rc.ch.to, sampled(20)));
        }
      }
    }
    Outcome out;
    out.ok = worst <= kTol;
    out.detail = "22 changes x 3 probes x 20 bindings; max residual " + fmt(worst);
    return out;
  });

  report(9, "transported bracket: zero for the used combination, not for X4", [&] {
    if (trace.steps.empty()) return Outcome{false, pipeline_error};
    const auto& st = trace.steps[0];
    std::vector<Expr> tb = transformed_bracket(p.conserved, st.used, st.change);
    for (const auto& comp : tb)
      if (!guarded_zero(comp, st.change.to, sampled(20)))
        return Outcome{false, "combination bracket has a nonzero component"};
    std::vector<Expr> tb4 =
        transformed_bracket(p.conserved, find_generator(p, "X4"), st.change);
    bool any_nonzero = false;
    for (const auto& comp : tb4)
      if (!guarded_zero(comp, st.change.to, sampled(20))) any_nonzero = true;
    Outcome out;
    out.ok = any_nonzero;
    out.detail = "combination bracket vanishes, X4 bracket does not";
    return out;
  });

  report(10, "order bookkeeping: system order 2, final equation order 1", [&] {
    Outcome out;
    out.ok = trace.complete && trace.original_order == 2 &&
             trace.final_order == 1;
    out.detail = "order " + std::to_string(trace.original_order) + " -> " +
                 std::to_string(trace.final_order);
    return out;
  });

  report(11, "randomized identity suites, 200 seeded cases each", [&] {
    struct Suite {
      const char* name;
      props::SuiteResult res;
    };
    Suite suites[] = {
        {"commuting derivatives", props::commuting_derivatives(0xbeef1ULL, 200)},
        {"product rule", props::leibniz_rule(0xbeef2ULL, 200)},
        {"prolongation recursion",
         props::prolongation_recursion(0xbeef3ULL, 200)},
        {"bracket linearity", props::bracket_linearity(0xbeef4ULL, 200)},
    };
    Outcome out;
    out.ok = true;
    for (const auto& s : suites) {
      if (s.res.cases < 200 || s.res.failures != 0) {
        out.ok = false;
        out.detail += std::string(out.detail.empty() ? "" : "; ") + s.name +
                      ": " + std::to_string(s.res.failures) + " of " +
                      std::to_string(s.res.cases) + " failed";
      }
    }
    if (out.ok) out.detail = "4 suites x 200 cases, no failures";
    return out;
  });

  if (g_failures == 0) {
    std::printf("acceptance: all 11 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return 1;
}
