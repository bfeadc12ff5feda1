#include "dred/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "dred/printer.hpp"

namespace dred {

namespace {

struct EmitEntry {
  std::string name;
  Expr e;
  ContextPtr ctx;
};

void emit_block(std::ostream& out, const std::vector<EmitEntry>& entries) {
  out << "canonical:\n";
  for (const auto& en : entries)
    out << "  " << en.name << " = " << print(normalize(en.e), en.ctx) << "\n";
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// The named generator, or the parsed combination; exactly one must be given
// unless allow_neither.
std::pair<std::string, Generator> resolve_generator(const Problem& p,
                                                    const std::string& gen_name,
                                                    const std::string& combo) {
  if (!gen_name.empty() && !combo.empty())
    throw SemanticError("give either a generator name or a combination, not both");
  if (!gen_name.empty()) return {gen_name, find_generator(p, gen_name)};
  if (combo.empty())
    throw SemanticError("a generator is required: --gen NAME or --combo EXPR");
  std::vector<Expr> coeffs = parse_combination(combo, p.generators, p.ctx);
  std::vector<Generator> gens;
  for (const auto& g : p.generators) gens.push_back(g.second);
  return {combo, combine(gens, coeffs)};
}

struct AssocRow {
  std::string name;
  bool associated = false;
  bool trivial = false;
  std::string detail;
  std::vector<Expr> reduced_brackets;
};

AssocRow assoc_row(const Problem& p, const std::string& name,
                   const Generator& X, const ZeroCheck& check) {
  AssocRow row;
  row.name = name;
  AssociationResult ar = is_associated(p.conserved, X, p.system, check);
  row.associated = ar.associated;
  row.reduced_brackets = ar.reduced_brackets;
  row.trivial = true;
  for (const Expr& b : ar.brackets) row.trivial = row.trivial && is_zero_normal(b);
  if (!ar.associated) {
    for (std::size_t i = 0; i < ar.reduced_brackets.size(); ++i)
      if (!is_zero_normal(ar.reduced_brackets[i])) {
        row.detail = "component along '" +
                     p.ctx->independent_name(static_cast<int>(i)) +
                     "' reduces to " +
                     print(ar.reduced_brackets[i], p.ctx);
        break;
      }
  }
  return row;
}

void print_assoc_table(std::ostream& out, const std::vector<AssocRow>& rows) {
  std::size_t width = 9;
  for (const AssocRow& r : rows) width = std::max(width, r.name.size());
  out << "generator";
  out << std::string(width - 9 + 2, ' ') << "verdict\n";
  for (const AssocRow& r : rows) {
    out << r.name << std::string(width - r.name.size() + 2, ' ');
    if (r.trivial)
      out << "associated (bracket vanishes identically)";
    else if (r.associated)
      out << "associated (bracket vanishes on solutions)";
    else
      out << "not associated (" << r.detail << ")";
    out << "\n";
  }
}

PipelineOptions pipeline_options(const Problem& p,
                                 const std::string& strategy_name,
                                 const std::vector<std::string>& combos,
                                 const CommandOptions& o) {
  PipelineOptions opt;
  opt.check = o.check;
  if (!combos.empty()) {
    if (!strategy_name.empty() && strategy_name != "combo")
      throw SemanticError("--combo implies the combination strategy; drop "
                          "--strategy " + strategy_name);
    opt.strategy = Strategy::UserCombination;
    opt.combos = combos;
  } else if (strategy_name == "first") {
    opt.strategy = Strategy::FirstDeclared;
  } else if (strategy_name == "exhaustive") {
    opt.strategy = Strategy::Exhaustive;
  } else if (strategy_name == "combo") {
    throw SemanticError("--strategy combo needs at least one --combo");
  } else if (strategy_name.empty()) {
    if (p.strategy) {
      opt.strategy = *p.strategy;
      opt.combos = p.combos;
    } else {
      opt.strategy = Strategy::FirstDeclared;
    }
  } else {
    throw SemanticError("unknown strategy '" + strategy_name +
                        "'; expected first, exhaustive, or combo");
  }
  opt.change_provider = [&p](int stage, const ContextPtr& cur) {
    return stage_change(p, stage, cur);
  };
  return opt;
}

}  // namespace

double max_residual(const Expr& e, const ContextPtr& ctx, const ZeroCheck& opt) {
  std::mt19937_64 rng(opt.seed);
  std::vector<Expr> exprs{e};
  double worst = 0.0;
  int used = 0;
  for (int attempt = 0; attempt < opt.max_attempts && used < opt.samples;
       ++attempt) {
    try {
      EvalPoint pt = random_point(exprs, ctx, rng);
      worst = std::max(worst, std::abs(eval_numeric(e, ctx, pt).as_double()));
      ++used;
    } catch (const SingularPointError&) {
    }
  }
  if (used < opt.samples)
    throw InconclusiveError("not enough usable samples for the residual scan");
  return worst;
}

bool cmd_check_div(const Problem& p, const CommandOptions& o, std::ostream& out) {
  int n = p.ctx->independent_count();
  out << "conserved vector:\n";
  for (int i = 0; i < n; ++i)
    out << "  T^" << p.ctx->independent_name(i) << " = "
        << print(normalize(p.conserved[i]), p.ctx) << "\n";
  DivergenceReport dr = check_divergence(p.conserved, p.system, o.check);
  out << "divergence on solutions: " << print(dr.reduced, p.ctx) << "\n";
  out << "max numeric residual over " << o.check.samples
      << " samples: " << sci(max_residual(dr.reduced, p.ctx, o.check)) << "\n";
  if (dr.trivial)
    out << "note: the components themselves vanish on solutions; the law is "
           "trivial\n";
  out << "verdict: " << (dr.conserved ? "conserved" : "NOT conserved") << "\n";
  if (o.emit) {
    std::vector<EmitEntry> es;
    for (int i = 0; i < n; ++i)
      es.push_back({"T^" + p.ctx->independent_name(i), p.conserved[i], p.ctx});
    es.push_back({"divergence", dr.reduced, p.ctx});
    emit_block(out, es);
  }
  return dr.conserved;
}

bool cmd_check_assoc(const Problem& p, const std::string& gen_name,
                     const std::string& combo, const CommandOptions& o,
                     std::ostream& out) {
  std::vector<AssocRow> rows;
  bool single = !gen_name.empty() || !combo.empty();
  if (single) {
    auto [name, X] = resolve_generator(p, gen_name, combo);
    rows.push_back(assoc_row(p, name, X, o.check));
  } else {
    if (p.generators.empty())
      throw SemanticError("the problem declares no generators");
    for (const auto& g : p.generators)
      rows.push_back(assoc_row(p, g.first, g.second, o.check));
  }
  print_assoc_table(out, rows);
  if (o.emit) {
    std::vector<EmitEntry> es;
    for (const AssocRow& r : rows)
      for (std::size_t i = 0; i < r.reduced_brackets.size(); ++i)
        es.push_back({r.name + ".bracket^" +
                          p.ctx->independent_name(static_cast<int>(i)),
                      r.reduced_brackets[i], p.ctx});
    emit_block(out, es);
  }
  return !single || rows[0].associated;
}

bool cmd_reduce(const Problem& p, const std::string& gen_name,
                const std::string& combo, int change_stage,
                const CommandOptions& o, std::ostream& out) {
  auto [name, X] = resolve_generator(p, gen_name, combo);

  std::vector<bool> consumed;
  if (!combo.empty()) {
    std::vector<Expr> coeffs = parse_combination(combo, p.generators, p.ctx);
    for (const Expr& c : coeffs) consumed.push_back(!is_zero_normal(c));
  } else {
    for (const auto& g : p.generators) consumed.push_back(g.first == name);
  }

  StepOptions so;
  so.name = name;
  so.stage = 1;
  so.check = o.check;
  std::optional<CanonicalResult> cr =
      stage_change(p, change_stage > 0 ? change_stage : 1, p.ctx);
  if (change_stage > 0 && !cr)
    throw SemanticError("the problem file declares no 'change " +
                        std::to_string(change_stage) + ":' line");
  if (cr) so.change = &*cr;

  ReductionStep step =
      reduce_once(p.system, p.conserved, X, p.generators, consumed, so);
  out << format_step(step, 1);
  if (o.emit) {
    std::vector<EmitEntry> es;
    for (std::size_t i = 0; i < step.reduced_T.size(); ++i)
      es.push_back(
          {"T^" + step.reduced_ctx->independent_name(static_cast<int>(i)),
           step.reduced_T[i], step.reduced_ctx});
    for (std::size_t a = 0; a < step.reduced_system.leads.size(); ++a) {
      es.push_back({print(Expr::atom(step.reduced_system.leads[a]),
                          step.reduced_ctx),
                    step.reduced_system.rhs[a], step.reduced_ctx});
    }
    emit_block(out, es);
  }
  return true;
}

bool cmd_pipeline(const Problem& p, const std::string& strategy_name,
                  const std::vector<std::string>& combos,
                  const CommandOptions& o, std::ostream& out) {
  PipelineOptions opt = pipeline_options(p, strategy_name, combos, o);
  ReductionTrace trace = run_pipeline(p.system, p.conserved, p.generators, opt);
  out << format_trace(trace);
  if (o.emit && trace.complete && trace.integral) {
    std::vector<EmitEntry> es;
    es.push_back(
        {"first_integral", trace.integral->lhs, trace.final_system.ctx});
    for (const auto& [name, e] : trace.steps.back().definitions)
      es.push_back({name, e, trace.original_ctx});
    emit_block(out, es);
  }
  return trace.complete;
}

bool cmd_verify(const Problem& p, const CommandOptions& o, std::ostream& out) {
  bool all = true;
  auto report = [&](const std::string& what, bool ok, const std::string& note) {
    out << (ok ? "PASS" : "FAIL") << "  " << what;
    if (!note.empty()) out << "  (" << note << ")";
    out << "\n";
    all = all && ok;
  };

  try {
    DivergenceReport dr = check_divergence(p.conserved, p.system, o.check);
    report("conserved vector divergence", dr.conserved,
           "max residual " + sci(max_residual(dr.reduced, p.ctx, o.check)) +
               " over " + std::to_string(o.check.samples) + " samples");
  } catch (const Error& e) {
    report("conserved vector divergence", false, e.what());
  }

  for (const auto& g : p.generators) {
    try {
      AssocRow row = assoc_row(p, g.first, g.second, o.check);
      report("association verdict for " + g.first, true,
             row.associated ? "associated" : "not associated");
    } catch (const Error& e) {
      report("association verdict for " + g.first, false, e.what());
    }
  }

  if (p.strategy) {
    try {
      PipelineOptions opt = pipeline_options(p, "", {}, o);
      ReductionTrace trace =
          run_pipeline(p.system, p.conserved, p.generators, opt);
      report("reduction pipeline", trace.complete,
             trace.complete
                 ? "first integral of order " + std::to_string(trace.final_order)
                 : trace.diagnostic);
    } catch (const Error& e) {
      report("reduction pipeline", false, e.what());
    }
  }

  out << "verify: " << (all ? "all checks passed" : "FAILURES above") << "\n";
  return all;
}

}  // namespace dred
