#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dred/conservation.hpp"
#include "dred/coordinates.hpp"

namespace dred {

// A named pool of generators shared by one reduction run.
using GeneratorPool = std::vector<std::pair<std::string, Generator>>;

// Fate of one pool generator under a reduction step.
struct InheritedGenerator {
  std::string name;
  Generator full;  // push-forward in the full new coordinates
  bool inheritable = false;
  bool consumed = false;  // nonzero coefficient in some used combination
  Generator projected;    // restriction to the invariants, when inheritable
  std::string note;
};

// One application of an associated generator: the straightening change, the
// transported flux, the reduced system on the invariants, and what became
// of the other generators.
struct ReductionStep {
  std::string used_name;
  Generator used;  // over the stage's starting context
  CanonicalResult canon;
  CoordinateChange change;
  ContextPtr reduced_ctx;  // invariants only, full dependency profile
  PdeSystem reduced_system;
  std::vector<Expr> reduced_T;  // one component per surviving variable
  Expr canonical_component;     // dropped component, over change.to
  bool canonical_component_static = false;  // its lone divergence term vanishes
  std::vector<InheritedGenerator> inherited;
  // new names as expressions in the run's original variables
  std::vector<std::pair<std::string, Expr>> definitions;
};

struct FirstIntegral {
  Expr lhs;  // over the final single-variable context
  std::string constant_name = "C";
};

struct ReductionTrace {
  ContextPtr original_ctx;
  std::vector<ReductionStep> steps;
  bool complete = false;  // reached one independent variable
  PdeSystem final_system;
  std::vector<Expr> final_T;
  std::optional<FirstIntegral> integral;
  int original_order = 0;
  int final_order = 0;
  std::string diagnostic;  // why the run stopped, when incomplete
};

enum class Strategy { FirstDeclared, UserCombination, Exhaustive };

struct PipelineOptions {
  Strategy strategy = Strategy::FirstDeclared;
  // one entry per stage for Strategy::UserCombination, e.g. "X1 + c1*X2"
  std::vector<std::string> combos;
  // optional per-stage replacement for the canonical coordinates (1-based
  // stage); return nullopt to fall back to the built-in construction
  std::function<std::optional<CanonicalResult>(int, const ContextPtr&)>
      change_provider;
  ZeroCheck check = conservation_check();
};

struct StepOptions {
  int stage = 1;
  std::string name = "X";
  const CanonicalResult* change = nullptr;  // bypass canonical coordinates
  ZeroCheck check = conservation_check();
};

// Applies one generator: requires association (NotAssociatedError with the
// offending bracket otherwise), straightens, transports system and flux,
// checks that the canonical variable drops out, re-verifies conservation in
// the new variables, and reports the push-forward of every pool generator.
// `consumed` marks pool entries spent by earlier stages (may be empty).
ReductionStep reduce_once(const PdeSystem& sys, const std::vector<Expr>& T,
                          const Generator& X, const GeneratorPool& pool = {},
                          const std::vector<bool>& consumed = {},
                          const StepOptions& opt = {});

// Coefficients of a textual combination like "X1 + c1*X2 - 2*X3" against
// the pool names, aligned with the pool.  Coefficients are constants or
// parameters of ctx.
std::vector<Expr> parse_combination(const std::string& text,
                                    const GeneratorPool& pool,
                                    const ContextPtr& ctx);

struct Selection {
  bool found = false;
  Generator X;
  std::string name;
  std::vector<bool> coefficient_nonzero;  // aligned with the pool
  std::string diagnostic;                 // when nothing was found
};

// Picks the generator for one stage.  FirstDeclared tries pool entries one
// at a time in declaration order; UserCombination takes the stage's entry
// from opt.combos; Exhaustive enumerates coefficient tuples over
// {0, 1, parameters}, fewest nonzero coefficients first, then declaration
// order.  Entries already consumed by earlier stages are skipped except
// when the user names them explicitly.
Selection select_associated(const PdeSystem& sys, const std::vector<Expr>& T,
                            const GeneratorPool& pool,
                            const std::vector<bool>& consumed,
                            const PipelineOptions& opt, int stage);

// Runs reduction stages until one independent variable remains, the
// strategy finds no associated generator, or a stage fails.  Each stage
// consumes the generators it used: they stay in the pool and in the
// reports, but are not selected again.
ReductionTrace run_pipeline(const PdeSystem& sys, const std::vector<Expr>& T,
                            const GeneratorPool& generators,
                            const PipelineOptions& opt = {});

// Highest derivative order of the dependents (function primes do not
// count) across the system's equations / across a set of components.
int jet_order(const Expr& e);
int system_order(const PdeSystem& sys);

// "r*d/dr + s*d/ds", "d/dq", "0".
std::string format_generator(const Generator& X);

// One stage's report block: coordinates, Jacobian, transported flux,
// reduced system, inherited generators.
std::string format_step(const ReductionStep& step, int stage);

// Full multi-stage report: the step blocks, then the first integral with
// its back-substitution into the original variables.
std::string format_trace(const ReductionTrace& trace);

}  // namespace dred
