#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dred/problem.hpp"

namespace dred {

struct CommandOptions {
  ZeroCheck check = conservation_check();
  bool emit = false;  // append the machine-readable canonical dump
};

// Each command prints a human-readable report and returns whether every
// check it ran passed; callers map that to the exit status.  Unusable input
// (unknown names, malformed combinations) raises the usual errors.

// Verifies the conserved vector's divergence symbolically and numerically.
bool cmd_check_div(const Problem& p, const CommandOptions& o, std::ostream& out);

// Association table for all declared generators, or for one generator
// (gen_name) or one linear combination (combo).  The bare table is
// informational and always passes; a named request passes iff associated.
bool cmd_check_assoc(const Problem& p, const std::string& gen_name,
                     const std::string& combo, const CommandOptions& o,
                     std::ostream& out);

// One reduction step along --gen or --combo.  change_stage > 0 applies the
// problem file's change for that stage; otherwise a declared stage-1 change
// is used when present, else canonical coordinates are derived.
bool cmd_reduce(const Problem& p, const std::string& gen_name,
                const std::string& combo, int change_stage,
                const CommandOptions& o, std::ostream& out);

// Full reduction.  Strategy: explicit combos win, then strategy_name
// ("first" | "exhaustive"), then the problem file's strategy line, then
// first-declared.  Passes iff the reduction reaches a first integral.
bool cmd_pipeline(const Problem& p, const std::string& strategy_name,
                  const std::vector<std::string>& combos,
                  const CommandOptions& o, std::ostream& out);

// Re-runs every verifiable claim of the problem file at the configured
// sample budget: divergence, association verdicts (symbolic and numeric
// halves must agree), and the configured pipeline when one is declared.
bool cmd_verify(const Problem& p, const CommandOptions& o, std::ostream& out);

// Largest |value| of e over the check's sample budget.
double max_residual(const Expr& e, const ContextPtr& ctx, const ZeroCheck& opt);

}  // namespace dred
