#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dred/pipeline.hpp"

namespace dred {

// A user-supplied change of variables for one reduction stage, kept as raw
// text until the stage's context exists (later stages use engine-generated
// variable names).
struct StageChange {
  int stage = 0;
  int line = 0;          // declaration line, for diagnostics
  int inverse_line = 0;  // 0 when no inverse line was given
  std::vector<std::pair<std::string, std::string>> defs;
  std::vector<std::pair<std::string, std::string>> inverses;
};

// A parsed problem file: variable context, the system solved for its
// declared leading derivatives, the conserved vector, named symmetry
// generators, and optional reduction overrides.
struct Problem {
  std::string source;
  ContextPtr ctx;
  PdeSystem system;
  std::vector<Expr> conserved;
  GeneratorPool generators;
  std::vector<StageChange> changes;  // sorted by stage
  std::optional<Strategy> strategy;
  std::vector<std::string> combos;  // with strategy == UserCombination
};

// Reads the line-oriented problem format.  Sections: vars, deps, params,
// funcs, pde, conserved, sym, change, inverse, strategy; '#' starts a
// comment.  Diagnostics carry source:line prefixes.
Problem parse_problem(std::istream& in, const std::string& source);
Problem load_problem(const std::string& path);

// The file's override for one stage, parsed against that stage's context.
// The first names are the invariants, then the canonical variable, then one
// entry per dependent.  nullopt when the file declares no such stage.
std::optional<CanonicalResult> stage_change(const Problem& p, int stage,
                                            const ContextPtr& cur);

// Lookup by name; unknown names raise a diagnostic listing what exists.
const Generator& find_generator(const Problem& p, const std::string& name);

}  // namespace dred
