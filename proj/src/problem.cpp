#include "dred/problem.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dred/parser.hpp"

namespace dred {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Split on a separator, honoring parentheses.
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

struct Loc {
  std::string source;
  int line;
};

[[noreturn]] void fail(const Loc& loc, const std::string& msg) {
  throw SemanticError(loc.source + ":" + std::to_string(loc.line) + ": " + msg);
}

Expr parse_at(const Loc& loc, const std::string& text, const ContextPtr& ctx) {
  try {
    return parse(text, ctx);
  } catch (const Error& e) {
    fail(loc, "in '" + text + "': " + e.what());
  }
}

// name = expression pairs separated by top-level commas
std::vector<std::pair<std::string, std::string>> assignments(
    const Loc& loc, const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& part : split_top(s, ',')) {
    std::size_t eq = part.find('=');
    std::string key = eq == std::string::npos ? "" : trim(part.substr(0, eq));
    std::string val = eq == std::string::npos ? "" : trim(part.substr(eq + 1));
    if (key.empty() || val.empty())
      fail(loc, "expected 'name = expression', got '" + part + "'");
    out.push_back({key, val});
  }
  return out;
}

int parse_stage(const Loc& loc, const std::string& label) {
  if (label.empty() || label.find_first_not_of("0123456789") != std::string::npos)
    fail(loc, "expected a stage number before ':', got '" + label + "'");
  int stage = std::stoi(label);
  if (stage < 1) fail(loc, "stage numbers start at 1");
  return stage;
}

struct SymLine {
  Loc loc;
  std::string name;
  std::string payload;
};

}  // namespace

Problem parse_problem(std::istream& in, const std::string& source) {
  Problem p;
  p.source = source;

  std::optional<Loc> vars_loc, deps_loc, params_loc, funcs_loc, cons_loc,
      strat_loc;
  std::vector<std::string> vars, deps, params, funcs;
  std::string conserved_text, strategy_text;
  std::vector<std::tuple<Loc, std::string, std::string>> pdes;  // lead, expr
  std::vector<SymLine> syms;
  std::vector<std::tuple<Loc, int, std::string>> inverse_lines;

  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    Loc loc{source, lineno};

    std::size_t sp = line.find_first_of(" \t:");
    std::string head = line.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : trim(line.substr(
        line[sp] == ':' ? sp : sp + 1));

    auto once = [&](std::optional<Loc>& seen) {
      if (seen) fail(loc, "duplicate '" + head + "' line");
      seen = loc;
    };
    auto labeled = [&]() -> std::pair<std::string, std::string> {
      std::size_t colon = rest.find(':');
      if (colon == std::string::npos)
        fail(loc, "expected ':' after '" + head + " ...'");
      return {trim(rest.substr(0, colon)), trim(rest.substr(colon + 1))};
    };

    if (head == "vars") {
      once(vars_loc);
      vars = words(rest);
    } else if (head == "deps") {
      once(deps_loc);
      deps = words(rest);
    } else if (head == "params") {
      once(params_loc);
      params = words(rest);
    } else if (head == "funcs") {
      once(funcs_loc);
      funcs = words(rest);
    } else if (head == "pde") {
      auto [label, payload] = labeled();
      if (label.rfind("lead=", 0) != 0)
        fail(loc, "expected 'lead=<derivative>' before ':', got '" + label + "'");
      if (payload.empty()) fail(loc, "missing equation after ':'");
      pdes.push_back({loc, trim(label.substr(5)), payload});
    } else if (head == "conserved") {
      once(cons_loc);
      conserved_text = rest;
    } else if (head == "sym") {
      auto [label, payload] = labeled();
      if (label.empty() || words(label).size() != 1)
        fail(loc, "expected a generator name before ':'");
      syms.push_back({loc, label, payload});
    } else if (head == "change") {
      auto [label, payload] = labeled();
      StageChange sc;
      sc.stage = parse_stage(loc, label);
      sc.line = lineno;
      sc.defs = assignments(loc, payload);
      for (const auto& c : p.changes)
        if (c.stage == sc.stage)
          fail(loc, "duplicate change for stage " + label);
      p.changes.push_back(std::move(sc));
    } else if (head == "inverse") {
      auto [label, payload] = labeled();
      inverse_lines.push_back({loc, parse_stage(loc, label), payload});
    } else if (head == "strategy") {
      once(strat_loc);
      strategy_text = rest;
    } else {
      fail(loc, "unknown section '" + head +
                    "'; expected one of vars, deps, params, funcs, pde, "
                    "conserved, sym, change, inverse, strategy");
    }
  }

  std::vector<std::string> missing;
  if (!vars_loc) missing.push_back("vars");
  if (!deps_loc) missing.push_back("deps");
  if (pdes.empty()) missing.push_back("pde");
  if (!cons_loc) missing.push_back("conserved");
  if (!missing.empty()) {
    std::string m;
    for (const auto& s : missing) m += (m.empty() ? "" : ", ") + s;
    throw SemanticError(source + ": missing required sections: " + m);
  }
  if (vars.empty()) fail(*vars_loc, "'vars' declares no variables");
  if (deps.empty()) fail(*deps_loc, "'deps' declares no variables");

  ContextBuilder b;
  try {
    for (const auto& v : vars) b.independent(v);
  } catch (const Error& e) {
    fail(*vars_loc, e.what());
  }
  for (const auto& d : deps)
    if (d.find('(') != std::string::npos)
      fail(*deps_loc, "dependents take the full variable list; write the "
                      "bare name, not '" + d + "'");
  try {
    for (const auto& d : deps) b.dependent(d);
  } catch (const Error& e) {
    fail(*deps_loc, e.what());
  }
  try {
    for (const auto& c : params) b.parameter(c);
  } catch (const Error& e) {
    fail(*params_loc, e.what());
  }
  for (const auto& f : funcs)
    if (f.find('(') == std::string::npos || f.back() != ')' ||
        f.find('(') == 0)
      fail(*funcs_loc, "expected 'name(dependent)', got '" + f + "'");
  try {
    for (const auto& f : funcs) {
      std::size_t open = f.find('(');
      b.function(f.substr(0, open), f.substr(open + 1, f.size() - open - 2));
    }
  } catch (const Error& e) {
    fail(*funcs_loc, e.what());
  }
  try {
    p.ctx = b.build();
  } catch (const Error& e) {
    fail(*vars_loc, e.what());
  }
  int n = p.ctx->independent_count();
  int d = p.ctx->dependent_count();

  std::vector<std::pair<DerivAtom, Expr>> eqs;
  for (const auto& [loc, lead_text, expr_text] : pdes) {
    Expr lead = parse_at(loc, lead_text, p.ctx);
    const auto* dn = node_as<DerivNode>(lead);
    if (!dn || dn->atom.base_kind != SymbolKind::Dependent ||
        dn->atom.multi_index.empty())
      fail(loc, "the lead marker must be a derivative of a dependent, got '" +
                    lead_text + "'");
    eqs.push_back({dn->atom, parse_at(loc, expr_text, p.ctx)});
  }
  try {
    p.system = make_system(p.ctx, eqs);
  } catch (const Error& e) {
    throw SemanticError(source + ": " + e.what());
  }

  std::vector<std::string> comps = split_top(conserved_text, ';');
  if (static_cast<int>(comps.size()) != n)
    fail(*cons_loc, "the conserved vector needs one component per "
                    "independent variable (" +
                        std::to_string(n) + ", got " +
                        std::to_string(comps.size()) + ")");
  for (const auto& c : comps) {
    if (c.empty()) fail(*cons_loc, "empty conserved component");
    p.conserved.push_back(parse_at(*cons_loc, c, p.ctx));
  }

  for (const SymLine& s : syms) {
    for (const auto& g : p.generators)
      if (g.first == s.name)
        fail(s.loc, "duplicate generator name '" + s.name + "'");
    Generator X;
    X.ctx = p.ctx;
    X.xi.assign(n, Expr::constant(0));
    X.eta.assign(d, Expr::constant(0));
    std::vector<std::string> seen;
    for (const auto& [key, val] : assignments(s.loc, s.payload)) {
      if (std::find(seen.begin(), seen.end(), key) != seen.end())
        fail(s.loc, "duplicate coefficient '" + key + "'");
      seen.push_back(key);
      Expr* slot = nullptr;
      if (key.rfind("xi_", 0) == 0) {
        auto hit = p.ctx->lookup(key.substr(3));
        if (hit && hit->first == SymbolKind::Independent)
          slot = &X.xi[hit->second];
      } else if (key.rfind("eta_", 0) == 0) {
        auto hit = p.ctx->lookup(key.substr(4));
        if (hit && hit->first == SymbolKind::Dependent)
          slot = &X.eta[hit->second];
      }
      if (!slot)
        fail(s.loc, "unknown coefficient '" + key +
                        "'; expected xi_<variable> or eta_<dependent>");
      *slot = parse_at(s.loc, val, p.ctx);
    }
    try {
      validate_generator(X);
    } catch (const Error& e) {
      fail(s.loc, e.what());
    }
    p.generators.push_back({s.name, std::move(X)});
  }

  if (strat_loc) {
    std::vector<std::string> w = words(strategy_text);
    if (w.size() == 1 && w[0] == "first") {
      p.strategy = Strategy::FirstDeclared;
    } else if (w.size() == 1 && w[0] == "exhaustive") {
      p.strategy = Strategy::Exhaustive;
    } else if (!w.empty() && w[0] == "combo") {
      p.strategy = Strategy::UserCombination;
      std::string rest = trim(strategy_text.substr(strategy_text.find("combo") + 5));
      for (const std::string& c : split_top(rest, ';')) {
        if (c.empty()) fail(*strat_loc, "empty combination in 'strategy combo'");
        p.combos.push_back(c);
      }
    } else {
      fail(*strat_loc, "expected 'first', 'exhaustive', or 'combo <list>', "
                       "got '" + strategy_text + "'");
    }
  }

  for (const auto& [loc, stage, payload] : inverse_lines) {
    auto it = std::find_if(p.changes.begin(), p.changes.end(),
                           [&](const StageChange& c) { return c.stage == stage; });
    if (it == p.changes.end())
      fail(loc, "no 'change " + std::to_string(stage) + ":' line for this inverse");
    if (it->inverse_line)
      fail(loc, "duplicate inverse for stage " + std::to_string(stage));
    it->inverse_line = loc.line;
    it->inverses = assignments(loc, payload);
  }
  std::sort(p.changes.begin(), p.changes.end(),
            [](const StageChange& a, const StageChange& b) {
              return a.stage < b.stage;
            });

  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot open problem file '" + path + "'");
  return parse_problem(in, path);
}

std::optional<CanonicalResult> stage_change(const Problem& p, int stage,
                                            const ContextPtr& cur) {
  auto it = std::find_if(p.changes.begin(), p.changes.end(),
                         [&](const StageChange& c) { return c.stage == stage; });
  if (it == p.changes.end()) return std::nullopt;
  const StageChange& sc = *it;
  Loc loc{p.source, sc.line};

  int n = cur->independent_count();
  int d = cur->dependent_count();
  if (static_cast<int>(sc.defs.size()) != n + d)
    fail(loc, "stage " + std::to_string(stage) + " change defines " +
                  std::to_string(sc.defs.size()) + " names; need " +
                  std::to_string(n - 1) + " invariant(s), the canonical "
                  "variable, and " + std::to_string(d) + " dependent(s)");

  CanonicalResult cr;
  cr.from = cur;
  std::vector<std::string> inv_names;
  for (int j = 0; j < n - 1; ++j) {
    cr.invariants.push_back(
        {sc.defs[j].first, parse_at(loc, sc.defs[j].second, cur)});
    inv_names.push_back(sc.defs[j].first);
  }
  cr.canonical_var = {sc.defs[n - 1].first,
                      parse_at(loc, sc.defs[n - 1].second, cur)};
  for (int a = 0; a < d; ++a)
    cr.dependents.push_back(
        {sc.defs[n + a].first, parse_at(loc, sc.defs[n + a].second, cur)});

  try {
    ContextBuilder b;
    for (const auto& name : inv_names) b.independent(name);
    b.independent(cr.canonical_var.first);
    for (const auto& nd : cr.dependents) b.dependent(nd.first, inv_names);
    for (int c = 0; c < cur->parameter_count(); ++c)
      b.parameter(cur->parameter_name(c));
    for (int f = 0; f < cur->function_count(); ++f)
      b.function(cur->function_name(f),
                 cr.dependents[cur->function_arg(f)].first);
    cr.to = b.build();
  } catch (const Error& e) {
    fail(loc, e.what());
  }

  if (!sc.inverses.empty()) {
    Loc iloc{p.source, sc.inverse_line};
    std::vector<std::pair<std::string, Expr>> given;
    for (const auto& [key, val] : sc.inverses) {
      for (const auto& g : given)
        if (g.first == key) fail(iloc, "duplicate inverse for '" + key + "'");
      auto hit = cur->lookup(key);
      if (!hit || (hit->first != SymbolKind::Independent &&
                   hit->first != SymbolKind::Dependent))
        fail(iloc, "'" + key + "' is not a variable of this stage");
      given.push_back({key, parse_at(iloc, val, cr.to)});
    }
    auto take = [&](const std::string& name) {
      for (const auto& g : given)
        if (g.first == name) return g.second;
      fail(iloc, "the inverse list must define every old variable; missing '" +
                     name + "'");
    };
    for (int j = 0; j < n; ++j)
      cr.inverse_independents.push_back(take(cur->independent_name(j)));
    for (int a = 0; a < d; ++a)
      cr.inverse_dependents.push_back(take(cur->dependent_name(a)));
  }
  return cr;
}

const Generator& find_generator(const Problem& p, const std::string& name) {
  for (const auto& g : p.generators)
    if (g.first == name) return g.second;
  std::string known;
  for (const auto& g : p.generators)
    known += (known.empty() ? "" : ", ") + g.first;
  throw SemanticError("unknown generator '" + name + "'; the problem declares: " +
                      (known.empty() ? "none" : known));
}

}  // namespace dred
