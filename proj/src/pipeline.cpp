#include "dred/pipeline.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "dred/parser.hpp"
#include "dred/printer.hpp"

namespace dred {

namespace {

// True if e mentions the independent variable explicitly or through a
// derivative along it.
bool involves_variable(const Expr& e, int indep) {
  bool hit = false;
  visit_atoms(e, [&](const SymbolNode* s, const DerivAtom* a) {
    if (s && s->kind == SymbolKind::Independent && s->index == indep) hit = true;
    if (a)
      for (int j : a->multi_index)
        if (j == indep) hit = true;
  });
  return hit;
}

// Split a normalized sum into the part free of the given variable and the
// rest.  Mod-system reduction can leave a residue that vanishes only through
// an uncancelled denominator; the caller tests the second part for zero.
std::pair<Expr, Expr> split_by_variable(const Expr& e, int indep) {
  std::vector<Expr> keep, carry;
  if (const auto* s = node_as<SumNode>(e)) {
    for (const Expr& t : s->terms)
      (involves_variable(t, indep) ? carry : keep).push_back(t);
  } else {
    (involves_variable(e, indep) ? carry : keep).push_back(e);
  }
  auto pack = [](std::vector<Expr>& v) {
    if (v.empty()) return Expr::constant(0);
    return normalize(Expr::sum(std::move(v)));
  };
  return {pack(keep), pack(carry)};
}

// b's multi-index is a sub-multiset of a's (both sorted ascending).
bool multi_subset(const std::vector<int>& b, const std::vector<int>& a) {
  std::size_t i = 0;
  for (int x : b) {
    while (i < a.size() && a[i] < x) ++i;
    if (i == a.size() || a[i] != x) return false;
    ++i;
  }
  return true;
}

bool leads_conflict(const DerivAtom& a, const DerivAtom& b) {
  if (a.base_kind != b.base_kind || a.base != b.base) return false;
  return multi_subset(a.multi_index, b.multi_index) ||
         multi_subset(b.multi_index, a.multi_index);
}

bool single_variable(const DerivAtom& a) {
  for (int j : a.multi_index)
    if (j != a.multi_index[0]) return false;
  return true;
}

// Leading derivative of one equation: highest order wins; among those,
// derivatives along a single variable beat mixed ones, earlier-declared
// variables beat later ones.  Atoms clashing with already-taken leads are
// skipped.
DerivAtom choose_leading(const Expr& eq, const std::vector<DerivAtom>& taken) {
  std::vector<DerivAtom> cands;
  visit_atoms(eq, [&](const SymbolNode*, const DerivAtom* a) {
    if (!a || a->base_kind != SymbolKind::Dependent || a->multi_index.empty())
      return;
    for (const DerivAtom& c : cands)
      if (c == *a) return;
    cands.push_back(*a);
  });
  if (cands.empty())
    throw UnsupportedError("an equation has no derivative to solve for");
  std::size_t top = 0;
  for (const DerivAtom& a : cands) top = std::max(top, a.multi_index.size());
  std::vector<DerivAtom> best;
  for (const DerivAtom& a : cands)
    if (a.multi_index.size() == top) best.push_back(a);
  std::sort(best.begin(), best.end(), [](const DerivAtom& a, const DerivAtom& b) {
    bool sa = single_variable(a), sb = single_variable(b);
    if (sa != sb) return sa;
    if (a.multi_index != b.multi_index) return a.multi_index < b.multi_index;
    return a.base < b.base;
  });
  for (const DerivAtom& a : best) {
    bool clash = false;
    for (const DerivAtom& t : taken)
      if (leads_conflict(a, t)) clash = true;
    if (!clash) return a;
  }
  throw UnsupportedError(
      "cannot pick a leading derivative: every candidate overlaps another "
      "equation's lead");
}

PdeSystem solve_equations(const ContextPtr& ctx, const std::vector<Expr>& eqs) {
  std::vector<std::pair<DerivAtom, Expr>> pairs;
  std::vector<DerivAtom> taken;
  for (const Expr& e : eqs) {
    DerivAtom lead = choose_leading(e, taken);
    taken.push_back(lead);
    pairs.push_back({lead, e});
  }
  return make_system(ctx, pairs);
}

bool generator_zero(const Generator& X) {
  for (const Expr& c : X.xi)
    if (!is_zero_normal(c)) return false;
  for (const Expr& c : X.eta)
    if (!is_zero_normal(c)) return false;
  return true;
}

std::vector<int> parameter_map(const ContextPtr& from, const ContextPtr& to) {
  std::vector<int> map;
  for (int p = 0; p < from->parameter_count(); ++p) {
    auto hit = to->lookup(from->parameter_name(p));
    if (!hit || hit->first != SymbolKind::Parameter)
      throw SemanticError("parameter '" + from->parameter_name(p) +
                          "' is missing from the original context");
    map.push_back(hit->second);
  }
  return map;
}

std::string nonzero_component(const std::vector<Expr>& brackets,
                              const ContextPtr& ctx) {
  for (std::size_t i = 0; i < brackets.size(); ++i)
    if (!is_zero_normal(brackets[i]))
      return "component along '" + ctx->independent_name(static_cast<int>(i)) +
             "' reduces to " + print(brackets[i], ctx);
  return "a component fails the numeric check";
}

}  // namespace

int jet_order(const Expr& e) {
  int top = 0;
  visit_atoms(e, [&](const SymbolNode*, const DerivAtom* a) {
    if (a && a->base_kind == SymbolKind::Dependent)
      top = std::max(top, static_cast<int>(a->multi_index.size()));
  });
  return top;
}

int system_order(const PdeSystem& sys) {
  int top = 0;
  for (const Expr& e : sys.equations) top = std::max(top, jet_order(e));
  return top;
}

ReductionStep reduce_once(const PdeSystem& sys, const std::vector<Expr>& T,
                          const Generator& X, const GeneratorPool& pool,
                          const std::vector<bool>& consumed,
                          const StepOptions& opt) {
  const ContextPtr& ctx = sys.ctx;
  int n = ctx->independent_count();
  if (n < 2)
    throw SemanticError("nothing to reduce: only one independent variable");
  if (static_cast<int>(T.size()) != n)
    throw SemanticError("need one conserved component per independent variable");

  AssociationResult ar = is_associated(T, X, sys, opt.check);
  if (!ar.associated)
    throw NotAssociatedError("generator " + opt.name +
                             " is not associated with the flux: " +
                             nonzero_component(ar.reduced_brackets, ctx));

  ReductionStep step;
  step.used_name = opt.name;
  step.used = X;
  CanonicalOptions copt;
  copt.stage = opt.stage;
  step.canon = opt.change ? *opt.change : canonical_coordinates(X, copt);
  step.change = build_change(step.canon, ctx);
  const CoordinateChange& ch = step.change;
  int q = n - 1;  // canonical variable comes last by construction
  const std::string& q_name = ch.to->independent_name(q);

  // the change must straighten X into pure translation along q
  Generator pushed = transform_generator(X, ch);
  bool straight = true;
  for (int j = 0; j < n; ++j)
    straight = straight && guarded_zero(pushed.xi[j] - Expr::constant(j == q),
                                        ch.to, opt.check);
  for (const Expr& c : pushed.eta)
    straight = straight && guarded_zero(c, ch.to, opt.check);
  if (!straight)
    throw ChangeError("the change of variables does not straighten " +
                      opt.name + ": its push-forward is " +
                      format_generator(pushed) + ", not d/d" + q_name);

  // system in the new variables; a common monomial factor (often a power of
  // exp along the canonical direction) is divided out first
  std::vector<Expr> eqs;
  for (const Expr& e : sys.equations) {
    Expr te = strip_content(rewrite(ch, e));
    if (involves_variable(te, q))
      throw ChangeError("the transformed system still involves the canonical "
                        "variable '" +
                        q_name + "'; the change does not reduce it");
    eqs.push_back(te);
  }

  // transported flux; components along the invariants must shed the
  // canonical variable, identically or modulo the transformed system
  std::vector<Expr> Tt = transform_conserved(T, ch);
  std::optional<PdeSystem> mid;
  auto ensure_mid = [&] {
    if (!mid) mid = solve_equations(ch.to, eqs);
  };
  for (int i = 0; i < q; ++i) {
    if (!involves_variable(Tt[i], q)) continue;
    ensure_mid();
    Tt[i] = reduce_mod_system(Tt[i], *mid);
    if (!involves_variable(Tt[i], q)) continue;
    auto parts = split_by_variable(Tt[i], q);
    if (!guarded_zero(parts.second, ch.to, opt.check))
      throw ChangeError("the transported flux keeps the canonical variable '" +
                        q_name + "' in its '" + ch.to->independent_name(i) +
                        "' component");
    Tt[i] = parts.first;
  }
  if (involves_variable(Tt[q], q)) {
    ensure_mid();
    Expr red = reduce_mod_system(Tt[q], *mid);
    auto parts = split_by_variable(red, q);
    if (guarded_zero(parts.second, ch.to, opt.check)) Tt[q] = parts.first;
  }
  step.canonical_component = Tt[q];
  Expr dq = total_derivative(Tt[q], ch.to, {q});
  if (is_zero_normal(dq)) {
    step.canonical_component_static = true;
  } else {
    ensure_mid();
    step.canonical_component_static =
        guarded_zero(reduce_mod_system(dq, *mid), ch.to, opt.check);
  }

  // reduced context: the invariants, full dependency profile
  ContextBuilder b;
  for (int j = 0; j < q; ++j) b.independent(ch.to->independent_name(j));
  for (int a = 0; a < ch.to->dependent_count(); ++a)
    b.dependent(ch.to->dependent_name(a));
  for (int p = 0; p < ch.to->parameter_count(); ++p)
    b.parameter(ch.to->parameter_name(p));
  for (int f = 0; f < ch.to->function_count(); ++f)
    b.function(ch.to->function_name(f),
               ch.to->dependent_name(ch.to->function_arg(f)));
  step.reduced_ctx = b.build();

  std::vector<Expr> red_eqs;
  for (const Expr& e : eqs) red_eqs.push_back(migrate(e, ch.to, step.reduced_ctx));
  step.reduced_system = solve_equations(step.reduced_ctx, red_eqs);
  for (int i = 0; i < q; ++i)
    step.reduced_T.push_back(migrate(Tt[i], ch.to, step.reduced_ctx));

  // the law must carry over; anything else is an engine defect
  DivergenceReport dr =
      check_divergence(step.reduced_T, step.reduced_system, opt.check);
  if (!dr.conserved)
    throw Error("transported flux fails its divergence check in the new "
                "variables; this is a bug");

  for (std::size_t k = 0; k < pool.size(); ++k) {
    InheritedGenerator ig;
    ig.name = pool[k].first;
    ig.consumed = k < consumed.size() && consumed[k];
    ig.full = transform_generator(pool[k].second, ch);
    try {
      Generator p = project_generator(ig.full, step.reduced_ctx);
      if (generator_zero(p)) {
        ig.note = "degenerates to zero on the invariants";
      } else {
        ig.inheritable = true;
        ig.projected = p;
        if (ig.consumed) ig.note = "excluded from later stages";
      }
    } catch (const ChangeError& ce) {
      ig.note = ce.what();
    }
    step.inherited.push_back(std::move(ig));
  }

  for (const auto& [name, e] : step.canon.invariants)
    step.definitions.push_back({name, normalize(e)});
  step.definitions.push_back({step.canon.canonical_var.first,
                              normalize(step.canon.canonical_var.second)});
  for (const auto& [name, e] : step.canon.dependents)
    step.definitions.push_back({name, normalize(e)});
  return step;
}

std::vector<Expr> parse_combination(const std::string& text,
                                    const GeneratorPool& pool,
                                    const ContextPtr& ctx) {
  std::vector<Expr> coeffs(pool.size(), Expr());
  // longest names first so that X12 is never read as X1
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pool[a].first.size() > pool[b].first.size();
  });

  // split into signed terms at top-level + and -
  std::vector<std::pair<int, std::string>> terms;
  int depth = 0, sign = 1;
  std::string cur;
  auto flush = [&](int next_sign) {
    std::string t = cur;
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    if (!t.empty()) terms.push_back({sign, t});
    cur.clear();
    sign = next_sign;
  };
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && (c == '+' || c == '-')) {
      flush(c == '-' ? -1 : 1);
      continue;
    }
    cur.push_back(c);
  }
  flush(1);
  if (terms.empty())
    throw SemanticError("empty generator combination '" + text + "'");

  for (const auto& [s, t] : terms) {
    std::optional<std::size_t> who;
    std::string coeff_text;
    for (std::size_t i : order) {
      const std::string& name = pool[i].first;
      if (t == name) {
        who = i;
        break;
      }
      if (t.size() > name.size() + 1 &&
          t.compare(t.size() - name.size(), name.size(), name) == 0 &&
          t[t.size() - name.size() - 1] == '*') {
        who = i;
        coeff_text = t.substr(0, t.size() - name.size() - 1);
        break;
      }
      if (t.size() > name.size() + 1 && t.compare(0, name.size(), name) == 0 &&
          t[name.size()] == '*') {
        who = i;
        coeff_text = t.substr(name.size() + 1);
        break;
      }
    }
    if (!who) {
      std::string names;
      for (const auto& [name, g] : pool) names += (names.empty() ? "" : ", ") + name;
      throw SemanticError("cannot read the term '" + t +
                          "' in the combination; known generators: " + names);
    }
    Expr c = coeff_text.empty() ? Expr::constant(1) : parse(coeff_text, ctx);
    bool bad = contains_dependent_atoms(c);
    visit_atoms(c, [&](const SymbolNode* sym, const DerivAtom*) {
      if (sym && sym->kind == SymbolKind::Independent) bad = true;
    });
    if (bad)
      throw SemanticError("combination coefficients must be constants or "
                          "parameters, got '" +
                          coeff_text + "'");
    coeffs[*who] = normalize(coeffs[*who] + Expr::constant(s) * c);
  }
  return coeffs;
}

namespace {

std::string combination_name(const GeneratorPool& pool,
                             const std::vector<Expr>& coeffs,
                             const ContextPtr& ctx) {
  std::string out;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    Expr c = normalize(coeffs[k]);
    if (is_zero_normal(c)) continue;
    std::string piece;
    if (c.is_constant() && c.constant_value() == Rational(1))
      piece = pool[k].first;
    else
      piece = print(c, ctx) + "*" + pool[k].first;
    out += out.empty() ? piece : " + " + piece;
  }
  return out.empty() ? "0" : out;
}

}  // namespace

Selection select_associated(const PdeSystem& sys, const std::vector<Expr>& T,
                            const GeneratorPool& pool,
                            const std::vector<bool>& consumed,
                            const PipelineOptions& opt, int stage) {
  Selection sel;
  auto spent = [&](std::size_t k) {
    return k < consumed.size() && consumed[k];
  };

  if (opt.strategy == Strategy::UserCombination) {
    if (stage - 1 >= static_cast<int>(opt.combos.size())) {
      sel.diagnostic = "no generator combination supplied for stage " +
                       std::to_string(stage);
      return sel;
    }
    std::vector<Expr> coeffs =
        parse_combination(opt.combos[stage - 1], pool, sys.ctx);
    std::vector<Generator> gens;
    for (const auto& [name, g] : pool) gens.push_back(g);
    sel.X = combine(gens, coeffs);
    if (generator_zero(sel.X))
      throw SemanticError("the combination '" + opt.combos[stage - 1] +
                          "' is the zero generator");
    sel.name = combination_name(pool, coeffs, sys.ctx);
    for (const Expr& c : coeffs)
      sel.coefficient_nonzero.push_back(!is_zero_normal(c));
    sel.found = true;  // association is checked (and may fail) in reduce_once
    return sel;
  }

  if (opt.strategy == Strategy::FirstDeclared) {
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (spent(k)) continue;
      if (!is_associated(T, pool[k].second, sys, opt.check).associated) continue;
      sel.found = true;
      sel.X = pool[k].second;
      sel.name = pool[k].first;
      sel.coefficient_nonzero.assign(pool.size(), false);
      sel.coefficient_nonzero[k] = true;
      return sel;
    }
    sel.diagnostic = "no remaining generator is associated with the flux";
    return sel;
  }

  // exhaustive: tuples over {0, 1, declared parameters} on the unspent
  // generators, fewest nonzero entries first, then declaration order
  std::vector<std::size_t> alive;
  for (std::size_t k = 0; k < pool.size(); ++k)
    if (!spent(k)) alive.push_back(k);
  int P = sys.ctx->parameter_count();
  const std::size_t radix = static_cast<std::size_t>(P) + 2;
  double space = 1;
  for (std::size_t i = 0; i < alive.size(); ++i) space *= static_cast<double>(radix);
  if (alive.empty() || space > 200000) {
    sel.diagnostic = alive.empty()
                         ? "no generators left to combine"
                         : "the combination search space is too large; pass an "
                           "explicit combination";
    return sel;
  }

  std::vector<std::vector<std::size_t>> tuples;
  std::vector<std::size_t> digits(alive.size(), 0);
  for (;;) {
    tuples.push_back(digits);
    std::size_t i = 0;
    while (i < digits.size() && ++digits[i] == radix) digits[i++] = 0;
    if (i == digits.size()) break;
  }
  auto key = [](const std::vector<std::size_t>& d) {
    std::vector<std::size_t> k;
    k.push_back(0);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d[i]) {
        ++k[0];
        k.push_back(i);
        k.push_back(d[i]);
      }
    return k;
  };
  std::sort(tuples.begin(), tuples.end(),
            [&](const auto& a, const auto& b) { return key(a) < key(b); });

  std::vector<Generator> gens;
  for (const auto& [name, g] : pool) gens.push_back(g);
  for (const auto& d : tuples) {
    bool all_zero = true;
    for (std::size_t x : d) all_zero = all_zero && x == 0;
    if (all_zero) continue;
    std::vector<Expr> coeffs(pool.size(), Expr());
    for (std::size_t i = 0; i < alive.size(); ++i) {
      if (d[i] == 0) continue;
      coeffs[alive[i]] = d[i] == 1 ? Expr::constant(1)
                                   : Expr::symbol(SymbolKind::Parameter,
                                                  static_cast<int>(d[i]) - 2);
    }
    Generator X = combine(gens, coeffs);
    if (!is_associated(T, X, sys, opt.check).associated) continue;
    sel.found = true;
    sel.X = X;
    sel.name = combination_name(pool, coeffs, sys.ctx);
    for (const Expr& c : coeffs)
      sel.coefficient_nonzero.push_back(!is_zero_normal(c));
    return sel;
  }
  sel.diagnostic = "no combination of the remaining generators is associated "
                   "with the flux";
  return sel;
}

ReductionTrace run_pipeline(const PdeSystem& sys, const std::vector<Expr>& T,
                            const GeneratorPool& generators,
                            const PipelineOptions& opt) {
  ReductionTrace trace;
  trace.original_ctx = sys.ctx;
  trace.original_order = system_order(sys);
  trace.final_system = sys;
  trace.final_T = T;

  if (!check_divergence(T, sys, opt.check).conserved) {
    trace.diagnostic = "the given flux is not a conservation law of the system";
    trace.final_order = trace.original_order;
    return trace;
  }

  GeneratorPool pool = generators;
  std::vector<bool> consumed(pool.size(), false);
  PdeSystem cur = sys;
  std::vector<Expr> cur_T = T;

  // running definitions of the current variables in the original ones
  std::vector<Expr> def_ind, def_dep;
  for (int i = 0; i < sys.ctx->independent_count(); ++i)
    def_ind.push_back(Expr::symbol(SymbolKind::Independent, i));
  for (int a = 0; a < sys.ctx->dependent_count(); ++a)
    def_dep.push_back(
        Expr::atom(DerivAtom{SymbolKind::Dependent, a, {}, 0}));

  int stage = 1;
  while (cur.ctx->independent_count() > 1) {
    Selection sel = select_associated(cur, cur_T, pool, consumed, opt, stage);
    if (!sel.found) {
      trace.diagnostic = sel.diagnostic;
      break;
    }
    for (std::size_t k = 0; k < pool.size(); ++k)
      if (k < sel.coefficient_nonzero.size() && sel.coefficient_nonzero[k])
        consumed[k] = true;

    std::optional<CanonicalResult> user;
    if (opt.change_provider) user = opt.change_provider(stage, cur.ctx);
    StepOptions so;
    so.stage = stage;
    so.name = sel.name;
    so.change = user ? &*user : nullptr;
    so.check = opt.check;
    ReductionStep step = reduce_once(cur, cur_T, sel.X, pool, consumed, so);

    // rewrite this stage's definitions over the original context
    std::vector<int> pmap = parameter_map(cur.ctx, sys.ctx);
    for (auto& [name, e] : step.definitions)
      e = point_substitute(e, def_ind, def_dep, pmap);
    std::vector<Expr> next_ind, next_dep;
    for (std::size_t i = 0; i < step.canon.invariants.size(); ++i)
      next_ind.push_back(step.definitions[i].second);
    for (std::size_t a = 0; a < step.canon.dependents.size(); ++a)
      next_dep.push_back(
          step.definitions[step.canon.invariants.size() + 1 + a].second);
    def_ind = std::move(next_ind);
    def_dep = std::move(next_dep);

    GeneratorPool next_pool;
    std::vector<bool> next_consumed;
    for (std::size_t k = 0; k < step.inherited.size(); ++k) {
      if (!step.inherited[k].inheritable) continue;
      next_pool.push_back({step.inherited[k].name, step.inherited[k].projected});
      next_consumed.push_back(consumed[k]);
    }
    cur = step.reduced_system;
    cur_T = step.reduced_T;
    pool = std::move(next_pool);
    consumed = std::move(next_consumed);
    trace.steps.push_back(std::move(step));
    ++stage;
  }

  trace.final_system = cur;
  trace.final_T = cur_T;
  if (cur.ctx->independent_count() == 1) {
    trace.complete = true;
    FirstIntegral fi;
    fi.lhs = cur_T[0];
    trace.integral = fi;
    trace.final_order = jet_order(fi.lhs);
  } else {
    trace.final_order = system_order(cur);
    if (trace.diagnostic.empty())
      trace.diagnostic = "reduction stopped early";
  }
  return trace;
}

std::string format_generator(const Generator& X) {
  std::string out;
  auto add = [&](const Expr& c, const std::string& var) {
    Expr v = normalize(c);
    if (is_zero_normal(v)) return;
    std::string d = "d/d" + var;
    std::string piece;
    if (v.is_constant() && v.constant_value() == Rational(1)) {
      piece = d;
    } else if (v.is_constant() && v.constant_value() == Rational(-1)) {
      piece = "-" + d;
    } else {
      std::string cs = print(v, X.ctx);
      if (cs.find(' ') != std::string::npos) cs = "(" + cs + ")";
      piece = cs + "*" + d;
    }
    out += out.empty() ? piece : " + " + piece;
  };
  for (int j = 0; j < X.ctx->independent_count(); ++j)
    add(X.xi[j], X.ctx->independent_name(j));
  for (int a = 0; a < X.ctx->dependent_count(); ++a)
    add(X.eta[a], X.ctx->dependent_name(a));
  return out.empty() ? "0" : out;
}

std::string format_step(const ReductionStep& st, int stage) {
  std::ostringstream os;
  const ContextPtr& from = st.change.from;
  const ContextPtr& to = st.change.to;
  os << "stage " << stage << ": reduce along " << st.used_name << "\n";
  os << "  new coordinates:\n";
  for (const auto& [name, e] : st.canon.invariants)
    os << "    " << name << " = " << print(e, from) << "\n";
  os << "    " << st.canon.canonical_var.first << " = "
     << print(st.canon.canonical_var.second, from) << "\n";
  for (const auto& [name, e] : st.canon.dependents)
    os << "    " << name << " = " << print(e, from) << "\n";
  os << "  jacobian: " << print(st.change.J, to) << "\n";
  os << "  transported flux:\n";
  for (std::size_t i = 0; i < st.reduced_T.size(); ++i)
    os << "    T^" << st.reduced_ctx->independent_name(static_cast<int>(i))
       << " = " << print(st.reduced_T[i], st.reduced_ctx) << "\n";
  os << "    T^" << to->independent_name(to->independent_count() - 1) << " = "
     << print(st.canonical_component, to)
     << (st.canonical_component_static
             ? "  [its divergence term vanishes; dropped]"
             : "  [dropped]")
     << "\n";
  os << "  reduced system:\n";
  for (std::size_t a = 0; a < st.reduced_system.leads.size(); ++a)
    os << "    " << print(Expr::atom(st.reduced_system.leads[a]), st.reduced_ctx)
       << " = " << print(st.reduced_system.rhs[a], st.reduced_ctx) << "\n";
  os << "  inherited generators:\n";
  for (const InheritedGenerator& ig : st.inherited) {
    os << "    " << ig.name << ": " << format_generator(ig.full) << "  ->  ";
    if (ig.inheritable)
      os << format_generator(ig.projected);
    else
      os << "not inherited (" << ig.note << ")";
    if (ig.consumed) os << "  [used]";
    os << "\n";
  }
  return os.str();
}

std::string format_trace(const ReductionTrace& trace) {
  std::ostringstream os;
  os << "original system: order " << trace.original_order << " in "
     << trace.original_ctx->independent_count() << " independent variables\n";
  for (std::size_t s = 0; s < trace.steps.size(); ++s)
    os << "\n" << format_step(trace.steps[s], static_cast<int>(s) + 1);
  os << "\n";
  if (trace.complete && trace.integral) {
    os << "first integral: "
       << print(trace.integral->lhs, trace.final_system.ctx) << " = "
       << trace.integral->constant_name << "\n";
    if (!trace.steps.empty()) {
      os << "in the original variables:\n";
      for (const auto& [name, e] : trace.steps.back().definitions)
        os << "  " << name << " = " << print(e, trace.original_ctx) << "\n";
    }
  } else {
    os << "stopped: " << trace.diagnostic << "\n";
  }
  os << "order: " << trace.original_order << " -> " << trace.final_order << "\n";
  return os.str();
}

}  // namespace dred
