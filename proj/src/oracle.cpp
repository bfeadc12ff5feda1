#include "dred/oracle.hpp"

#include <cmath>
#include <vector>

#include "dred/error.hpp"

namespace dred {

namespace {

// Ambiguity band: below tol counts as zero, above kNonzeroFactor*tol counts
// as nonzero, values in between are discarded as borderline draws.
constexpr double kNonzeroFactor = 1000.0;

std::vector<DerivAtom> distinct_atoms(const std::vector<Expr>& exprs) {
  std::vector<DerivAtom> out;
  for (const auto& e : exprs) {
    visit_atoms(e, [&](const SymbolNode*, const DerivAtom* a) {
      if (!a) return;
      for (const auto& seen : out)
        if (deriv_atom_cmp(seen, *a) == 0) return;
      out.push_back(*a);
    });
  }
  return out;
}

enum class SampleKind { Zero, Nonzero, Borderline };

SampleKind classify(const NumValue& v, double tol) {
  if (v.exact) return v.r == 0 ? SampleKind::Zero : SampleKind::Nonzero;
  const double m = std::abs(v.d);
  if (m <= tol) return SampleKind::Zero;
  if (m >= kNonzeroFactor * tol) return SampleKind::Nonzero;
  return SampleKind::Borderline;
}

// Draws until `count` usable samples classify cleanly; returns how many of
// them were nonzero.  `attempts` is shared across calls so the total draw
// budget is bounded.
int run_samples(const Expr& e, const ContextPtr& ctx, const ZeroCheck& opt,
                std::mt19937_64& rng, int count, int& attempts) {
  int usable = 0;
  int nonzero = 0;
  while (usable < count) {
    if (++attempts > opt.max_attempts)
      throw InconclusiveError(
          "zero test ran out of sample draws (singular or borderline region)");
    EvalPoint p = random_point({e}, ctx, rng);
    NumValue v;
    try {
      v = eval_numeric(e, ctx, p);
    } catch (const SingularPointError&) {
      continue;
    }
    switch (classify(v, opt.tol)) {
      case SampleKind::Zero:
        ++usable;
        break;
      case SampleKind::Nonzero:
        ++usable;
        ++nonzero;
        break;
      case SampleKind::Borderline:
        break;
    }
  }
  return nonzero;
}

}  // namespace

Rational random_sample_value(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> den_dist(1, 8);
  for (;;) {
    const int den = den_dist(rng);
    std::uniform_int_distribution<int> num_dist(-2 * den, 2 * den);
    const int num = num_dist(rng);
    if (4 * std::abs(num) >= den) return rat(num, den);
  }
}

EvalPoint random_point(const std::vector<Expr>& exprs, const ContextPtr& ctx,
                       std::mt19937_64& rng) {
  EvalPoint p;
  for (int i = 0; i < ctx->independent_count(); ++i)
    p.independents.push_back(random_sample_value(rng));
  for (int i = 0; i < ctx->parameter_count(); ++i)
    p.parameters.push_back(random_sample_value(rng));
  for (const auto& a : distinct_atoms(exprs)) p.set_jet(a, random_sample_value(rng));
  return p;
}

bool guarded_zero(const Expr& e, const ContextPtr& ctx, const ZeroCheck& opt) {
  const bool symbolic = is_zero_normal(e);
  std::mt19937_64 rng(opt.seed);
  int attempts = 0;
  int nonzero = run_samples(e, ctx, opt, rng, opt.samples, attempts);

  if (symbolic) {
    if (nonzero > 0)
      throw ZeroGuardError(
          "normal form reports zero but a random sample is nonzero");
    return true;
  }
  if (nonzero > 0) return false;

  // Nonzero expressions vanish on thin sets only; insist on more evidence
  // before declaring the engine inconsistent.
  nonzero = run_samples(e, ctx, opt, rng, 3 * opt.samples, attempts);
  if (nonzero > 0) return false;
  throw ZeroGuardError(
      "normal form reports nonzero but every random sample vanishes");
}

bool guarded_equal(const Expr& a, const Expr& b, const ContextPtr& ctx,
                   const ZeroCheck& opt) {
  return guarded_zero(a - b, ctx, opt);
}

}  // namespace dred
