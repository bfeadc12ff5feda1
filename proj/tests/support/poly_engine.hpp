#pragma once

// Self-contained multivariate polynomial arithmetic for cross-checking the
// engine against values it cannot influence.  Deliberately shares no code
// with the library: polynomials here are plain coefficient lists.

#include <algorithm>
#include <random>
#include <vector>

#include "dred/rational.hpp"

namespace polyeng {

using dred::Rational;

struct Poly {
  int nvars = 0;
  // parallel arrays: exponent rows and coefficients, combined lazily
  std::vector<std::vector<int>> exps;
  std::vector<Rational> coeffs;

  static Poly constant(int nvars, Rational c) {
    Poly p;
    p.nvars = nvars;
    if (c != 0) {
      p.exps.push_back(std::vector<int>(nvars, 0));
      p.coeffs.push_back(std::move(c));
    }
    return p;
  }

  static Poly var(int nvars, int i) {
    Poly p;
    p.nvars = nvars;
    std::vector<int> e(nvars, 0);
    e[i] = 1;
    p.exps.push_back(std::move(e));
    p.coeffs.push_back(Rational(1));
    return p;
  }

  Poly combined() const {
    Poly out;
    out.nvars = nvars;
    std::vector<std::size_t> order(exps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return exps[a] < exps[b]; });
    for (std::size_t i : order) {
      if (!out.exps.empty() && out.exps.back() == exps[i]) {
        out.coeffs.back() += coeffs[i];
        if (out.coeffs.back() == 0) {
          out.exps.pop_back();
          out.coeffs.pop_back();
        }
      } else if (coeffs[i] != 0) {
        out.exps.push_back(exps[i]);
        out.coeffs.push_back(coeffs[i]);
      }
    }
    return out;
  }

  bool is_zero() const { return combined().exps.empty(); }

  Poly operator+(const Poly& o) const {
    Poly out = *this;
    out.exps.insert(out.exps.end(), o.exps.begin(), o.exps.end());
    out.coeffs.insert(out.coeffs.end(), o.coeffs.begin(), o.coeffs.end());
    return out.combined();
  }

  Poly operator-(const Poly& o) const { return *this + o.scaled(Rational(-1)); }

  Poly operator*(const Poly& o) const {
    Poly out;
    out.nvars = nvars;
    for (std::size_t i = 0; i < exps.size(); ++i) {
      for (std::size_t j = 0; j < o.exps.size(); ++j) {
        std::vector<int> e(nvars);
        for (int k = 0; k < nvars; ++k) e[k] = exps[i][k] + o.exps[j][k];
        out.exps.push_back(std::move(e));
        out.coeffs.push_back(coeffs[i] * o.coeffs[j]);
      }
    }
    return out.combined();
  }

  Poly scaled(const Rational& c) const {
    Poly out = *this;
    for (auto& x : out.coeffs) x *= c;
    return out.combined();
  }

  Poly pow(int k) const {
    Poly out = constant(nvars, Rational(1));
    for (int i = 0; i < k; ++i) out = out * *this;
    return out;
  }

  Poly d(int var) const {
    Poly out;
    out.nvars = nvars;
    for (std::size_t i = 0; i < exps.size(); ++i) {
      if (exps[i][var] == 0) continue;
      std::vector<int> e = exps[i];
      Rational c = coeffs[i] * e[var];
      --e[var];
      out.exps.push_back(std::move(e));
      out.coeffs.push_back(std::move(c));
    }
    return out.combined();
  }

  Rational eval(const std::vector<Rational>& x) const {
    Rational acc(0);
    for (std::size_t i = 0; i < exps.size(); ++i) {
      Rational t = coeffs[i];
      for (int k = 0; k < nvars; ++k)
        for (int j = 0; j < exps[i][k]; ++j) t *= x[k];
      acc += t;
    }
    return acc;
  }
};

inline Poly random_poly(int nvars, int max_deg, int nterms, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 4);
  Poly p;
  p.nvars = nvars;
  for (int t = 0; t < nterms; ++t) {
    std::vector<int> e(nvars, 0);
    int budget = deg(rng);
    for (int k = 0; k < nvars && budget > 0; ++k) {
      std::uniform_int_distribution<int> part(0, budget);
      e[k] = part(rng);
      budget -= e[k];
    }
    int n = num(rng);
    if (n == 0) n = 1;
    p.exps.push_back(std::move(e));
    p.coeffs.push_back(dred::rat(n, den(rng)));
  }
  return p.combined();
}

}  // namespace polyeng
