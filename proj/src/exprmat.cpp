#include "dred/exprmat.hpp"

#include <utility>

namespace dred {

namespace {

void check_square(const ExprMat& m) {
  if (m.empty()) throw SemanticError("empty matrix");
  for (const auto& row : m)
    if (row.size() != m.size()) throw SemanticError("matrix is not square");
}

ExprMat minor_of(const ExprMat& m, std::size_t row, std::size_t col) {
  ExprMat out;
  out.reserve(m.size() - 1);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i == row) continue;
    std::vector<Expr> r;
    r.reserve(m.size() - 1);
    for (std::size_t j = 0; j < m.size(); ++j)
      if (j != col) r.push_back(m[i][j]);
    out.push_back(std::move(r));
  }
  return out;
}

Expr det_raw(const ExprMat& m) {
  if (m.size() == 1) return m[0][0];
  std::vector<Expr> terms;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[0][j].is_literal_zero()) continue;
    Expr t = m[0][j] * det_raw(minor_of(m, 0, j));
    terms.push_back(j % 2 ? -t : t);
  }
  return Expr::sum(std::move(terms));
}

}  // namespace

ExprMat mat_identity(int n) {
  ExprMat m(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i) m[i][i] = Expr::constant(1);
  return m;
}

ExprMat mat_transpose(const ExprMat& m) {
  if (m.empty()) return {};
  ExprMat out(m[0].size(), std::vector<Expr>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) out[j][i] = m[i][j];
  return out;
}

ExprMat mat_mul(const ExprMat& a, const ExprMat& b) {
  if (a.empty() || b.empty() || a[0].size() != b.size())
    throw SemanticError("matrix size mismatch");
  ExprMat out(a.size(), std::vector<Expr>(b[0].size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j) {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < b.size(); ++k)
        terms.push_back(a[i][k] * b[k][j]);
      out[i][j] = normalize(Expr::sum(std::move(terms)));
    }
  return out;
}

Expr mat_det(const ExprMat& m) {
  check_square(m);
  return normalize(det_raw(m));
}

ExprMat mat_adjugate(const ExprMat& m) {
  check_square(m);
  std::size_t n = m.size();
  ExprMat out(n, std::vector<Expr>(n));
  if (n == 1) {
    out[0][0] = Expr::constant(1);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Expr c = normalize(det_raw(minor_of(m, i, j)));
      // adj(m)[j][i] = (-1)^{i+j} * minor(i, j)
      out[j][i] = (i + j) % 2 ? normalize(-c) : c;
    }
  return out;
}

}  // namespace dred
