#pragma once

#include <vector>

#include "dred/expr.hpp"

namespace dred {

// Dense symbolic matrix, row major.  Sizes stay tiny (one row per
// independent variable), so determinants use cofactor expansion and
// inverses go through the adjugate; no pivoting on symbolic entries.
using ExprMat = std::vector<std::vector<Expr>>;

ExprMat mat_identity(int n);
ExprMat mat_transpose(const ExprMat& m);
ExprMat mat_mul(const ExprMat& a, const ExprMat& b);

// Cofactor expansion along the first row, normalized.
Expr mat_det(const ExprMat& m);

// Classical adjugate: mat_mul(adj(m), m) = det(m) * I.  Entries normalized.
ExprMat mat_adjugate(const ExprMat& m);

}  // namespace dred
