#pragma once

#include <string>

#include "dred/expr.hpp"

namespace dred {

// Renders an expression in the grammar the parser accepts.  On normalized
// input the output is canonical and byte-stable: same expression, same text,
// on every platform.  parse(print(normalize(e))) == normalize(e).
std::string print(const Expr& e, const ContextPtr& ctx);

}  // namespace dred
