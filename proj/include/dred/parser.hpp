#pragma once

#include <string>

#include "dred/expr.hpp"

namespace dred {

// Parses expression text against a context and returns the normalized Expr.
//
// Grammar (loosest binding first):
//   expr     := term (('+'|'-') term)*
//   term     := unary (('*'|'/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' exponent)?          // right-associative
//   exponent := ['-'] integer | '(' ['-'] integer ')'   (then '^' exponent)
//   primary  := integer
//             | '(' expr ')'
//             | ln '(' expr ')' | exp '(' expr ')'
//             | D '(' expr (',' independent)+ ')'
//             | function '\''* '(' dependent ')'
//             | identifier                        // declared symbol
//             | dep '_' i1 i2 ...                 // shorthand, single-char vars
//
// D(...) extends the multi-index when its argument is a derivative atom of a
// dependent variable and otherwise applies the total derivative eagerly;
// applying D to a bare independent or parameter symbol is an error.
Expr parse(const std::string& text, const ContextPtr& ctx);

}  // namespace dred
