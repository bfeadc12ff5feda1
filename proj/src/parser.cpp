#include "dred/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

#include "dred/error.hpp"

namespace dred {
namespace {

enum class Tok {
  kIdent,
  kInt,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kCaret,
  kLParen,
  kRParen,
  kComma,
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;
  int primes = 0;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({Tok::kInt, text.substr(i, j - i), 0, start});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) ||
                       text[j] == '_')) {
        ++j;
      }
      int primes = 0;
      while (j < n && text[j] == '\'') {
        ++primes;
        ++j;
      }
      out.push_back({Tok::kIdent, text.substr(i, j - i - primes), primes, start});
      i = j;
      continue;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::kPlus; break;
      case '-': kind = Tok::kMinus; break;
      case '*': kind = Tok::kStar; break;
      case '/': kind = Tok::kSlash; break;
      case '^': kind = Tok::kCaret; break;
      case '(': kind = Tok::kLParen; break;
      case ')': kind = Tok::kRParen; break;
      case ',': kind = Tok::kComma; break;
      default:
        throw ParseError("unexpected character '" + std::string(1, c) + "'",
                         start);
    }
    out.push_back({kind, std::string(1, c), 0, start});
    ++i;
  }
  out.push_back({Tok::kEnd, "", 0, n});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, ContextPtr ctx)
      : tokens_(std::move(tokens)), ctx_(std::move(ctx)) {}

  Expr run() {
    Expr e = parse_expr();
    if (peek().kind != Tok::kEnd) {
      throw ParseError("unexpected trailing input", peek().pos);
    }
    return e;
  }

 private:
  const Token& peek() const { return tokens_[index_]; }

  Token next() { return tokens_[index_++]; }

  bool accept(Tok kind) {
    if (peek().kind == kind) {
      ++index_;
      return true;
    }
    return false;
  }

  Token expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) {
      throw ParseError("expected " + what, peek().pos);
    }
    return next();
  }

  Expr parse_expr() {
    Expr e = parse_term();
    for (;;) {
      if (accept(Tok::kPlus)) {
        e = e + parse_term();
      } else if (accept(Tok::kMinus)) {
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (accept(Tok::kStar)) {
        e = e * parse_unary();
      } else if (accept(Tok::kSlash)) {
        e = e * Expr::power(parse_unary(), -1);
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept(Tok::kMinus)) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (!accept(Tok::kCaret)) return base;
    return Expr::power(base, parse_exponent());
  }

  // Exponents are literal integers; a chain like 2^3 folds right to left.
  long parse_exponent() {
    bool wrapped = false;
    bool negative = false;
    if (accept(Tok::kLParen)) wrapped = true;
    if (accept(Tok::kMinus)) negative = true;
    const Token tok = expect(Tok::kInt, "an integer exponent");
    long value = 0;
    try {
      value = std::stol(tok.text);
    } catch (const std::exception&) {
      throw ParseError("exponent out of range", tok.pos);
    }
    if (negative) value = -value;
    if (wrapped) expect(Tok::kRParen, "')'");
    if (accept(Tok::kCaret)) {
      const std::size_t pos = peek().pos;
      const long rest = parse_exponent();
      if (rest < 0) {
        throw ParseError("exponent chain must stay an integer", pos);
      }
      long folded = 1;
      for (long k = 0; k < rest; ++k) {
        folded *= value;
        if (folded > 1000000000L || folded < -1000000000L) {
          throw ParseError("exponent too large", pos);
        }
      }
      value = folded;
    }
    return value;
  }

  Expr parse_primary() {
    const Token tok = peek();
    if (tok.kind == Tok::kInt) {
      next();
      return Expr::constant(Rational(tok.text));
    }
    if (accept(Tok::kLParen)) {
      Expr e = parse_expr();
      expect(Tok::kRParen, "')'");
      return e;
    }
    if (tok.kind != Tok::kIdent) {
      throw ParseError("expected an expression", tok.pos);
    }
    next();
    if (tok.text == "ln" || tok.text == "exp") {
      if (tok.primes > 0) {
        throw ParseError("prime marks are only valid on declared functions",
                         tok.pos);
      }
      expect(Tok::kLParen, "'('");
      Expr arg = parse_expr();
      expect(Tok::kRParen, "')'");
      return tok.text == "ln" ? Expr::ln(arg) : Expr::exp(arg);
    }
    if (tok.text == "D") return parse_total_derivative(tok);
    const auto found = ctx_->lookup(tok.text);
    if (!found) return parse_shorthand(tok);
    const auto [kind, index] = *found;
    if (kind == SymbolKind::Function) return parse_application(tok, index);
    if (tok.primes > 0) {
      throw ParseError("prime marks are only valid on declared functions",
                       tok.pos);
    }
    if (kind == SymbolKind::Dependent) {
      return Expr::atom(DerivAtom{SymbolKind::Dependent, index, {}, 0});
    }
    return Expr::symbol(kind, index);
  }

  Expr parse_total_derivative(const Token& tok) {
    if (tok.primes > 0) {
      throw ParseError("prime marks are only valid on declared functions",
                       tok.pos);
    }
    expect(Tok::kLParen, "'('");
    const std::size_t arg_pos = peek().pos;
    Expr e = parse_expr();
    if (std::holds_alternative<SymbolNode>(e.node().v)) {
      throw ParseError("derivative of a non-dependent symbol", arg_pos);
    }
    bool any = false;
    while (accept(Tok::kComma)) {
      const Token var = expect(Tok::kIdent, "an independent variable name");
      const auto found = ctx_->lookup(var.text);
      if (!found || found->first != SymbolKind::Independent ||
          var.primes > 0) {
        throw ParseError("'" + var.text + "' is not an independent variable",
                         var.pos);
      }
      e = total_derivative_raw(e, ctx_, found->second);
      any = true;
    }
    if (!any) {
      throw ParseError("D(...) needs at least one differentiation variable",
                       peek().pos);
    }
    expect(Tok::kRParen, "')'");
    return e;
  }

  Expr parse_application(const Token& tok, int index) {
    expect(Tok::kLParen, "'('");
    const Token arg = expect(Tok::kIdent, "a dependent variable name");
    const auto found = ctx_->lookup(arg.text);
    if (!found || found->first != SymbolKind::Dependent || arg.primes > 0) {
      throw ParseError("function argument must be a dependent variable",
                       arg.pos);
    }
    if (found->second != ctx_->function_arg(index)) {
      throw ParseError("function '" + tok.text +
                           "' is not declared with argument '" + arg.text + "'",
                       arg.pos);
    }
    expect(Tok::kRParen, "')'");
    return Expr::atom(
        DerivAtom{SymbolKind::Function, index, {}, tok.primes});
  }

  // Subscript shorthand (u_tx) is resolved only when the identifier itself is
  // undeclared and every independent variable has a one-character name.
  Expr parse_shorthand(const Token& tok) {
    const std::size_t underscore = tok.text.find('_');
    if (underscore != std::string::npos && underscore > 0 &&
        underscore + 1 < tok.text.size() && tok.primes == 0 &&
        ctx_->single_char_independents()) {
      const std::string base = tok.text.substr(0, underscore);
      const std::string subs = tok.text.substr(underscore + 1);
      const auto found = ctx_->lookup(base);
      if (found && found->first == SymbolKind::Dependent) {
        std::vector<int> multi;
        bool ok = true;
        for (char c : subs) {
          const auto var = ctx_->lookup(std::string(1, c));
          if (!var || var->first != SymbolKind::Independent ||
              !ctx_->depends_on(found->second, var->second)) {
            ok = false;
            break;
          }
          multi.push_back(var->second);
        }
        if (ok) {
          return Expr::atom(
              DerivAtom{SymbolKind::Dependent, found->second, multi, 0});
        }
      }
    }
    throw ParseError("unknown identifier '" + tok.text + "'", tok.pos);
  }

  std::vector<Token> tokens_;
  ContextPtr ctx_;
  std::size_t index_ = 0;
};

}  // namespace

Expr parse(const std::string& text, const ContextPtr& ctx) {
  return normalize(Parser(tokenize(text), ctx).run());
}

}  // namespace dred
