#pragma once

// Recursive-descent parser for the formula syntax.
//
//   formula := quant | iff
//   quant   := ("forall" | "exists") IDENT "." formula
//   iff     := impl ("<->" impl)*
//   impl    := disj ("->" impl)?
//   disj    := conj ("|" conj)*
//   conj    := lit ("&" lit)*
//   lit     := "!" lit | "(" formula ")" | quant | atom
//   atom    := IDENT "(" term ("," term)* ")" | term ("=" | "!=") term
//   term    := IDENT | NUMBER
//
// Binding strength: ! > & > | > -> > <->. Implication is right-associative.
// A quantifier extends as far to the right as possible.

#include <cctype>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hornopt/error.hpp"
#include "hornopt/logic.hpp"

namespace hornopt {

/// Where a formula sits in its enclosing file, for error locations.
struct SourceOrigin {
  std::size_t line = 1;
  std::size_t column = 1;
};

namespace detail {

struct Token {
  enum class Kind {
    ident,
    number,
    lparen,
    rparen,
    comma,
    dot,
    bang,
    amp,
    bar,
    arrow,
    iff,
    eq,
    neq,
    end
  };
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline std::vector<Token> tokenize(std::string_view src, SourceOrigin origin) {
  std::vector<Token> out;
  std::size_t line = origin.line;
  std::size_t col = origin.column;
  std::size_t i = 0;
  auto push = [&](Token::Kind k, std::size_t len) {
    out.push_back({k, std::string(src.substr(i, len)), line, col});
    i += len;
    col += len;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' ||
              src[j] == '\''))
        ++j;
      push(Token::Kind::ident, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      push(Token::Kind::number, j - i);
      continue;
    }
    auto rest = src.substr(i);
    if (rest.starts_with("<->")) { push(Token::Kind::iff, 3); continue; }
    if (rest.starts_with("->")) { push(Token::Kind::arrow, 2); continue; }
    if (rest.starts_with("!=")) { push(Token::Kind::neq, 2); continue; }
    switch (c) {
      case '(': push(Token::Kind::lparen, 1); continue;
      case ')': push(Token::Kind::rparen, 1); continue;
      case ',': push(Token::Kind::comma, 1); continue;
      case '.': push(Token::Kind::dot, 1); continue;
      case '!': push(Token::Kind::bang, 1); continue;
      case '&': push(Token::Kind::amp, 1); continue;
      case '|': push(Token::Kind::bar, 1); continue;
      case '=': push(Token::Kind::eq, 1); continue;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line,
                         col);
    }
  }
  out.push_back({Token::Kind::end, "", line, col});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Vocabulary& vocab,
         std::span<const RelationDecl> so_sig,
         std::span<const std::string> free_vars)
      : toks_(std::move(tokens)), vocab_(vocab), so_sig_(so_sig),
        free_vars_(free_vars) {}

  FormulaPtr parse() {
    FormulaPtr f = formula();
    if (peek().kind != Token::Kind::end) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  using K = Token::Kind;

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool accept(K k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  const Token& expect(K k, const char* what) {
    if (peek().kind != k)
      fail(std::string("expected ") + what + ", found " +
           (peek().kind == K::end ? std::string("end of input")
                                  : "'" + peek().text + "'"));
    return next();
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) {
    throw ParseError(msg, t.line, t.column);
  }

  bool at_quantifier() const {
    return peek().kind == K::ident &&
           (peek().text == "forall" || peek().text == "exists");
  }

  FormulaPtr formula() {
    if (at_quantifier()) return quant();
    return iff();
  }

  FormulaPtr quant() {
    bool universal = next().text == "forall";
    const Token& var = expect(K::ident, "variable name");
    if (var.text == "forall" || var.text == "exists")
      fail_at(var, "keyword used as variable");
    expect(K::dot, "'.'");
    bound_.push_back(var.text);
    FormulaPtr body = formula();
    bound_.pop_back();
    return universal ? Formula::forall(var.text, body)
                     : Formula::exists(var.text, body);
  }

  FormulaPtr iff() {
    FormulaPtr lhs = impl();
    while (accept(K::iff)) lhs = Formula::biconditional(lhs, impl());
    return lhs;
  }

  FormulaPtr impl() {
    FormulaPtr lhs = disj();
    if (accept(K::arrow)) {
      FormulaPtr rhs = at_quantifier() ? quant() : impl();
      return Formula::implication(lhs, rhs);
    }
    return lhs;
  }

  FormulaPtr disj() {
    FormulaPtr lhs = conj();
    while (accept(K::bar)) lhs = Formula::disjunction(lhs, conj());
    return lhs;
  }

  FormulaPtr conj() {
    FormulaPtr lhs = lit();
    while (accept(K::amp)) lhs = Formula::conjunction(lhs, lit());
    return lhs;
  }

  FormulaPtr lit() {
    if (accept(K::bang)) return Formula::negation(lit());
    if (accept(K::lparen)) {
      FormulaPtr f = formula();
      expect(K::rparen, "')'");
      return f;
    }
    if (at_quantifier()) return quant();
    return atom();
  }

  FormulaPtr atom() {
    const Token& head = peek();
    if (head.kind == K::ident && toks_[pos_ + 1].kind == K::lparen) {
      next();
      next();
      std::vector<Term> args;
      args.push_back(term());
      while (accept(K::comma)) args.push_back(term());
      expect(K::rparen, "')'");
      check_relation(head, args.size());
      return Formula::atom(head.text, std::move(args));
    }
    if (head.kind != K::ident && head.kind != K::number)
      fail(head.kind == K::end ? "unexpected end of input"
                               : "unexpected '" + head.text + "'");
    Term lhs = term();
    if (accept(K::eq)) return Formula::equal(lhs, term());
    if (accept(K::neq)) return Formula::negation(Formula::equal(lhs, term()));
    if (head.kind == K::ident && is_relation(head.text))
      fail_at(head, "relation '" + head.text + "' used without arguments");
    fail("expected '=' or '!=' after term");
  }

  bool is_relation(const std::string& name) const {
    if (vocab_.arity_of(name)) return true;
    for (const auto& r : so_sig_)
      if (r.name == name) return true;
    return false;
  }

  void check_relation(const Token& t, std::size_t given) const {
    std::optional<std::size_t> arity = vocab_.arity_of(t.text);
    if (!arity)
      for (const auto& r : so_sig_)
        if (r.name == t.text) arity = r.arity;
    if (!arity) fail_at(t, "unknown relation '" + t.text + "'");
    if (*arity != given)
      fail_at(t, "arity mismatch: '" + t.text + "' takes " +
                     std::to_string(*arity) + " argument(s), given " +
                     std::to_string(given));
  }

  Term term() {
    const Token& t = peek();
    if (t.kind == K::number) {
      next();
      try {
        unsigned long v = std::stoul(t.text);
        if (v > UINT32_MAX) throw std::out_of_range("element");
        return Term::literal(static_cast<Element>(v));
      } catch (const std::exception&) {
        fail_at(t, "element literal out of range");
      }
    }
    if (t.kind != K::ident) fail("expected a term");
    next();
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (*it == t.text) return Term::variable(t.text);
    for (const auto& v : free_vars_)
      if (v == t.text) return Term::variable(t.text);
    if (vocab_.is_constant(t.text)) return Term::constant(t.text);
    fail_at(t, "unknown symbol '" + t.text +
                   "' (not a bound variable, free variable or constant)");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Vocabulary& vocab_;
  std::span<const RelationDecl> so_sig_;
  std::span<const std::string> free_vars_;
  std::vector<std::string> bound_;
};

}  // namespace detail

/// Parses formula text. Atoms must name a vocabulary relation, a built-in, or
/// a second-order predicate, with matching arity. Identifiers in term position
/// resolve to bound variables, then free_vars, then constants.
inline FormulaPtr parse_formula(std::string_view text, const Vocabulary& vocab,
                                std::span<const RelationDecl> so_sig = {},
                                std::span<const std::string> free_vars = {},
                                SourceOrigin origin = {}) {
  detail::Parser p(detail::tokenize(text, origin), vocab, so_sig, free_vars);
  return p.parse();
}

}  // namespace hornopt
