#pragma once

// Textual first-order rule language: lexer, parser, linker and quantifier
// expansion.
//
//   R(x) :- exists c in C, ~Y(c) ^ Rel(x, c)
//   Rel(x, y) :- Edge(x, y) | Equal(x, y)
//
// Identifiers starting with an upper-case letter name rules, predicates and
// sets; identifiers starting with anything else are variables. `^` is the
// averaging conjunction, `&` the Lukasiewicz conjunction, `|` the bounded
// disjunction and `~` negation. Precedence: `~` > `^`/`&` > `|`; a quantifier
// body extends as far to the right as possible.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "logicdec/types.hpp"

namespace logicdec {

enum class TokenKind {
  Turnstile,  // :-
  Exists,
  Forall,
  In,
  Comma,
  Or,      // |
  AndAvg,  // ^
  AndLuk,  // &
  Not,     // ~
  LParen,
  RParen,
  Ident,
  Var,
  True,
  False,
  End,
};

std::string_view token_kind_name(TokenKind kind);

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

struct Token {
  TokenKind kind;
  std::string text;
  SourcePos pos;
};

/// Splits rule text into tokens. `#` starts a comment that runs to the end of
/// the line. The trailing End token is not included.
std::vector<Token> tokenize(std::string_view source);

/// Argument of an atom or rule reference. Parsed rules only contain
/// variables; quantifier expansion replaces bound variables with token ids.
struct Arg {
  enum class Kind { Var, Const };

  Kind kind = Kind::Var;
  std::string var;
  TokenId id = 0;

  static Arg variable(std::string name) { return Arg{Kind::Var, std::move(name), 0}; }
  static Arg constant(TokenId id) { return Arg{Kind::Const, {}, id}; }

  bool is_var() const { return kind == Kind::Var; }
  bool operator==(const Arg& other) const;
};

enum class ExprKind { Atom, Not, Or, AndAvg, AndLuk, Quant, RuleRef, Const };
enum class Quantifier { Exists, Forall };

struct RuleExpr {
  ExprKind kind = ExprKind::Const;
  // Atom: predicate name. RuleRef: referenced rule.
  std::string name;
  std::vector<Arg> args;
  // Not: one child. Or/AndAvg/AndLuk: two or more. Quant: the body.
  std::vector<RuleExpr> children;
  Quantifier quantifier = Quantifier::Exists;
  std::string bound_var;
  std::string set_name;
  double constant = 0.0;
  SourcePos pos;

  static RuleExpr atom(std::string predicate, std::vector<Arg> args);
  static RuleExpr rule_ref(std::string rule, std::vector<Arg> args);
  static RuleExpr negation(RuleExpr child);
  static RuleExpr connective(ExprKind kind, std::vector<RuleExpr> children);
  static RuleExpr quant(Quantifier q, std::string var, std::string set, RuleExpr body);
  static RuleExpr truth(double value);

  /// Structural equality; source positions are ignored.
  bool operator==(const RuleExpr& other) const;
};

struct Rule {
  std::string name;
  std::vector<std::string> params;
  RuleExpr body;
  SourcePos pos;
};

/// Built-in fact predicates, all binary.
inline const std::set<std::string, std::less<>>& builtin_predicates() {
  static const std::set<std::string, std::less<>> names{"Equal", "Edge", "W"};
  return names;
}

/// A parsed and linked set of rules. Immutable once built.
class RuleProgram {
 public:
  RuleProgram() = default;

  const Rule& rule(std::string_view name) const;
  const Rule* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  /// Rules ordered so that every rule appears after the rules it references.
  const std::vector<std::string>& dependency_order() const { return order_; }
  const std::map<std::string, Rule, std::less<>>& rules() const { return rules_; }

  /// Names of sets quantified over by `name` or any rule it references.
  std::set<std::string> required_sets(std::string_view name) const;

 private:
  friend RuleProgram link_program(std::vector<Rule> rules);

  std::map<std::string, Rule, std::less<>> rules_;
  std::vector<std::string> order_;
};

/// Parses one expression (a rule body). Does not link.
RuleExpr parse_expression(std::string_view source);

/// Parses rules without linking them.
std::vector<Rule> parse_rules(std::string_view source);

/// Checks names, arities, variable scoping and acyclicity.
RuleProgram link_program(std::vector<Rule> rules);

/// parse_rules followed by link_program.
RuleProgram parse_program(std::string_view source);

/// Reads and parses a UTF-8 rule file.
RuleProgram load_rule_file(const std::filesystem::path& path);

/// Set name -> member token ids.
using SetBindings = std::map<std::string, std::vector<TokenId>, std::less<>>;

/// Replaces every quantifier with the connective chain over its bound set.
/// `exists` becomes an Or over the instances, `forall` a single n-ary AndAvg;
/// a one-element set collapses to the instance itself.
RuleExpr expand_quantifiers(const RuleExpr& expr, const SetBindings& bindings);

/// Replaces variable `var` with `arg` everywhere it occurs free in `expr`.
RuleExpr substitute(const RuleExpr& expr, const std::string& var, const Arg& arg);

bool contains_quantifier(const RuleExpr& expr);

std::string to_string(const Arg& arg);
std::string to_string(const RuleExpr& expr);
std::string to_string(const Rule& rule);
std::string to_string(const RuleProgram& program);

}  // namespace logicdec
