#include "logicdec/rule_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

#include "logicdec/error.hpp"

namespace logicdec {

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Turnstile: return "':-'";
    case TokenKind::Exists: return "'exists'";
    case TokenKind::Forall: return "'forall'";
    case TokenKind::In: return "'in'";
    case TokenKind::Comma: return "','";
    case TokenKind::Or: return "'|'";
    case TokenKind::AndAvg: return "'^'";
    case TokenKind::AndLuk: return "'&'";
    case TokenKind::Not: return "'~'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::Ident: return "identifier";
    case TokenKind::Var: return "variable";
    case TokenKind::True: return "'true'";
    case TokenKind::False: return "'false'";
    case TokenKind::End: return "end of input";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (source[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++i;
    }
  };

  while (i < source.size()) {
    const char c = source[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < source.size() && source[i] != '\n') advance(1);
      continue;
    }
    const SourcePos pos{line, column};
    auto single = [&](TokenKind kind) {
      tokens.push_back(Token{kind, std::string(1, c), pos});
      advance(1);
    };
    switch (c) {
      case ',': single(TokenKind::Comma); continue;
      case '|': single(TokenKind::Or); continue;
      case '^': single(TokenKind::AndAvg); continue;
      case '&': single(TokenKind::AndLuk); continue;
      case '~': single(TokenKind::Not); continue;
      case '(': single(TokenKind::LParen); continue;
      case ')': single(TokenKind::RParen); continue;
      case ':':
        if (i + 1 < source.size() && source[i + 1] == '-') {
          tokens.push_back(Token{TokenKind::Turnstile, ":-", pos});
          advance(2);
          continue;
        }
        throw LexError(line, column, "expected ':-'");
      default:
        break;
    }
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc) || c == '_') {
      std::size_t end = i;
      while (end < source.size() &&
             (std::isalnum(static_cast<unsigned char>(source[end])) || source[end] == '_')) {
        ++end;
      }
      std::string text(source.substr(i, end - i));
      TokenKind kind;
      if (text == "exists") {
        kind = TokenKind::Exists;
      } else if (text == "forall") {
        kind = TokenKind::Forall;
      } else if (text == "in") {
        kind = TokenKind::In;
      } else if (text == "true") {
        kind = TokenKind::True;
      } else if (text == "false") {
        kind = TokenKind::False;
      } else if (std::isupper(uc)) {
        kind = TokenKind::Ident;
      } else {
        kind = TokenKind::Var;
      }
      tokens.push_back(Token{kind, std::move(text), pos});
      advance(end - i);
      continue;
    }
    throw LexError(line, column, std::string("illegal character '") + c + "'");
  }
  return tokens;
}

bool Arg::operator==(const Arg& other) const {
  if (kind != other.kind) return false;
  return kind == Kind::Var ? var == other.var : id == other.id;
}

RuleExpr RuleExpr::atom(std::string predicate, std::vector<Arg> args) {
  RuleExpr e;
  e.kind = ExprKind::Atom;
  e.name = std::move(predicate);
  e.args = std::move(args);
  return e;
}

RuleExpr RuleExpr::rule_ref(std::string rule, std::vector<Arg> args) {
  RuleExpr e;
  e.kind = ExprKind::RuleRef;
  e.name = std::move(rule);
  e.args = std::move(args);
  return e;
}

RuleExpr RuleExpr::negation(RuleExpr child) {
  RuleExpr e;
  e.kind = ExprKind::Not;
  e.children.push_back(std::move(child));
  return e;
}

RuleExpr RuleExpr::connective(ExprKind kind, std::vector<RuleExpr> children) {
  RuleExpr e;
  e.kind = kind;
  e.children = std::move(children);
  return e;
}

RuleExpr RuleExpr::quant(Quantifier q, std::string var, std::string set, RuleExpr body) {
  RuleExpr e;
  e.kind = ExprKind::Quant;
  e.quantifier = q;
  e.bound_var = std::move(var);
  e.set_name = std::move(set);
  e.children.push_back(std::move(body));
  return e;
}

RuleExpr RuleExpr::truth(double value) {
  RuleExpr e;
  e.kind = ExprKind::Const;
  e.constant = value;
  return e;
}

bool RuleExpr::operator==(const RuleExpr& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case ExprKind::Atom:
    case ExprKind::RuleRef:
      return name == other.name && args == other.args;
    case ExprKind::Quant:
      return quantifier == other.quantifier && bound_var == other.bound_var &&
             set_name == other.set_name && children == other.children;
    case ExprKind::Const:
      return constant == other.constant;
    default:
      return children == other.children;
  }
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view source) : tokens_(tokenize(source)) {
    SourcePos end_pos{1, 1};
    if (!tokens_.empty()) {
      end_pos = tokens_.back().pos;
      end_pos.column += tokens_.back().text.size();
    }
    tokens_.push_back(Token{TokenKind::End, "", end_pos});
  }

  std::vector<Rule> rules() {
    std::vector<Rule> out;
    while (peek().kind != TokenKind::End) out.push_back(rule());
    if (out.empty()) fail({TokenKind::Ident});
    return out;
  }

  RuleExpr expression_only() {
    RuleExpr e = body();
    expect(TokenKind::End);
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  Token take() { return tokens_[pos_++]; }

  [[noreturn]] void fail(std::initializer_list<TokenKind> expected) const {
    const Token& t = peek();
    std::string msg = "expected ";
    bool first = true;
    for (TokenKind k : expected) {
      if (!first) msg += " or ";
      msg += token_kind_name(k);
      first = false;
    }
    msg += ", found ";
    msg += t.kind == TokenKind::End ? std::string(token_kind_name(TokenKind::End)) : "'" + t.text + "'";
    throw ParseError(t.pos.line, t.pos.column, msg);
  }

  Token expect(TokenKind kind) {
    if (peek().kind != kind) fail({kind});
    return take();
  }

  Rule rule() {
    Rule r;
    Token head = expect(TokenKind::Ident);
    r.name = head.text;
    r.pos = head.pos;
    expect(TokenKind::LParen);
    r.params.push_back(expect(TokenKind::Var).text);
    while (peek().kind == TokenKind::Comma) {
      take();
      r.params.push_back(expect(TokenKind::Var).text);
    }
    expect(TokenKind::RParen);
    expect(TokenKind::Turnstile);
    r.body = body();
    return r;
  }

  RuleExpr body() {
    const TokenKind k = peek().kind;
    if (k == TokenKind::Exists || k == TokenKind::Forall) {
      const SourcePos at = take().pos;
      std::string var = expect(TokenKind::Var).text;
      expect(TokenKind::In);
      std::string set = expect(TokenKind::Ident).text;
      expect(TokenKind::Comma);
      RuleExpr e = RuleExpr::quant(k == TokenKind::Exists ? Quantifier::Exists : Quantifier::Forall,
                                   std::move(var), std::move(set), body());
      e.pos = at;
      return e;
    }
    return disjunction();
  }

  RuleExpr disjunction() {
    RuleExpr acc = conjunction();
    bool chain = false;
    while (peek().kind == TokenKind::Or) {
      take();
      RuleExpr rhs = conjunction();
      if (chain) {
        acc.children.push_back(std::move(rhs));
      } else {
        SourcePos at = acc.pos;
        acc = RuleExpr::connective(ExprKind::Or, {std::move(acc), std::move(rhs)});
        acc.pos = at;
        chain = true;
      }
    }
    return acc;
  }

  // A run of the same conjunction operator becomes one n-ary node; switching
  // operators nests the run built so far as the left operand.
  RuleExpr conjunction() {
    RuleExpr acc = unary();
    bool chain = false;
    while (peek().kind == TokenKind::AndAvg || peek().kind == TokenKind::AndLuk) {
      const ExprKind op = take().kind == TokenKind::AndAvg ? ExprKind::AndAvg : ExprKind::AndLuk;
      RuleExpr rhs = unary();
      if (chain && acc.kind == op) {
        acc.children.push_back(std::move(rhs));
      } else {
        SourcePos at = acc.pos;
        acc = RuleExpr::connective(op, {std::move(acc), std::move(rhs)});
        acc.pos = at;
        chain = true;
      }
    }
    return acc;
  }

  RuleExpr unary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Not: {
        const SourcePos at = take().pos;
        RuleExpr e = RuleExpr::negation(unary());
        e.pos = at;
        return e;
      }
      case TokenKind::LParen: {
        take();
        RuleExpr e = body();
        expect(TokenKind::RParen);
        return e;
      }
      case TokenKind::True:
      case TokenKind::False: {
        RuleExpr e = RuleExpr::truth(t.kind == TokenKind::True ? 1.0 : 0.0);
        e.pos = take().pos;
        return e;
      }
      case TokenKind::Ident:
        return atom();
      default:
        fail({TokenKind::Not, TokenKind::LParen, TokenKind::Ident, TokenKind::True, TokenKind::False});
    }
  }

  RuleExpr atom() {
    Token name = expect(TokenKind::Ident);
    expect(TokenKind::LParen);
    std::vector<Arg> args;
    args.push_back(Arg::variable(expect(TokenKind::Var).text));
    while (peek().kind == TokenKind::Comma) {
      take();
      args.push_back(Arg::variable(expect(TokenKind::Var).text));
    }
    expect(TokenKind::RParen);
    RuleExpr e = builtin_predicates().count(name.text) != 0
                     ? RuleExpr::atom(name.text, std::move(args))
                     : RuleExpr::rule_ref(name.text, std::move(args));
    e.pos = name.pos;
    return e;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string at(const SourcePos& p) {
  return std::to_string(p.line) + ":" + std::to_string(p.column);
}

void check_scoping(const Rule& rule, const RuleExpr& e, std::set<std::string>& scope,
                   const std::map<std::string, const Rule*>& by_name) {
  switch (e.kind) {
    case ExprKind::Atom:
    case ExprKind::RuleRef: {
      for (const Arg& a : e.args) {
        if (a.is_var() && scope.count(a.var) == 0) {
          throw LinkError("rule " + rule.name + ": variable '" + a.var + "' at " + at(e.pos) +
                          " is neither a parameter nor bound by a quantifier");
        }
      }
      if (e.kind == ExprKind::Atom) {
        if (e.args.size() != 2) {
          throw LinkError("rule " + rule.name + ": predicate " + e.name + " at " + at(e.pos) +
                          " takes 2 arguments");
        }
      } else {
        auto it = by_name.find(e.name);
        if (it == by_name.end()) {
          throw LinkError("rule " + rule.name + ": reference to undefined rule or predicate '" + e.name +
                          "' at " + at(e.pos));
        }
        if (it->second->params.size() != e.args.size()) {
          throw LinkError("rule " + rule.name + ": " + e.name + " expects " +
                          std::to_string(it->second->params.size()) + " argument(s) at " + at(e.pos));
        }
      }
      return;
    }
    case ExprKind::Quant: {
      if (scope.count(e.bound_var) != 0) {
        throw LinkError("rule " + rule.name + ": quantified variable '" + e.bound_var + "' at " +
                        at(e.pos) + " shadows an outer variable");
      }
      scope.insert(e.bound_var);
      check_scoping(rule, e.children.front(), scope, by_name);
      scope.erase(e.bound_var);
      return;
    }
    default:
      for (const RuleExpr& c : e.children) check_scoping(rule, c, scope, by_name);
  }
}

void collect_refs(const RuleExpr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::RuleRef) out.insert(e.name);
  for (const RuleExpr& c : e.children) collect_refs(c, out);
}

void collect_sets(const RuleExpr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Quant) out.insert(e.set_name);
  for (const RuleExpr& c : e.children) collect_sets(c, out);
}

}  // namespace

const Rule* RuleProgram::find(std::string_view name) const {
  auto it = rules_.find(name);
  return it == rules_.end() ? nullptr : &it->second;
}

const Rule& RuleProgram::rule(std::string_view name) const {
  if (const Rule* r = find(name)) return *r;
  throw BindError(BindError::Kind::UnknownRule, "unknown rule '" + std::string(name) + "'");
}

std::set<std::string> RuleProgram::required_sets(std::string_view name) const {
  std::set<std::string> sets;
  std::set<std::string> seen;
  std::vector<std::string> stack{std::string(name)};
  while (!stack.empty()) {
    std::string current = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(current).second) continue;
    const Rule& r = rule(current);
    collect_sets(r.body, sets);
    std::set<std::string> refs;
    collect_refs(r.body, refs);
    for (const auto& ref : refs) stack.push_back(ref);
  }
  return sets;
}

std::vector<Rule> parse_rules(std::string_view source) { return Parser(source).rules(); }

RuleExpr parse_expression(std::string_view source) { return Parser(source).expression_only(); }

RuleProgram link_program(std::vector<Rule> rules) {
  std::map<std::string, const Rule*> by_name;
  for (const Rule& r : rules) {
    if (builtin_predicates().count(r.name) != 0) {
      throw LinkError("rule at " + at(r.pos) + " redefines built-in predicate " + r.name);
    }
    if (!by_name.emplace(r.name, &r).second) {
      throw LinkError("duplicate rule name '" + r.name + "' at " + at(r.pos));
    }
    std::set<std::string> params(r.params.begin(), r.params.end());
    if (params.size() != r.params.size()) {
      throw LinkError("rule " + r.name + " repeats a parameter name");
    }
  }
  for (const Rule& r : rules) {
    std::set<std::string> scope(r.params.begin(), r.params.end());
    check_scoping(r, r.body, scope, by_name);
  }

  // Depth-first post-order; a grey node reached again closes a cycle.
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> marks;
  for (const Rule& r : rules) marks[r.name] = Mark::White;
  std::vector<std::string> order;
  std::vector<std::string> path;
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    Mark& m = marks[name];
    if (m == Mark::Black) return;
    if (m == Mark::Grey) {
      std::string cycle;
      auto start = std::find(path.begin(), path.end(), name);
      for (auto it = start; it != path.end(); ++it) cycle += *it + " -> ";
      throw LinkError("cyclic rule references: " + cycle + name);
    }
    m = Mark::Grey;
    path.push_back(name);
    std::set<std::string> refs;
    collect_refs(by_name.at(name)->body, refs);
    for (const auto& ref : refs) visit(ref);
    path.pop_back();
    marks[name] = Mark::Black;
    order.push_back(name);
  };
  for (const Rule& r : rules) visit(r.name);

  RuleProgram program;
  for (Rule& r : rules) {
    std::string name = r.name;
    program.rules_.emplace(std::move(name), std::move(r));
  }
  program.order_ = std::move(order);
  return program;
}

RuleProgram parse_program(std::string_view source) { return link_program(parse_rules(source)); }

RuleProgram load_rule_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open rule file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str());
}

RuleExpr substitute(const RuleExpr& expr, const std::string& var, const Arg& arg) {
  RuleExpr out = expr;
  switch (out.kind) {
    case ExprKind::Atom:
    case ExprKind::RuleRef:
      for (Arg& a : out.args) {
        if (a.is_var() && a.var == var) a = arg;
      }
      return out;
    case ExprKind::Quant:
      if (out.bound_var == var) return out;
      out.children.front() = substitute(expr.children.front(), var, arg);
      return out;
    default:
      for (RuleExpr& c : out.children) c = substitute(c, var, arg);
      return out;
  }
}

RuleExpr expand_quantifiers(const RuleExpr& expr, const SetBindings& bindings) {
  if (expr.kind == ExprKind::Quant) {
    auto it = bindings.find(expr.set_name);
    if (it == bindings.end()) {
      throw BindError(BindError::Kind::UnboundSet, "set '" + expr.set_name + "' is not bound");
    }
    if (it->second.empty()) {
      throw BindError(BindError::Kind::EmptyDomain,
                      "EmptyDomain: quantifier over empty set '" + expr.set_name + "'");
    }
    std::vector<RuleExpr> instances;
    instances.reserve(it->second.size());
    for (TokenId id : it->second) {
      instances.push_back(
          expand_quantifiers(substitute(expr.children.front(), expr.bound_var, Arg::constant(id)), bindings));
    }
    if (instances.size() == 1) return std::move(instances.front());
    return RuleExpr::connective(expr.quantifier == Quantifier::Exists ? ExprKind::Or : ExprKind::AndAvg,
                                std::move(instances));
  }
  RuleExpr out = expr;
  for (RuleExpr& c : out.children) c = expand_quantifiers(c, bindings);
  return out;
}

bool contains_quantifier(const RuleExpr& expr) {
  if (expr.kind == ExprKind::Quant) return true;
  return std::any_of(expr.children.begin(), expr.children.end(),
                     [](const RuleExpr& c) { return contains_quantifier(c); });
}

std::string to_string(const Arg& arg) {
  return arg.is_var() ? arg.var : "<" + std::to_string(arg.id) + ">";
}

namespace {

bool needs_parens(const RuleExpr& e) {
  switch (e.kind) {
    case ExprKind::Or:
    case ExprKind::AndAvg:
    case ExprKind::AndLuk:
    case ExprKind::Quant:
      return true;
    default:
      return false;
  }
}

std::string operand(const RuleExpr& e) {
  return needs_parens(e) ? "(" + to_string(e) + ")" : to_string(e);
}

}  // namespace

std::string to_string(const RuleExpr& expr) {
  switch (expr.kind) {
    case ExprKind::Atom:
    case ExprKind::RuleRef: {
      std::string s = expr.name + "(";
      for (std::size_t i = 0; i < expr.args.size(); ++i) {
        if (i != 0) s += ", ";
        s += to_string(expr.args[i]);
      }
      return s + ")";
    }
    case ExprKind::Not:
      return "~" + operand(expr.children.front());
    case ExprKind::Or:
    case ExprKind::AndAvg:
    case ExprKind::AndLuk: {
      const char* op = expr.kind == ExprKind::Or ? " | " : expr.kind == ExprKind::AndAvg ? " ^ " : " & ";
      std::string s;
      for (std::size_t i = 0; i < expr.children.size(); ++i) {
        if (i != 0) s += op;
        s += operand(expr.children[i]);
      }
      return s;
    }
    case ExprKind::Quant:
      return std::string(expr.quantifier == Quantifier::Exists ? "exists " : "forall ") + expr.bound_var +
             " in " + expr.set_name + ", " + to_string(expr.children.front());
    case ExprKind::Const:
      if (expr.constant == 1.0) return "true";
      if (expr.constant == 0.0) return "false";
      return std::to_string(expr.constant);
  }
  return {};
}

std::string to_string(const Rule& rule) {
  std::string s = rule.name + "(";
  for (std::size_t i = 0; i < rule.params.size(); ++i) {
    if (i != 0) s += ", ";
    s += rule.params[i];
  }
  return s + ") :- " + to_string(rule.body);
}

std::string to_string(const RuleProgram& program) {
  std::string s;
  for (const auto& name : program.dependency_order()) s += to_string(program.rule(name)) + "\n";
  return s;
}

}  // namespace logicdec
