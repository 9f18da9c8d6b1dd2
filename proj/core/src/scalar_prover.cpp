// Word-at-a-time evaluator used as the reference for the vectorised prover.
// It walks the unexpanded syntax tree, iterates quantifier domains directly
// and grounds facts by scanning adjacency columns, so it shares no evaluation
// code with prover.cpp.

#include <map>
#include <string>

#include "logicdec/error.hpp"
#include "logicdec/prover.hpp"

namespace logicdec {

namespace {

class ScalarProver {
 public:
  ScalarProver(const RuleProgram& program, const EvalContext& ctx) : program_(program), ctx_(ctx) {}

  double rule(const Rule& r, const std::vector<TokenId>& args) {
    std::map<std::string, TokenId> env;
    for (std::size_t i = 0; i < r.params.size(); ++i) env[r.params[i]] = args[i];
    return eval(r.body, env);
  }

 private:
  TokenId lookup(const Arg& a, const std::map<std::string, TokenId>& env) const {
    TokenId id = a.id;
    if (a.is_var()) {
      auto it = env.find(a.var);
      if (it == env.end()) throw BindError(BindError::Kind::UnboundSet, "unbound variable '" + a.var + "'");
      id = it->second;
    }
    if (id >= ctx_.facts->vocab_size()) throw DimensionError("token id outside the fact-base vocabulary");
    return id;
  }

  double edge(TokenId a, TokenId b) const {
    const auto rows = ctx_.facts->edges.column_rows(b);
    const auto weights = ctx_.facts->edges.column_weights(b);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k] == a) return weights[k];
    }
    return 0.0;
  }

  double eval(const RuleExpr& e, std::map<std::string, TokenId>& env) {
    switch (e.kind) {
      case ExprKind::Const:
        return e.constant;
      case ExprKind::Atom: {
        const TokenId a = lookup(e.args[0], env);
        const TokenId b = lookup(e.args[1], env);
        if (e.name == "Equal") return ctx_.facts->stems.class_of(a) == ctx_.facts->stems.class_of(b) ? 1.0 : 0.0;
        return edge(a, b);
      }
      case ExprKind::RuleRef: {
        std::vector<TokenId> args;
        for (const Arg& a : e.args) args.push_back(lookup(a, env));
        return rule(program_.rule(e.name), args);
      }
      case ExprKind::Not: {
        const double v = 1.0 - eval(e.children[0], env);
        return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      }
      case ExprKind::Or: {
        double acc = eval(e.children[0], env);
        for (std::size_t i = 1; i < e.children.size(); ++i) {
          acc = acc + eval(e.children[i], env);
          if (acc > 1.0) acc = 1.0;
        }
        return acc;
      }
      case ExprKind::AndAvg: {
        double sum = 0.0;
        for (const RuleExpr& c : e.children) sum += eval(c, env);
        return sum / static_cast<double>(e.children.size());
      }
      case ExprKind::AndLuk: {
        double acc = eval(e.children[0], env);
        for (std::size_t i = 1; i < e.children.size(); ++i) {
          acc = acc + eval(e.children[i], env) - 1.0;
          if (acc < 0.0) acc = 0.0;
        }
        return acc;
      }
      case ExprKind::Quant: {
        auto it = ctx_.sets.find(e.set_name);
        if (it == ctx_.sets.end()) {
          throw BindError(BindError::Kind::UnboundSet, "set '" + e.set_name + "' is not bound");
        }
        const auto& members = it->second;
        if (members.empty()) {
          throw BindError(BindError::Kind::EmptyDomain, "EmptyDomain: quantifier over empty set '" + e.set_name + "'");
        }
        const bool exists = e.quantifier == Quantifier::Exists;
        double acc = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i) {
          env[e.bound_var] = members[i];
          const double v = eval(e.children[0], env);
          if (exists) {
            acc = i == 0 ? v : acc + v;
            if (acc > 1.0) acc = 1.0;
          } else {
            acc += v;
          }
        }
        env.erase(e.bound_var);
        return exists ? acc : acc / static_cast<double>(members.size());
      }
    }
    return 0.0;
  }

  const RuleProgram& program_;
  const EvalContext& ctx_;
};

}  // namespace

double prove_scalar(const RuleProgram& program, std::string_view rule, TokenId word, const EvalContext& ctx) {
  if (ctx.facts == nullptr) throw Error("evaluation context has no fact base");
  const Rule& r = program.rule(rule);
  if (r.params.size() != 1) {
    throw BindError(BindError::Kind::BadArity, "rule " + r.name + " must take exactly one parameter");
  }
  if (word >= ctx.facts->vocab_size()) throw DimensionError("token id outside the fact-base vocabulary");
  ScalarProver prover(program, ctx);
  return prover.rule(r, {word});
}

}  // namespace logicdec
