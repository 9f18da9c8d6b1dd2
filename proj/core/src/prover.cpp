#include "logicdec/prover.hpp"

#include <map>
#include <numeric>
#include <optional>
#include <set>

#include "logicdec/connectives.hpp"
#include "logicdec/error.hpp"

namespace logicdec {

namespace {

// A rule parameter is either the domain variable or a fixed token.
struct Binding {
  bool domain = false;
  TokenId id = 0;

  auto operator<=>(const Binding&) const = default;
};

// Intermediate node value. Subtrees that never touch the domain variable
// evaluate to a single value shared by every position.
struct Lane {
  bool uniform = true;
  TruthVector values;
};

class VectorProver {
 public:
  VectorProver(const RuleProgram& program, const Domain& domain, const EvalContext& ctx)
      : program_(program), domain_(domain), ctx_(ctx), facts_(*ctx.facts) {
    size_ = domain.size(facts_);
    if (domain.kind == DomainKind::Vocabulary) {
      ids_.resize(size_);
      std::iota(ids_.begin(), ids_.end(), TokenId{0});
    } else {
      ids_ = domain.tokens;
      for (TokenId id : ids_) check_token(id);
    }
    for (const auto& [name, members] : ctx.sets) {
      for (TokenId id : members) check_token(id);
    }
  }

  TruthVector run(std::string_view rule_name) {
    const Rule& rule = program_.rule(rule_name);
    if (rule.params.size() != 1) {
      throw BindError(BindError::Kind::BadArity,
                      "rule " + rule.name + " has " + std::to_string(rule.params.size()) +
                          " parameters; only one-parameter rules can be proved over a domain");
    }
    Lane lane = call(rule, {Binding{true, 0}});
    TruthVector out = lane.uniform ? TruthVector::constant(size_, lane.values[0]) : std::move(lane.values);
    out.set_domain(domain_.kind);
    return out;
  }

 private:
  using Env = std::map<std::string, Binding, std::less<>>;

  void check_token(TokenId id) const {
    if (id >= facts_.vocab_size()) {
      throw DimensionError("token id " + std::to_string(id) + " outside the fact-base vocabulary of size " +
                           std::to_string(facts_.vocab_size()));
    }
  }

  const RuleExpr& expanded_body(const Rule& rule) {
    auto it = expanded_.find(rule.name);
    if (it == expanded_.end()) {
      it = expanded_.emplace(rule.name, expand_quantifiers(rule.body, ctx_.sets)).first;
    }
    return it->second;
  }

  Lane call(const Rule& rule, const std::vector<Binding>& args) {
    auto key = std::make_pair(rule.name, args);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Env env;
    for (std::size_t i = 0; i < rule.params.size(); ++i) env[rule.params[i]] = args[i];
    Lane result = eval(expanded_body(rule), env);
    memo_.emplace(std::move(key), result);
    return result;
  }

  Binding resolve(const Arg& arg, const Env& env) const {
    if (!arg.is_var()) {
      check_token(arg.id);
      return Binding{false, arg.id};
    }
    auto it = env.find(arg.var);
    if (it == env.end()) throw BindError(BindError::Kind::UnboundSet, "unbound variable '" + arg.var + "'");
    return it->second;
  }

  static Lane scalar(double v) { return Lane{true, TruthVector({v})}; }

  Lane atom(const RuleExpr& e, const Env& env) {
    const Binding a = resolve(e.args[0], env);
    const Binding b = resolve(e.args[1], env);
    const bool equal = e.name == "Equal";
    if (a.domain && b.domain) return scalar(equal ? 1.0 : 0.0);
    if (!a.domain && !b.domain) {
      if (equal) return scalar(facts_.stems.same_class(a.id, b.id) ? 1.0 : 0.0);
      return scalar(a.id == b.id ? 0.0 : facts_.edges.weight(a.id, b.id));
    }
    const TokenId fixed = a.domain ? b.id : a.id;
    if (equal) return Lane{false, equal_vector(ids_, fixed, facts_)};
    if (domain_.kind == DomainKind::Vocabulary) {
      // Bag of all words filtered through column `fixed` of the adjacency.
      return Lane{false, edge_vector(TruthVector::constant(size_, 1.0), fixed, facts_)};
    }
    std::vector<double> out(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = ids_[i] == fixed ? 0.0 : facts_.edges.weight(ids_[i], fixed);
    return Lane{false, TruthVector(std::move(out))};
  }

  Lane combine(ExprKind kind, std::vector<Lane> lanes) {
    bool all_uniform = true;
    for (const Lane& l : lanes) all_uniform = all_uniform && l.uniform;
    std::vector<TruthVector> operands;
    operands.reserve(lanes.size());
    for (Lane& l : lanes) {
      if (!all_uniform && l.uniform) {
        operands.push_back(TruthVector::constant(size_, l.values[0]));
      } else {
        operands.push_back(std::move(l.values));
      }
    }
    TruthVector out;
    switch (kind) {
      case ExprKind::Or: out = or_vec(operands); break;
      case ExprKind::AndAvg: out = and_avg_vec(operands); break;
      case ExprKind::AndLuk: out = and_luk_vec(operands); break;
      case ExprKind::Not: out = not_vec(operands.front()); break;
      default: throw Error("not a connective");
    }
    return Lane{all_uniform, std::move(out)};
  }

  Lane eval(const RuleExpr& e, const Env& env) {
    switch (e.kind) {
      case ExprKind::Atom:
        return atom(e, env);
      case ExprKind::Const:
        return scalar(e.constant);
      case ExprKind::RuleRef: {
        std::vector<Binding> args;
        args.reserve(e.args.size());
        for (const Arg& a : e.args) args.push_back(resolve(a, env));
        return call(program_.rule(e.name), args);
      }
      case ExprKind::Quant:
        throw Error("quantifier survived expansion");
      default: {
        std::vector<Lane> lanes;
        lanes.reserve(e.children.size());
        for (const RuleExpr& c : e.children) lanes.push_back(eval(c, env));
        return combine(e.kind, std::move(lanes));
      }
    }
  }

  const RuleProgram& program_;
  const Domain& domain_;
  const EvalContext& ctx_;
  const FactBase& facts_;
  std::size_t size_ = 0;
  std::vector<TokenId> ids_;
  std::map<std::string, RuleExpr, std::less<>> expanded_;
  std::map<std::pair<std::string, std::vector<Binding>>, Lane> memo_;
};

}  // namespace

TruthVector prove(const RuleProgram& program, std::string_view rule, const Domain& domain,
                  const EvalContext& ctx) {
  if (ctx.facts == nullptr) throw Error("evaluation context has no fact base");
  return VectorProver(program, domain, ctx).run(rule);
}

namespace {

// Abstract kinds for the coverage analysis.
enum class VarKind { Domain, Target, PrefixElement, Other };

struct CoverageAnalysis {
  const RuleProgram& program;
  std::string_view prefix_set;
  std::string_view target_set;
  std::set<std::pair<std::string, std::vector<VarKind>>> visited;

  bool rule(const Rule& r, const std::vector<VarKind>& kinds) {
    if (!visited.insert({r.name, kinds}).second) return true;
    std::map<std::string, VarKind, std::less<>> env;
    for (std::size_t i = 0; i < r.params.size(); ++i) env[r.params[i]] = kinds[i];
    return expr(r.body, env);
  }

  VarKind kind_of(const Arg& a, const std::map<std::string, VarKind, std::less<>>& env) const {
    if (!a.is_var()) return VarKind::Other;
    auto it = env.find(a.var);
    return it == env.end() ? VarKind::Other : it->second;
  }

  bool coverage_test(const RuleExpr& q, const std::map<std::string, VarKind, std::less<>>& env) const {
    if (q.quantifier != Quantifier::Exists) return false;
    const RuleExpr& body = q.children.front();
    if (body.kind != ExprKind::Atom || body.name != "Equal") return false;
    const Arg& a = body.args[0];
    const Arg& b = body.args[1];
    auto is_bound = [&](const Arg& x) { return x.is_var() && x.var == q.bound_var; };
    if (is_bound(a) == is_bound(b)) return false;
    return kind_of(is_bound(a) ? b : a, env) == VarKind::Target;
  }

  bool expr(const RuleExpr& e, std::map<std::string, VarKind, std::less<>>& env) {
    switch (e.kind) {
      case ExprKind::Quant: {
        if (e.set_name == prefix_set) return coverage_test(e, env);
        const VarKind k = e.set_name == target_set ? VarKind::Target : VarKind::Other;
        auto saved = env;
        env[e.bound_var] = k;
        const bool ok = expr(e.children.front(), env);
        env = std::move(saved);
        return ok;
      }
      case ExprKind::RuleRef: {
        std::vector<VarKind> kinds;
        for (const Arg& a : e.args) kinds.push_back(kind_of(a, env));
        return rule(program.rule(e.name), kinds);
      }
      default:
        for (const RuleExpr& c : e.children) {
          if (!expr(c, env)) return false;
        }
        return true;
    }
  }
};

}  // namespace

bool prefix_enters_only_through_coverage(const RuleProgram& program, std::string_view rule,
                                         std::string_view prefix_set, std::string_view target_set) {
  CoverageAnalysis analysis{program, prefix_set, target_set, {}};
  const Rule& r = program.rule(rule);
  std::vector<VarKind> kinds(r.params.size(), VarKind::Domain);
  return analysis.rule(r, kinds);
}

}  // namespace logicdec
