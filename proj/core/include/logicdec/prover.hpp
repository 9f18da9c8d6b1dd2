#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logicdec/knowledge_base.hpp"
#include "logicdec/rule_dsl.hpp"
#include "logicdec/truth.hpp"

namespace logicdec {

/// Conventional set names used by the shipped rule templates.
namespace sets {
inline constexpr std::string_view kTargets = "C";
inline constexpr std::string_view kPersona = "P";
inline constexpr std::string_view kUser = "U";
inline constexpr std::string_view kPrefix = "Prefix";
}  // namespace sets

/// The elements a rule is evaluated over.
struct Domain {
  DomainKind kind = DomainKind::Vocabulary;
  /// Token at each position. Unused for the vocabulary domain, where position
  /// i is token i.
  std::vector<TokenId> tokens;

  static Domain vocabulary() { return Domain{DomainKind::Vocabulary, {}}; }
  static Domain prefix(std::vector<TokenId> ids) { return Domain{DomainKind::PrefixPositions, std::move(ids)}; }
  static Domain targets(std::vector<TokenId> ids) { return Domain{DomainKind::TargetWords, std::move(ids)}; }
  static Domain custom(std::vector<TokenId> ids) { return Domain{DomainKind::Custom, std::move(ids)}; }

  std::size_t size(const FactBase& facts) const {
    return kind == DomainKind::Vocabulary ? facts.vocab_size() : tokens.size();
  }
};

/// Named set bindings and the facts used to ground predicates.
struct EvalContext {
  const FactBase* facts = nullptr;
  SetBindings sets;

  EvalContext() = default;
  explicit EvalContext(const FactBase& f, SetBindings s = {}) : facts(&f), sets(std::move(s)) {}
};

/// Evaluates `rule` (one parameter) over every element of `domain` at once.
/// Quantifiers are expanded against ctx.sets, leaves are grounded with
/// equal_vector / edge_vector and inner nodes combined with the soft
/// connectives. Rule references are memoised per argument binding.
TruthVector prove(const RuleProgram& program, std::string_view rule, const Domain& domain,
                  const EvalContext& ctx);

/// Word-by-word reference evaluator with the same semantics as prove, written
/// without sharing any evaluation code with it.
double prove_scalar(const RuleProgram& program, std::string_view rule, TokenId word, const EvalContext& ctx);

/// True when `rule` can observe the `prefix_set` binding only through
/// `exists y in Prefix, Equal(c, y)` tests whose c is drawn from
/// `target_set`. Such rules give identical results for any two prefixes that
/// cover the same target words, so callers may cache on the coverage state.
bool prefix_enters_only_through_coverage(const RuleProgram& program, std::string_view rule,
                                         std::string_view prefix_set = sets::kPrefix,
                                         std::string_view target_set = sets::kTargets);

}  // namespace logicdec
