#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logicdec/knowledge_base.hpp"
#include "logicdec/prover.hpp"
#include "logicdec/rule_dsl.hpp"
#include "logicdec/scorer.hpp"

namespace logicdec {

struct DecodingConfig {
  std::size_t beam = 10;
  /// Prefix attention, target attention and prediction intensities.
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  /// A candidate survives when its score is at least best + log(rho).
  double rho = 1.0;
  /// Per-group retention budget; groups are keyed by the covered bitmask.
  std::size_t group_budget = 8;
  /// Generated tokens, end token included.
  std::size_t max_length = 32;
  /// The end token is not proposed before this many tokens were generated.
  std::size_t min_length = 0;
  TokenId bos = 0;
  TokenId eos = 1;
  double length_penalty = 0.7;
  /// Candidates expanded per hypothesis; 0 means `beam`.
  std::size_t candidates_per_hypothesis = 0;
  /// Record top-5 tokens before and after shifting at every step.
  bool trace = false;

  /// Throws Error when a field is out of range.
  void validate() const;
  std::size_t expansion_width() const { return candidates_per_hypothesis == 0 ? beam : candidates_per_hypothesis; }
};

/// "commongen" or "personachat"; anything else throws Error. Token ids and
/// lengths keep their defaults.
DecodingConfig preset(std::string_view name);

struct Hypothesis {
  /// Generated tokens; a finished hypothesis ends with the end token.
  std::vector<TokenId> tokens;
  /// Cumulative log-probability under the shifted distributions.
  double score = 0.0;
  /// Bit i is set once target i has a stem-mate in `tokens`.
  std::uint64_t covered = 0;
  bool finished = false;

  std::uint64_t group_key() const { return covered; }
};

/// Score used for the final ranking: score / len^length_penalty.
double ranking_score(const Hypothesis& h, double length_penalty);

/// Sets the bit of every target sharing a stem class with `token`.
std::uint64_t update_constraint_state(std::uint64_t covered, TokenId token, std::span<const TokenId> targets,
                                      const StemIndex& stems);
Hypothesis update_constraint_state(Hypothesis hyp, TokenId token, std::span<const TokenId> targets,
                                   const StemIndex& stems);

/// Fraction of targets covered; 1 when there are none.
double coverage_of(const Hypothesis& hyp, std::span<const TokenId> targets);
double coverage_of(std::span<const TokenId> tokens, std::span<const TokenId> targets, const StemIndex& stems);

/// One expansion of a live hypothesis, as seen by beam selection.
struct Candidate {
  double score = 0.0;
  std::uint64_t covered = 0;
  /// Parent tokens followed by `token`; used only to break score ties.
  std::span<const TokenId> parent_tokens;
  TokenId token = kNoToken;
  std::size_t parent = 0;
};

/// Strict total order: higher score first, then lexicographically smaller
/// token sequence.
bool candidate_before(const Candidate& a, const Candidate& b);

/// Drops candidates below best + log(rho); keeps input order.
std::vector<Candidate> prune_candidates(std::vector<Candidate> candidates, double rho);

/// Grouped selection over pruned candidates. Candidates are grouped by exact
/// covered bitmask and each group keeps its top `group_budget`. The kept
/// candidates enter the beam as every group's best (groups ordered by covered
/// count, then score), then the other kept members by score, up to `beam`.
/// Remaining slots are filled from all candidates by score. Returns indices
/// into `candidates` in beam order.
std::vector<std::size_t> select_beam(std::span<const Candidate> candidates, std::size_t beam,
                                     std::size_t group_budget);

struct TraceStep {
  std::size_t step = 0;
  std::size_t hypothesis = 0;
  std::vector<std::pair<TokenId, double>> before;
  std::vector<std::pair<TokenId, double>> after;
};

struct DecodeResult {
  /// Best first.
  std::vector<Hypothesis> hypotheses;
  /// False when nothing finished and the best unfinished hypothesis is
  /// returned instead.
  bool finished = true;
  std::size_t steps = 0;
  std::vector<TraceStep> trace;

  const Hypothesis& best() const { return hypotheses.front(); }
};

/// Rule-guided beam search. At every step each live hypothesis gets P_t from
/// the scorer (with attention hooks for alpha1 / alpha2 when supported),
/// I over the vocabulary from `rule` under its own prefix and coverage, and
/// expands the top candidates of decide(P_t, I, alpha3). Targets are read
/// from the "C" binding of `ctx`; the "Prefix" binding is supplied per
/// hypothesis and always starts with the begin token. An empty `rule`
/// disables the logic entirely.
DecodeResult decode(const Scorer& scorer, const RuleProgram& program, std::string_view rule, const EvalContext& ctx,
                    const DecodingConfig& config);

/// Plain beam search with the same expansion, pruning and tie rules, and no
/// grouping or logic.
DecodeResult baseline_beam_search(const Scorer& scorer, const DecodingConfig& config);

}  // namespace logicdec
