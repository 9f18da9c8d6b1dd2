#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "logicdec/decision.hpp"
#include "logicdec/truth.hpp"
#include "logicdec/types.hpp"

namespace logicdec {

/// Per-step attention callbacks. Each receives one segment of a jointly
/// normalised attention row (target words or prefix positions) and returns
/// nonnegative replacement weights of the same length; the scorer
/// renormalises the concatenated row afterwards.
struct AttentionHookBundle {
  using Shift = std::function<std::vector<double>(int layer, int head, std::span<const double> segment)>;
  using Observer = std::function<void(int layer, int head, std::span<const double> target_row,
                                      std::span<const double> prefix_row)>;

  Shift target_shift;
  Shift prefix_shift;
  /// Sees every final (shifted, renormalised) attention row.
  Observer observer;
};

/// Hooks applying the decision function to both segments: the target
/// segment with `target_truth` and `alpha_target`, the prefix segment with
/// `prefix_truth` and `alpha_prefix`.
AttentionHookBundle logic_attention_hooks(TruthVector prefix_truth, double alpha_prefix, TruthVector target_truth,
                                          double alpha_target);

/// Mutable per-hypothesis state of a scorer (history, caches).
class ScorerSession {
 public:
  virtual ~ScorerSession() = default;
  virtual std::unique_ptr<ScorerSession> clone() const = 0;
  /// Tokens fed so far.
  virtual std::span<const TokenId> prefix() const = 0;
};

/// Next-token model over a fixed vocabulary.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual bool supports_attention_hooks() const { return false; }

  /// Starts a session that may attend to `targets` (ignored by scorers
  /// without attention).
  virtual std::unique_ptr<ScorerSession> begin_session(std::span<const TokenId> targets) const = 0;

  /// Appends `token` to the session and returns the distribution of the
  /// token that follows it. `hooks` is ignored unless attention hooks are
  /// supported.
  virtual Distribution step(ScorerSession& session, TokenId token, const AttentionHookBundle* hooks) const = 0;
};

}  // namespace logicdec
