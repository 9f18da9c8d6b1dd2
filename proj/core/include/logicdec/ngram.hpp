#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "logicdec/scorer.hpp"
#include "logicdec/vocabulary.hpp"

namespace logicdec {

struct NgramOptions {
  int order = 3;
  /// Absolute discount applied at every order above the unigram.
  double discount = 0.75;
  /// Add-lambda mass for the unigram; 0 keeps empirical frequencies.
  double unigram_smoothing = 0.0;
};

/// Interpolated absolute-discount n-gram model:
///
///   P(w | h) = max(c(h w) - D, 0) / c(h) + D * N1+(h .) / c(h) * P(w | h')
///
/// where h' drops the oldest context token. Contexts never seen in training
/// fall straight through to h'. Sentences are padded with order-1 begin
/// tokens and closed with the end token.
class NgramLM final : public Scorer {
 public:
  static NgramLM train(std::span<const std::vector<TokenId>> sentences, std::size_t vocab_size, TokenId bos,
                       TokenId eos, const NgramOptions& options = {});

  int order() const { return order_; }
  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }

  /// Distribution after `context`; only the last order-1 tokens matter.
  Distribution distribution(std::span<const TokenId> context) const;
  std::vector<double> unigram() const { return unigram_; }

  /// exp of the mean negative log-likelihood over all predicted tokens.
  double perplexity(std::span<const std::vector<TokenId>> sentences) const;

  std::size_t vocab_size() const override { return vocab_size_; }
  std::unique_ptr<ScorerSession> begin_session(std::span<const TokenId> targets) const override;
  Distribution step(ScorerSession& session, TokenId token, const AttentionHookBundle* hooks) const override;

 private:
  struct ContextKeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const;
  };
  struct ContextStats {
    double total = 0.0;
    std::vector<std::pair<TokenId, double>> followers;
  };
  using Table = std::unordered_map<std::vector<TokenId>, ContextStats, ContextKeyHash>;

  std::size_t vocab_size_ = 0;
  TokenId bos_ = 0;
  TokenId eos_ = 0;
  int order_ = 1;
  double discount_ = 0.0;
  std::vector<double> unigram_;
  // tables_[k - 1] holds contexts of length k.
  std::vector<Table> tables_;
};

/// One whitespace-tokenised sentence per line. Words are looked up as-is,
/// then with the policy's boundary marker; unknown words are skipped and
/// counted in `oov` when given.
std::vector<std::vector<TokenId>> load_corpus(const std::filesystem::path& path, const Vocabulary& vocab,
                                              const AlignmentPolicy& policy = {}, std::size_t* oov = nullptr);

std::vector<TokenId> encode_sentence(std::string_view sentence, const Vocabulary& vocab,
                                     const AlignmentPolicy& policy = {}, std::size_t* oov = nullptr);

}  // namespace logicdec
