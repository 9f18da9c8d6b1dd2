#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "logicdec/scorer.hpp"

namespace logicdec {

struct TransformerConfig {
  std::size_t vocab_size = 0;
  int layers = 2;
  int heads = 2;
  int d_model = 32;
  int d_ff = 128;
  int max_positions = 1024;

  int head_dim() const { return d_model / heads; }
  bool operator==(const TransformerConfig&) const = default;
};

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  bool operator==(const Matrix&) const = default;
};

/// Keys and values of the target words at every layer; key[l] and value[l]
/// hold one row (all heads concatenated) per target.
struct TargetKV {
  std::vector<Matrix> key;
  std::vector<Matrix> value;

  std::size_t count() const { return key.empty() ? 0 : key.front().rows; }
};

/// Small pre-layer-norm GPT-style decoder. Every attention layer attends
/// jointly over the positional-invariant target keys and the causal prefix;
/// hooks may reweight both segments before the value mixture.
class TinyTransformer final : public Scorer {
 public:
  struct Layer {
    std::vector<double> ln1_gain, ln1_bias;
    Matrix wq, wk, wv, wo;  // d_model x d_model
    std::vector<double> ln2_gain, ln2_bias;
    Matrix w1;  // d_model x d_ff
    std::vector<double> b1;
    Matrix w2;  // d_ff x d_model
    std::vector<double> b2;

    bool operator==(const Layer&) const = default;
  };

  /// Deterministic uniform initialisation from a 64-bit seed.
  static TinyTransformer random(const TransformerConfig& config, std::uint64_t seed);

  /// Weight file: "LDTW", u32 version=1, u32 vocab, layers, heads, d_model,
  /// d_ff, max_positions, then float32 little-endian tensors in this order:
  /// embedding [V x d]; per layer ln1 gain, ln1 bias [d], wq, wk, wv, wo
  /// [d x d], ln2 gain, ln2 bias [d], w1 [d x ff], b1 [ff], w2 [ff x d],
  /// b2 [d]; final gain, final bias [d]; output [V x d].
  static TinyTransformer load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  const TransformerConfig& config() const { return config_; }

  /// Feeds each target alone, without positional encoding, and stacks the
  /// resulting per-layer keys and values.
  TargetKV precompute_target_kv(std::span<const TokenId> targets) const;

  std::size_t vocab_size() const override { return config_.vocab_size; }
  bool supports_attention_hooks() const override { return true; }
  std::unique_ptr<ScorerSession> begin_session(std::span<const TokenId> targets) const override;
  Distribution step(ScorerSession& session, TokenId token, const AttentionHookBundle* hooks) const override;

  /// Same as step but returns the pre-softmax logits.
  std::vector<double> step_logits(ScorerSession& session, TokenId token, const AttentionHookBundle* hooks) const;

 private:
  TinyTransformer() = default;

  void layer_norm(std::span<const double> x, const std::vector<double>& gain, const std::vector<double>& bias,
                  std::span<double> out) const;

  TransformerConfig config_;
  Matrix embedding_;
  std::vector<Layer> layers_;
  std::vector<double> final_gain_, final_bias_;
  Matrix output_;
};

}  // namespace logicdec
