#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logicdec/types.hpp"

namespace logicdec {

/// Dense token id <-> surface string bijection.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view surface) const;
  TokenId id(std::string_view surface) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// One token per line; the line number is the id. Blank lines and duplicates
/// are format errors.
Vocabulary load_vocabulary(const std::filesystem::path& path);

/// How words are mapped onto vocabulary tokens.
struct AlignmentPolicy {
  /// Prepended to a word before tokenization, e.g. "Ġ" for GPT-2 style
  /// byte-level vocabularies. Empty for word-level vocabularies.
  std::string boundary_marker;
  /// Fall back to the bare word when the marked form cannot be tokenized.
  bool allow_unmarked = true;

  bool operator==(const AlignmentPolicy&) const = default;
};

/// Greedy longest-match segmentation of `word` against the vocabulary,
/// starting with the boundary-marked form. Returns the piece ids, or nothing
/// when the word cannot be fully segmented.
std::optional<std::vector<TokenId>> segment_word(std::string_view word, const Vocabulary& vocab,
                                                 const AlignmentPolicy& policy);

/// Id of the first piece of `word`, which stands in for the whole word.
std::optional<TokenId> align_word_to_token(std::string_view word, const Vocabulary& vocab,
                                           const AlignmentPolicy& policy = {});

/// Surface form of a token with the boundary marker removed.
std::string strip_marker(std::string_view token, const AlignmentPolicy& policy);

}  // namespace logicdec
