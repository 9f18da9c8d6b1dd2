#include "logicdec/vocabulary.hpp"

#include <fstream>

#include "logicdec/error.hpp"

namespace logicdec {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw FormatError("vocabulary entry " + std::to_string(i) + " is empty");
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError("duplicate vocabulary entry '" + tokens_[i] + "' at id " + std::to_string(i));
    }
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view surface) const {
  if (auto found = find(surface)) return *found;
  throw Error("token '" + std::string(surface) + "' is not in the vocabulary");
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

namespace {

std::optional<std::vector<TokenId>> greedy_segment(std::string_view text, const Vocabulary& vocab) {
  std::vector<TokenId> pieces;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::optional<TokenId> best;
    std::size_t best_len = 0;
    for (std::size_t len = text.size() - pos; len > 0; --len) {
      if (auto id = vocab.find(text.substr(pos, len))) {
        best = id;
        best_len = len;
        break;
      }
    }
    if (!best) return std::nullopt;
    pieces.push_back(*best);
    pos += best_len;
  }
  if (pieces.empty()) return std::nullopt;
  return pieces;
}

}  // namespace

std::optional<std::vector<TokenId>> segment_word(std::string_view word, const Vocabulary& vocab,
                                                 const AlignmentPolicy& policy) {
  if (word.empty()) return std::nullopt;
  if (!policy.boundary_marker.empty()) {
    std::string marked = policy.boundary_marker + std::string(word);
    if (auto pieces = greedy_segment(marked, vocab)) return pieces;
    if (!policy.allow_unmarked) return std::nullopt;
  }
  return greedy_segment(word, vocab);
}

std::optional<TokenId> align_word_to_token(std::string_view word, const Vocabulary& vocab,
                                           const AlignmentPolicy& policy) {
  auto pieces = segment_word(word, vocab, policy);
  if (!pieces) return std::nullopt;
  return pieces->front();
}

std::string strip_marker(std::string_view token, const AlignmentPolicy& policy) {
  const std::string& m = policy.boundary_marker;
  if (!m.empty() && token.size() > m.size() && token.substr(0, m.size()) == m) {
    return std::string(token.substr(m.size()));
  }
  return std::string(token);
}

}  // namespace logicdec
