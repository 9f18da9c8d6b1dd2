#include "logicdec/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "logicdec/error.hpp"
#include "logicdec/io.hpp"

namespace logicdec {

namespace {

class NgramSession final : public ScorerSession {
 public:
  std::unique_ptr<ScorerSession> clone() const override { return std::make_unique<NgramSession>(*this); }
  std::span<const TokenId> prefix() const override { return fed; }

  std::vector<TokenId> fed;
};

}  // namespace

std::size_t NgramLM::ContextKeyHash::operator()(const std::vector<TokenId>& key) const {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (TokenId t : key) {
    h ^= t;
    h *= 0x100000001b3ULL;
  }
  return h;
}

NgramLM NgramLM::train(std::span<const std::vector<TokenId>> sentences, std::size_t vocab_size, TokenId bos,
                       TokenId eos, const NgramOptions& options) {
  if (options.order < 1 || options.order > 5) {
    throw Error("n-gram order must be in [1, 5], got " + std::to_string(options.order));
  }
  if (!(options.discount > 0.0 && options.discount < 1.0) && options.order > 1) {
    throw Error("discount must be in (0, 1)");
  }
  if (options.unigram_smoothing < 0.0) throw Error("unigram smoothing must be >= 0");
  if (bos >= vocab_size || eos >= vocab_size) throw DimensionError("begin/end token outside the vocabulary");

  NgramLM lm;
  lm.vocab_size_ = vocab_size;
  lm.bos_ = bos;
  lm.eos_ = eos;
  lm.order_ = options.order;
  lm.discount_ = options.discount;
  lm.tables_.resize(static_cast<std::size_t>(options.order - 1));

  std::vector<double> counts(vocab_size, 0.0);
  // Ordered maps keep follower lists sorted, so the model is independent of
  // hash iteration order.
  std::vector<std::map<std::vector<TokenId>, std::map<TokenId, double>>> raw(lm.tables_.size());
  double total = 0.0;
  const auto pad = static_cast<std::size_t>(options.order - 1);
  for (const auto& sentence : sentences) {
    if (sentence.empty()) continue;
    std::vector<TokenId> seq(pad, bos);
    for (TokenId t : sentence) {
      if (t >= vocab_size) throw DimensionError("corpus token outside the vocabulary");
      seq.push_back(t);
    }
    seq.push_back(eos);
    for (std::size_t i = pad; i < seq.size(); ++i) {
      const TokenId w = seq[i];
      counts[w] += 1.0;
      total += 1.0;
      for (std::size_t k = 1; k <= pad; ++k) {
        std::vector<TokenId> ctx(seq.begin() + static_cast<std::ptrdiff_t>(i - k), seq.begin() + static_cast<std::ptrdiff_t>(i));
        raw[k - 1][std::move(ctx)][w] += 1.0;
      }
    }
  }
  if (total == 0.0) throw Error("cannot train an n-gram model on an empty corpus");

  lm.unigram_.resize(vocab_size);
  const double lambda = options.unigram_smoothing;
  const double denom = total + lambda * static_cast<double>(vocab_size);
  for (std::size_t w = 0; w < vocab_size; ++w) lm.unigram_[w] = (counts[w] + lambda) / denom;

  for (std::size_t k = 0; k < raw.size(); ++k) {
    for (auto& [ctx, followers] : raw[k]) {
      ContextStats stats;
      for (const auto& [w, c] : followers) {
        stats.total += c;
        stats.followers.emplace_back(w, c);
      }
      lm.tables_[k].emplace(ctx, std::move(stats));
    }
  }
  return lm;
}

Distribution NgramLM::distribution(std::span<const TokenId> context) const {
  std::vector<double> p = unigram_;
  const std::size_t max_k = std::min(context.size(), tables_.size());
  std::vector<TokenId> key;
  for (std::size_t k = 1; k <= max_k; ++k) {
    key.assign(context.end() - static_cast<std::ptrdiff_t>(k), context.end());
    auto it = tables_[k - 1].find(key);
    if (it == tables_[k - 1].end()) continue;
    const ContextStats& s = it->second;
    const double backoff = discount_ * static_cast<double>(s.followers.size()) / s.total;
    for (double& v : p) v *= backoff;
    for (const auto& [w, c] : s.followers) p[w] += (c - discount_) / s.total;
  }
  return Distribution::normalized(std::move(p), DomainKind::Vocabulary);
}

double NgramLM::perplexity(std::span<const std::vector<TokenId>> sentences) const {
  double nll = 0.0;
  std::size_t n = 0;
  const auto pad = static_cast<std::size_t>(order_ - 1);
  for (const auto& sentence : sentences) {
    std::vector<TokenId> seq(pad, bos_);
    seq.insert(seq.end(), sentence.begin(), sentence.end());
    seq.push_back(eos_);
    for (std::size_t i = pad; i < seq.size(); ++i) {
      const Distribution d = distribution(std::span<const TokenId>(seq.data(), i));
      nll -= std::log(d[seq[i]]);
      ++n;
    }
  }
  return n == 0 ? 1.0 : std::exp(nll / static_cast<double>(n));
}

std::unique_ptr<ScorerSession> NgramLM::begin_session(std::span<const TokenId>) const {
  return std::make_unique<NgramSession>();
}

Distribution NgramLM::step(ScorerSession& session, TokenId token, const AttentionHookBundle*) const {
  auto& s = dynamic_cast<NgramSession&>(session);
  if (token >= vocab_size_) throw DimensionError("token outside the vocabulary");
  s.fed.push_back(token);
  // A leading begin token stands for the full order-1 padding used in training.
  const auto pad = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> ctx;
  const bool starts_with_bos = !s.fed.empty() && s.fed.front() == bos_;
  if (starts_with_bos) ctx.assign(pad, bos_);
  const std::size_t from = starts_with_bos ? 1 : 0;
  const std::size_t avail = s.fed.size() - from;
  const std::size_t take = std::min(avail, pad);
  ctx.insert(ctx.end(), s.fed.end() - static_cast<std::ptrdiff_t>(take), s.fed.end());
  return distribution(ctx);
}

std::vector<TokenId> encode_sentence(std::string_view sentence, const Vocabulary& vocab,
                                     const AlignmentPolicy& policy, std::size_t* oov) {
  std::vector<TokenId> ids;
  std::istringstream in{std::string(sentence)};
  std::string word;
  while (in >> word) {
    auto id = vocab.find(word);
    if (!id && !policy.boundary_marker.empty()) id = vocab.find(policy.boundary_marker + word);
    if (id) {
      ids.push_back(*id);
    } else if (oov != nullptr) {
      ++*oov;
    }
  }
  return ids;
}

std::vector<std::vector<TokenId>> load_corpus(const std::filesystem::path& path, const Vocabulary& vocab,
                                              const AlignmentPolicy& policy, std::size_t* oov) {
  std::vector<std::vector<TokenId>> sentences;
  for (const auto& line : read_lines(path)) {
    auto ids = encode_sentence(line, vocab, policy, oov);
    if (!ids.empty()) sentences.push_back(std::move(ids));
  }
  return sentences;
}

}  // namespace logicdec
