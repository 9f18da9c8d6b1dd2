#include "logicdec/decoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <unordered_map>

#include "logicdec/decision.hpp"
#include "logicdec/error.hpp"

namespace logicdec {

void DecodingConfig::validate() const {
  auto bad_alpha = [](double a) { return !std::isfinite(a) || a < 0.0; };
  if (beam < 1) throw Error("beam size must be at least 1");
  if (bad_alpha(alpha1) || bad_alpha(alpha2) || bad_alpha(alpha3)) throw Error("alphas must be finite and >= 0");
  if (!(rho > 0.0 && rho <= 1.0)) throw Error("rho must be in (0, 1]");
  if (group_budget < 1) throw Error("group budget k must be at least 1");
  if (max_length < 1) throw Error("max length must be at least 1");
  if (min_length > max_length) throw Error("min length exceeds max length");
  if (!std::isfinite(length_penalty) || length_penalty < 0.0) throw Error("length penalty must be finite and >= 0");
  if (bos == eos) throw Error("begin and end tokens must differ");
}

DecodingConfig preset(std::string_view name) {
  DecodingConfig c;
  if (name == "commongen") {
    c.alpha1 = 12.0;
    c.alpha2 = 24.0;
    c.alpha3 = 24.0;
    c.rho = 0.6;
    c.group_budget = 16;
    c.beam = 20;
  } else if (name == "personachat") {
    c.alpha1 = 12.0;
    c.alpha2 = 24.0;
    c.alpha3 = 48.0;
    c.rho = 0.4;
    c.group_budget = 8;
    c.beam = 10;
  } else {
    throw Error("unknown preset '" + std::string(name) + "' (expected commongen or personachat)");
  }
  return c;
}

double ranking_score(const Hypothesis& h, double length_penalty) {
  const double len = static_cast<double>(std::max<std::size_t>(h.tokens.size(), 1));
  return h.score / std::pow(len, length_penalty);
}

std::uint64_t update_constraint_state(std::uint64_t covered, TokenId token, std::span<const TokenId> targets,
                                      const StemIndex& stems) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (stems.same_class(token, targets[i])) covered |= std::uint64_t{1} << i;
  }
  return covered;
}

Hypothesis update_constraint_state(Hypothesis hyp, TokenId token, std::span<const TokenId> targets,
                                   const StemIndex& stems) {
  hyp.covered = update_constraint_state(hyp.covered, token, targets, stems);
  return hyp;
}

double coverage_of(const Hypothesis& hyp, std::span<const TokenId> targets) {
  if (targets.empty()) return 1.0;
  return static_cast<double>(std::popcount(hyp.covered)) / static_cast<double>(targets.size());
}

double coverage_of(std::span<const TokenId> tokens, std::span<const TokenId> targets, const StemIndex& stems) {
  if (targets.empty()) return 1.0;
  std::size_t hit = 0;
  for (TokenId c : targets) {
    if (std::any_of(tokens.begin(), tokens.end(), [&](TokenId t) { return stems.same_class(t, c); })) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(targets.size());
}

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  const std::size_t na = a.parent_tokens.size() + 1;
  const std::size_t nb = b.parent_tokens.size() + 1;
  for (std::size_t i = 0; i < std::min(na, nb); ++i) {
    const TokenId x = i < a.parent_tokens.size() ? a.parent_tokens[i] : a.token;
    const TokenId y = i < b.parent_tokens.size() ? b.parent_tokens[i] : b.token;
    if (x != y) return x < y;
  }
  return na < nb;
}

std::vector<Candidate> prune_candidates(std::vector<Candidate> candidates, double rho) {
  if (candidates.empty()) return candidates;
  double best = candidates.front().score;
  for (const Candidate& c : candidates) best = std::max(best, c.score);
  const double floor = best + std::log(rho);
  std::erase_if(candidates, [&](const Candidate& c) { return c.score < floor; });
  return candidates;
}

std::vector<std::size_t> select_beam(std::span<const Candidate> candidates, std::size_t beam,
                                     std::size_t group_budget) {
  auto before = [&](std::size_t a, std::size_t b) { return candidate_before(candidates[a], candidates[b]); };
  std::map<std::uint64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < candidates.size(); ++i) groups[candidates[i].covered].push_back(i);

  std::vector<std::vector<std::size_t>> kept;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), before);
    if (members.size() > group_budget) members.resize(group_budget);
    kept.push_back(std::move(members));
  }
  std::sort(kept.begin(), kept.end(), [&](const auto& a, const auto& b) {
    const int pa = std::popcount(candidates[a.front()].covered);
    const int pb = std::popcount(candidates[b.front()].covered);
    if (pa != pb) return pa > pb;
    return before(a.front(), b.front());
  });

  std::vector<std::size_t> out;
  std::vector<bool> taken(candidates.size(), false);
  auto take = [&](std::size_t i) {
    if (out.size() < beam && !taken[i]) {
      taken[i] = true;
      out.push_back(i);
    }
  };
  for (const auto& g : kept) take(g.front());
  std::vector<std::size_t> rest;
  for (const auto& g : kept) rest.insert(rest.end(), g.begin() + 1, g.end());
  std::sort(rest.begin(), rest.end(), before);
  for (std::size_t i : rest) take(i);
  if (out.size() < beam) {
    std::vector<std::size_t> all(candidates.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::sort(all.begin(), all.end(), before);
    for (std::size_t i : all) take(i);
  }
  return out;
}

namespace {

bool prob_before(std::span<const double> p, TokenId a, TokenId b) {
  if (p[a] != p[b]) return p[a] > p[b];
  return a < b;
}

/// Up to m positive-probability tokens, most probable first.
std::vector<TokenId> top_tokens(std::span<const double> p, std::size_t m, std::optional<TokenId> exclude) {
  std::vector<TokenId> ids;
  ids.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0 && (!exclude || *exclude != i)) ids.push_back(static_cast<TokenId>(i));
  }
  const std::size_t n = std::min(m, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](TokenId a, TokenId b) { return prob_before(p, a, b); });
  ids.resize(n);
  return ids;
}

std::vector<std::pair<TokenId, double>> top_entries(std::span<const double> p, std::size_t m) {
  std::vector<std::pair<TokenId, double>> out;
  for (TokenId t : top_tokens(p, m, std::nullopt)) out.emplace_back(t, p[t]);
  return out;
}

bool rank_before(const Hypothesis& a, const Hypothesis& b, double lp) {
  const double sa = ranking_score(a, lp);
  const double sb = ranking_score(b, lp);
  if (sa != sb) return sa > sb;
  const int pa = std::popcount(a.covered);
  const int pb = std::popcount(b.covered);
  if (pa != pb) return pa > pb;
  return a.tokens < b.tokens;
}

DecodeResult finish(std::vector<Hypothesis> done, std::vector<Hypothesis> unfinished, std::size_t steps,
                    std::vector<TraceStep> trace, double lp) {
  DecodeResult r;
  r.steps = steps;
  r.trace = std::move(trace);
  r.finished = !done.empty();
  r.hypotheses = r.finished ? std::move(done) : std::move(unfinished);
  std::sort(r.hypotheses.begin(), r.hypotheses.end(),
            [lp](const Hypothesis& a, const Hypothesis& b) { return rank_before(a, b, lp); });
  if (r.hypotheses.empty()) throw Error("decoding produced no hypothesis");
  return r;
}

struct Live {
  Hypothesis hyp;
  std::unique_ptr<ScorerSession> session;
  Distribution next;
};

class Search {
 public:
  Search(const Scorer& scorer, const RuleProgram& program, std::string_view rule, const EvalContext& ctx,
         const DecodingConfig& config)
      : scorer_(scorer), program_(program), rule_(rule), ctx_(ctx), config_(config) {
    config_.validate();
    if (auto it = ctx.sets.find(sets::kTargets); it != ctx.sets.end()) targets_ = it->second;
    if (targets_.size() > 64) throw DimensionError("at most 64 target words are supported");
    if (ctx.facts != nullptr && ctx.facts->vocab_size() != scorer.vocab_size()) {
      throw DimensionError("scorer vocabulary (" + std::to_string(scorer.vocab_size()) +
                           ") does not match the fact base vocabulary (" +
                           std::to_string(ctx.facts->vocab_size()) + ")");
    }
    if (!targets_.empty() && ctx.facts == nullptr) throw Error("target words need a fact base for coverage");
    if (config_.bos >= scorer.vocab_size() || config_.eos >= scorer.vocab_size()) {
      throw DimensionError("begin/end token outside the vocabulary");
    }
    logic_ = !rule_.empty();
    if (logic_) {
      if (ctx.facts == nullptr) throw Error("rule evaluation needs a fact base");
      const Rule& r = program_.rule(rule_);
      if (r.params.size() != 1) throw BindError(BindError::Kind::BadArity, "top rule must take one argument");
      memo_ok_ = prefix_enters_only_through_coverage(program_, rule_);
      hooks_ = scorer.supports_attention_hooks() && (config_.alpha1 > 0.0 || config_.alpha2 > 0.0);
    }
  }

  DecodeResult run() {
    std::vector<TokenId> start{config_.bos};
    Live root;
    root.session = scorer_.begin_session(targets_);
    root.next = step_scorer(*root.session, config_.bos, start);
    std::vector<Live> live;
    live.push_back(std::move(root));

    std::vector<Hypothesis> done;
    std::vector<Hypothesis> unfinished;
    std::vector<TraceStep> trace;
    const std::size_t width = config_.expansion_width();
    std::size_t step = 0;
    for (; step < config_.max_length && !live.empty() && done.size() < config_.beam; ++step) {
      std::vector<Candidate> cands;
      for (std::size_t i = 0; i < live.size(); ++i) {
        const Live& L = live[i];
        std::vector<double> shifted = shifted_distribution(L);
        if (config_.trace) {
          trace.push_back(TraceStep{step, i, top_entries(L.next.values(), 5), top_entries(shifted, 5)});
        }
        std::optional<TokenId> exclude;
        if (L.hyp.tokens.size() < config_.min_length) exclude = config_.eos;
        for (TokenId w : top_tokens(shifted, width, exclude)) {
          Candidate c;
          c.score = L.hyp.score + std::log(shifted[w]);
          c.covered = targets_.empty() ? 0 : update_constraint_state(L.hyp.covered, w, targets_, ctx_.facts->stems);
          c.parent_tokens = L.hyp.tokens;
          c.token = w;
          c.parent = i;
          cands.push_back(c);
        }
      }
      std::vector<Candidate> pruned = prune_candidates(std::move(cands), config_.rho);
      const std::vector<std::size_t> order = select_beam(pruned, config_.beam, config_.group_budget);
      const bool last = step + 1 == config_.max_length;
      std::vector<Live> next;
      for (std::size_t idx : order) {
        const Candidate& c = pruned[idx];
        const Live& parent = live[c.parent];
        Hypothesis h = parent.hyp;
        h.tokens.push_back(c.token);
        h.score = c.score;
        h.covered = c.covered;
        if (c.token == config_.eos) {
          h.finished = true;
          done.push_back(std::move(h));
        } else if (last) {
          unfinished.push_back(std::move(h));
        } else {
          Live child;
          child.session = parent.session->clone();
          std::vector<TokenId> seq;
          seq.reserve(h.tokens.size() + 1);
          seq.push_back(config_.bos);
          seq.insert(seq.end(), h.tokens.begin(), h.tokens.end());
          child.next = step_scorer(*child.session, c.token, seq);
          child.hyp = std::move(h);
          next.push_back(std::move(child));
        }
      }
      live = std::move(next);
    }
    for (Live& L : live) unfinished.push_back(std::move(L.hyp));
    return finish(std::move(done), std::move(unfinished), step, std::move(trace), config_.length_penalty);
  }

 private:
  EvalContext context_for(const std::vector<TokenId>& seq) const {
    EvalContext c = ctx_;
    c.sets[std::string(sets::kPrefix)] = seq;
    return c;
  }

  Distribution step_scorer(ScorerSession& session, TokenId token, const std::vector<TokenId>& seq) const {
    if (!hooks_) return scorer_.step(session, token, nullptr);
    const EvalContext c = context_for(seq);
    TruthVector prefix_truth = config_.alpha1 > 0.0
                                   ? prove(program_, rule_, Domain::prefix(seq), c)
                                   : TruthVector::zeros(seq.size(), DomainKind::PrefixPositions);
    TruthVector target_truth = config_.alpha2 > 0.0 && !targets_.empty()
                                   ? prove(program_, rule_, Domain::targets(targets_), c)
                                   : TruthVector::zeros(targets_.size(), DomainKind::TargetWords);
    const AttentionHookBundle hooks =
        logic_attention_hooks(std::move(prefix_truth), config_.alpha1, std::move(target_truth), config_.alpha2);
    return scorer_.step(session, token, &hooks);
  }

  const TruthVector& vocabulary_truth(const Hypothesis& h) {
    if (memo_ok_) {
      auto it = memo_.find(h.covered);
      if (it != memo_.end()) return it->second;
    }
    std::vector<TokenId> seq{config_.bos};
    seq.insert(seq.end(), h.tokens.begin(), h.tokens.end());
    TruthVector truth = prove(program_, rule_, Domain::vocabulary(), context_for(seq));
    if (memo_ok_) return memo_.emplace(h.covered, std::move(truth)).first->second;
    scratch_ = std::move(truth);
    return scratch_;
  }

  std::vector<double> shifted_distribution(const Live& L) {
    if (!logic_ || config_.alpha3 == 0.0) {
      auto v = L.next.values();
      return std::vector<double>(v.begin(), v.end());
    }
    const Distribution shifted = decide(L.next, vocabulary_truth(L.hyp), config_.alpha3);
    auto v = shifted.values();
    return std::vector<double>(v.begin(), v.end());
  }

  const Scorer& scorer_;
  const RuleProgram& program_;
  std::string rule_;
  const EvalContext& ctx_;
  DecodingConfig config_;
  std::vector<TokenId> targets_;
  bool logic_ = false;
  bool memo_ok_ = false;
  bool hooks_ = false;
  std::unordered_map<std::uint64_t, TruthVector> memo_;
  TruthVector scratch_;
};

}  // namespace

DecodeResult decode(const Scorer& scorer, const RuleProgram& program, std::string_view rule, const EvalContext& ctx,
                    const DecodingConfig& config) {
  return Search(scorer, program, rule, ctx, config).run();
}

DecodeResult baseline_beam_search(const Scorer& scorer, const DecodingConfig& config) {
  config.validate();
  if (config.bos >= scorer.vocab_size() || config.eos >= scorer.vocab_size()) {
    throw DimensionError("begin/end token outside the vocabulary");
  }
  struct Beam {
    Hypothesis hyp;
    std::unique_ptr<ScorerSession> session;
    Distribution next;
  };
  std::vector<Beam> beams;
  {
    Beam root;
    root.session = scorer.begin_session({});
    root.next = scorer.step(*root.session, config.bos, nullptr);
    beams.push_back(std::move(root));
  }
  std::vector<Hypothesis> done;
  std::vector<Hypothesis> unfinished;
  const std::size_t width = config.expansion_width();
  std::size_t step = 0;
  for (; step < config.max_length && !beams.empty() && done.size() < config.beam; ++step) {
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < beams.size(); ++i) {
      const auto p = beams[i].next.values();
      std::optional<TokenId> exclude;
      if (beams[i].hyp.tokens.size() < config.min_length) exclude = config.eos;
      for (TokenId w : top_tokens(p, width, exclude)) {
        cands.push_back(Candidate{beams[i].hyp.score + std::log(p[w]), 0, beams[i].hyp.tokens, w, i});
      }
    }
    cands = prune_candidates(std::move(cands), config.rho);
    std::sort(cands.begin(), cands.end(), candidate_before);
    if (cands.size() > config.beam) cands.resize(config.beam);
    const bool last = step + 1 == config.max_length;
    std::vector<Beam> next;
    for (const Candidate& c : cands) {
      Hypothesis h = beams[c.parent].hyp;
      h.tokens.push_back(c.token);
      h.score = c.score;
      if (c.token == config.eos) {
        h.finished = true;
        done.push_back(std::move(h));
      } else if (last) {
        unfinished.push_back(std::move(h));
      } else {
        Beam b;
        b.session = beams[c.parent].session->clone();
        b.next = scorer.step(*b.session, c.token, nullptr);
        b.hyp = std::move(h);
        next.push_back(std::move(b));
      }
    }
    beams = std::move(next);
  }
  for (Beam& b : beams) unfinished.push_back(std::move(b.hyp));
  return finish(std::move(done), std::move(unfinished), step, {}, config.length_penalty);
}

}  // namespace logicdec
