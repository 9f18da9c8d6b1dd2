#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "logicdec/decision.hpp"
#include "logicdec/decoder.hpp"
#include "logicdec/ngram.hpp"
#include "logicdec/prover.hpp"
#include "logicdec/rule_dsl.hpp"
#include "logicdec/transformer.hpp"

using namespace logicdec;

namespace {

constexpr const char* kRules = R"(
R(x) :- exists c in C, ~Y(c) & Rel(x, c)
Rel(x, y) :- Edge(x, y) | Equal(x, y)
Y(x) :- exists y in Prefix, Equal(x, y)
)";

// Pairs of stem-mates, about eight edges per word.
FactBase synthetic_facts(std::size_t n, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> words;
  std::vector<std::uint32_t> classes;
  for (std::size_t i = 0; i < n; ++i) {
    words.push_back("w" + std::to_string(i));
    classes.push_back(static_cast<std::uint32_t>(i / 2));
  }
  std::uniform_int_distribution<TokenId> pick(0, static_cast<TokenId>(n - 1));
  std::uniform_real_distribution<double> weight(0.05, 0.95);
  std::vector<AdjacencyMatrix::Entry> edges;
  for (std::size_t i = 0; i < 4 * n; ++i) {
    const TokenId a = pick(rng);
    const TokenId b = pick(rng);
    if (a / 2 != b / 2) edges.push_back({a, b, weight(rng)});
  }
  FactBase f;
  f.vocab = Vocabulary(words);
  f.stems = StemIndex(std::move(classes));
  f.edges = AdjacencyMatrix::from_entries(n, edges);
  f.mode = EdgeMode::Soft;
  return f;
}

std::vector<std::vector<TokenId>> synthetic_corpus(std::size_t vocab, std::size_t sentences) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<TokenId> pick(2, static_cast<TokenId>(vocab - 1));
  std::vector<std::vector<TokenId>> out(sentences);
  for (auto& s : out) {
    s.resize(4 + rng() % 12);
    for (TokenId& t : s) t = pick(rng);
  }
  return out;
}

void BM_ProveVocabulary(benchmark::State& state) {
  const FactBase facts = synthetic_facts(static_cast<std::size_t>(state.range(0)));
  const RuleProgram program = parse_program(kRules);
  const EvalContext ctx(facts, {{"C", {10, 20, 30}}, {"Prefix", {0, 5, 9, 13, 20, 40, 41, 42}}});
  for (auto _ : state) benchmark::DoNotOptimize(prove(program, "R", Domain::vocabulary(), ctx));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProveVocabulary)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

void BM_Decide(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  std::vector<double> t(n);
  for (double& x : w) x = u(rng) + 1e-3;
  for (double& x : t) x = u(rng);
  const Distribution p = Distribution::normalized(w);
  const TruthVector truth(t);
  for (auto _ : state) benchmark::DoNotOptimize(decide(p, truth, 24.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Decide)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);

void BM_NgramStep(benchmark::State& state) {
  const auto vocab = static_cast<std::size_t>(state.range(0));
  const NgramLM lm = NgramLM::train(synthetic_corpus(vocab, 2000), vocab, 0, 1, NgramOptions{3, 0.75, 0.0});
  auto session = lm.begin_session({});
  TokenId token = 0;
  for (auto _ : state) {
    const Distribution d = lm.step(*session, token, nullptr);
    token = static_cast<TokenId>(2 + (token * 7 + 3) % (vocab - 2));
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_NgramStep)->Arg(1000)->Arg(10000);

void BM_TransformerSteps(benchmark::State& state) {
  TransformerConfig cfg;
  cfg.vocab_size = 1000;
  const TinyTransformer m = TinyTransformer::random(cfg, 1);
  const std::vector<TokenId> targets{10, 20, 30};
  const bool hooked = state.range(0) != 0;
  for (auto _ : state) {
    auto session = m.begin_session(targets);
    for (std::size_t t = 0; t < 32; ++t) {
      const AttentionHookBundle hooks =
          logic_attention_hooks(TruthVector::constant(t + 1, 0.5), 12.0, TruthVector::constant(3, 1.0), 24.0);
      benchmark::DoNotOptimize(m.step(*session, static_cast<TokenId>(t * 13 % 1000), hooked ? &hooks : nullptr));
    }
  }
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_TransformerSteps)->Arg(0)->Arg(1);

void BM_Decode(benchmark::State& state) {
  const std::size_t vocab = 2000;
  const FactBase facts = synthetic_facts(vocab);
  const RuleProgram program = parse_program(kRules);
  const NgramLM lm = NgramLM::train(synthetic_corpus(vocab, 2000), vocab, 0, 1, NgramOptions{3, 0.75, 0.0});
  const EvalContext ctx(facts, {{"C", {10, 20, 30}}});
  DecodingConfig c = preset("commongen");
  c.beam = 10;
  c.max_length = static_cast<std::size_t>(state.range(0));
  c.min_length = c.max_length;
  for (auto _ : state) benchmark::DoNotOptimize(decode(lm, program, "R", ctx, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Decode)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BaselineBeam(benchmark::State& state) {
  const std::size_t vocab = 2000;
  const NgramLM lm = NgramLM::train(synthetic_corpus(vocab, 2000), vocab, 0, 1, NgramOptions{3, 0.75, 0.0});
  DecodingConfig c;
  c.beam = 10;
  c.max_length = static_cast<std::size_t>(state.range(0));
  c.min_length = c.max_length;
  for (auto _ : state) benchmark::DoNotOptimize(baseline_beam_search(lm, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BaselineBeam)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
