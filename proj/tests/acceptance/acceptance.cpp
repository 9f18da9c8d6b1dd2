#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "json.hpp"
#include "logicdec/connectives.hpp"
#include "logicdec/decision.hpp"
#include "logicdec/decoder.hpp"
#include "logicdec/ngram.hpp"
#include "logicdec/prover.hpp"
#include "logicdec/service.hpp"
#include "logicdec/tasks.hpp"
#include "logicdec/transformer.hpp"

using namespace logicdec;
using logicdec::testing::data_path;
using logicdec::testing::Rng;
using logicdec::testing::rules_path;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1
Outcome connectives() {
  const auto t0 = Clock::now();
  Outcome o;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<TruthVector> kids;
      bool any = false;
      bool all = true;
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double b = (mask >> i) & 1u ? 1.0 : 0.0;
        any = any || b == 1.0;
        all = all && b == 1.0;
        sum += b;
        kids.push_back(TruthVector(std::vector<double>{b}));
      }
      if (or_vec(kids)[0] != (any ? 1.0 : 0.0)) o.pass = false;
      if (and_luk_vec(kids)[0] != (all ? 1.0 : 0.0)) o.pass = false;
      if (std::abs(and_avg_vec(kids)[0] - sum / static_cast<double>(n)) > 1e-12) o.pass = false;
      if (not_vec(kids[0])[0] != 1.0 - kids[0][0]) o.pass = false;
    }
  }
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t outside = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + trial % 5;
    std::vector<TruthVector> kids;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(8);
      for (double& x : v) x = u(rng);
      sum += v[0];
      kids.push_back(TruthVector(std::move(v)));
    }
    for (const TruthVector& r : {or_vec(kids), and_avg_vec(kids), and_luk_vec(kids), not_vec(kids[0])}) {
      for (double x : r.values()) outside += (x < 0.0 || x > 1.0) ? 1 : 0;
    }
    if (std::abs(and_avg_vec(kids)[0] - sum / static_cast<double>(n)) > 1e-12) o.pass = false;
  }
  const double t = seconds_since(t0);
  o.pass = o.pass && outside == 0 && t < 1.0;
  o.detail = fmt("out of range %.0f, %.3fs", static_cast<double>(outside), t);
  return o;
}

// 2
Outcome prover_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  std::size_t words = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = logicdec::testing::random_case(rng);
    const EvalContext ctx(c.facts, c.sets);
    const TruthVector v = prove(c.program, "R", c.domain, ctx);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const TokenId w = c.domain.kind == DomainKind::Vocabulary ? static_cast<TokenId>(i) : c.domain.tokens[i];
      worst = std::max(worst, std::abs(v[i] - prove_scalar(c.program, "R", w, ctx)));
      ++words;
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-9 && t < 30.0,
          fmt("max |diff| %.2e over %.0f words, %.2fs", worst, static_cast<double>(words), t)};
}

// 3
Outcome decision() {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_p = [&](std::size_t n) {
    std::vector<double> w(n);
    for (double& x : w) x = u(rng) < 0.2 ? 0.0 : u(rng) + 1e-3;
    w[0] = u(rng) + 1e-3;
    return Distribution::normalized(std::move(w));
  };
  auto random_t = [&](std::size_t n) {
    std::vector<double> t(n);
    for (double& x : t) x = u(rng);
    return TruthVector(std::move(t));
  };
  double identity = 0.0;
  double norm = 0.0;
  std::size_t ordered = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 40;
    const Distribution p = random_p(n);
    const Distribution a = decide(p, TruthVector::zeros(n), 24.0);
    const Distribution b = decide(p, random_t(n), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      identity = std::max({identity, std::abs(a[i] - p[i]), std::abs(b[i] - p[i])});
    }
    const double alpha = 48.0 * u(rng);
    const Distribution s = decide(p, random_t(n), alpha);
    double sum = 0.0;
    for (double x : s.values()) sum += x;
    norm = std::max(norm, std::abs(sum - 1.0));

    std::vector<double> w(n);
    for (double& x : w) x = u(rng) + 1e-3;
    w[1] = w[0];
    std::vector<double> tv(n);
    for (double& x : tv) x = u(rng);
    tv[0] = std::min(1.0, tv[1] + 0.01 + 0.5 * u(rng));
    const Distribution q = decide(Distribution::normalized(w), TruthVector(tv), 1.0 + alpha);
    ordered += q[0] > q[1] ? 1 : 0;
  }
  const Distribution ex = decide(Distribution({0.5, 0.5}), TruthVector(std::vector<double>{1, 0}), 2.0);
  const bool closed = std::abs(ex[0] - 0.7311) <= 1e-4 && std::abs(ex[1] - 0.2689) <= 1e-4;
  Outcome o;
  o.pass = identity <= 1e-9 && norm <= 1e-6 && ordered == 1000 && closed;
  o.detail = fmt("identity %.1e, norm %.1e, ordered %.0f/1000", identity, norm, static_cast<double>(ordered)) +
             fmt(", example [%.4f, %.4f]", ex[0], ex[1]);
  return o;
}

// 4
Outcome hook_identity() {
  const auto t0 = Clock::now();
  TransformerConfig cfg;
  cfg.vocab_size = 50;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.d_model = 32;
  cfg.d_ff = 128;
  const TinyTransformer m = TinyTransformer::random(cfg, 1234);
  double worst_row = 0.0;
  std::size_t rows = 0;
  auto observer = [&](int, int, std::span<const double> target, std::span<const double> prefix) {
    double s = 0.0;
    for (double x : target) s += x;
    for (double x : prefix) s += x;
    worst_row = std::max(worst_row, std::abs(s - 1.0));
    ++rows;
  };
  const std::vector<TokenId> targets{7, 19, 33};
  auto plain = m.begin_session(targets);
  auto hooked = m.begin_session(targets);
  double worst = 0.0;
  Rng rng(5);
  std::uniform_int_distribution<TokenId> tok(0, 49);
  for (int t = 0; t < 24; ++t) {
    const TokenId token = t == 0 ? 0 : tok(rng);
    const auto a = m.step_logits(*plain, token, nullptr);
    AttentionHookBundle hooks = logic_attention_hooks(TruthVector::zeros(static_cast<std::size_t>(t) + 1), 12.0,
                                                      TruthVector::zeros(targets.size()), 24.0);
    hooks.observer = observer;
    const auto b = m.step_logits(*hooked, token, &hooks);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-6 && worst_row <= 1e-6 && rows == 24 * 4 && t < 10.0,
          fmt("max logit diff %.1e, max row error %.1e, %.2fs", worst, worst_row, t)};
}

// 5
Outcome degenerate() {
  Rng rng(505);
  std::size_t same = 0;
  for (int run = 0; run < 50; ++run) {
    const std::size_t vocab = 6 + run % 12;
    const auto corpus = logicdec::testing::random_corpus(rng, vocab, 40);
    const NgramLM lm = NgramLM::train(corpus, vocab, 0, 1, NgramOptions{2 + run % 3, 0.75, 0.0});
    DecodingConfig c;
    c.beam = 1 + run % 8;
    c.max_length = 10 + run % 6;
    c.rho = run % 2 == 0 ? 1.0 : 0.4;
    const DecodeResult a = decode(lm, RuleProgram{}, "", EvalContext{}, c);
    const DecodeResult b = baseline_beam_search(lm, c);
    bool eq = a.hypotheses.size() == b.hypotheses.size();
    for (std::size_t i = 0; eq && i < a.hypotheses.size(); ++i) {
      eq = a.hypotheses[i].tokens == b.hypotheses[i].tokens;
    }
    same += eq ? 1 : 0;
  }
  return {same == 50, fmt("%.0f/50 identical", static_cast<double>(same))};
}

struct Toy {
  FactBase facts = logicdec::testing::toy_facts();
  TokenId bos = facts.vocab.id("<s>");
  TokenId eos = facts.vocab.id("</s>");

  NgramLM lm(const char* corpus) const {
    return NgramLM::train(load_corpus(data_path(corpus), facts.vocab), facts.vocab_size(), bos, eos,
                          NgramOptions{3, 0.75, 0.0});
  }
  DecodingConfig config(const char* name, std::size_t max_length) const {
    DecodingConfig c = preset(name);
    c.bos = bos;
    c.eos = eos;
    c.max_length = max_length;
    return c;
  }
  std::string text(const Hypothesis& h) const {
    std::string s;
    for (TokenId t : h.tokens) {
      if (t == eos) break;
      if (!s.empty()) s += ' ';
      s += facts.vocab.token(t);
    }
    return s;
  }
};

// 6
Outcome lexical_suite() {
  const auto t0 = Clock::now();
  const Toy toy;
  const NgramLM lm = toy.lm("lexical_corpus.txt");
  const std::string rules = logicdec::testing::slurp(rules_path("commongen_hard.rules"));
  const auto instances = load_instances(data_path("lexical.jsonl"));
  const DecodingConfig c = toy.config("commongen", 12);
  std::vector<std::string> guided;
  std::vector<std::string> plain;
  for (const TaskInstance& inst : instances) {
    const RuleTemplate t = lexical_rule_template(inst.concepts, toy.facts, rules);
    guided.push_back(toy.text(decode(lm, t.program, t.rule, EvalContext(toy.facts, t.sets), c).best()));
    plain.push_back(toy.text(baseline_beam_search(lm, c).best()));
  }
  const double g = corpus_coverage(guided, instances);
  const double b = corpus_coverage(plain, instances);
  const double t = seconds_since(t0);
  return {instances.size() == 20 && g >= 95.0 && b < 50.0 && t < 120.0,
          fmt("coverage %.1f%% vs baseline %.1f%%, %.2fs", g, b, t)};
}

// 7
Outcome dialogue_suite() {
  const Toy toy;
  const NgramLM lm = toy.lm("dialogue_corpus.txt");
  const std::string rules = logicdec::testing::slurp(rules_path("personachat.rules"));
  const DecodingConfig c = toy.config("personachat", 8);
  std::size_t guided = 0;
  std::size_t plain = 0;
  std::size_t n = 0;
  std::ifstream in(data_path("dialogue.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++n;
    const TaskInstance inst = parse_instance(line, n);
    const TokenId bridge = toy.facts.vocab.id(json::parse(line).at("bridge").get<std::string>());
    auto has_bridge = [&](const Hypothesis& h) {
      return std::any_of(h.tokens.begin(), h.tokens.end(),
                         [&](TokenId t) { return toy.facts.stems.same_class(t, bridge); });
    };
    const RuleTemplate t = dialogue_rule_template(inst.persona, inst.history, toy.facts, rules);
    guided += has_bridge(decode(lm, t.program, t.rule, EvalContext(toy.facts, t.sets), c).best()) ? 1 : 0;
    plain += has_bridge(baseline_beam_search(lm, c).best()) ? 1 : 0;
  }
  return {n == 10 && guided >= 8 && plain <= 3,
          fmt("bridge in %.0f/10 vs baseline %.0f/10", static_cast<double>(guided), static_cast<double>(plain))};
}

// 8
Outcome linearity() {
  const Toy toy;
  const NgramLM lm = toy.lm("lexical_corpus.txt");
  const RuleProgram program = load_rule_file(rules_path("commongen_hard.rules"));
  const Vocabulary& v = toy.facts.vocab;
  const SetBindings sets{{"C", {v.id("dog"), v.id("frisbee"), v.id("park")}}};
  auto median_time = [&](std::size_t n) {
    DecodingConfig c = toy.config("commongen", n);
    c.beam = 10;
    c.min_length = n;
    std::vector<double> times;
    for (int i = 0; i < 5; ++i) {
      const auto t0 = Clock::now();
      for (int rep = 0; rep < 20; ++rep) {
        const DecodeResult r = decode(lm, program, "R", EvalContext(toy.facts, sets), c);
        if (r.hypotheses.empty() || r.best().tokens.size() != n) return -1.0;
      }
      times.push_back(seconds_since(t0) / 20.0);
    }
    std::sort(times.begin(), times.end());
    return times[2];
  };
  median_time(16);
  const double t16 = median_time(16);
  const double t128 = median_time(128);
  return {t16 > 0.0 && t128 > 0.0 && t128 <= 1.5 * 8.0 * t16,
          fmt("t16 %.2es, t128 %.2es, ratio %.2f", t16, t128, t128 / t16)};
}

// 9
Outcome service_differential() {
  const FactBase facts = logicdec::testing::toy_facts();
  const RuleProgram program = load_rule_file(rules_path("commongen_hard.rules"));
  LogicServer server(facts, program);
  server.bind("127.0.0.1", 0);
  server.start();
  Rng rng(909);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(facts.vocab_size() - 1));
  std::size_t same = 0;
  std::size_t errors = 0;
  {
    logicdec::testing::LineClient client("127.0.0.1", server.port());
    for (int i = 0; i < 500; ++i) {
      json req;
      std::vector<double> expected;
      const char* field = nullptr;
      if (i % 2 == 0) {
        const char* rule = i % 4 == 0 ? "R" : "Y";
        std::vector<TokenId> c(1 + i % 3);
        std::vector<TokenId> prefix(1 + i % 5);
        for (TokenId& t : c) t = tok(rng);
        for (TokenId& t : prefix) t = tok(rng);
        json cj = json::array();
        for (TokenId t : c) {
          if (u(rng) < 0.5) {
            cj.push_back(facts.vocab.token(t));
          } else {
            cj.push_back(t);
          }
        }
        req = {{"op", "prove"}, {"rule", rule}, {"ctx", {{"C", cj}, {"Prefix", prefix}}}, {"id", i}};
        Domain domain = Domain::vocabulary();
        if (i % 3 == 0) {
          std::vector<TokenId> d(1 + i % 7);
          json dj = json::array();
          for (TokenId& t : d) {
            t = tok(rng);
            dj.push_back(facts.vocab.token(t));
          }
          req["domain"] = dj;
          domain = Domain::custom(d);
        } else {
          req["domain"] = "vocab";
        }
        const TruthVector truth = prove(program, rule, domain, EvalContext(facts, {{"C", c}, {"Prefix", prefix}}));
        expected.assign(truth.values().begin(), truth.values().end());
        field = "truth";
      } else {
        const std::size_t n = 2 + i % 30;
        std::vector<double> w(n);
        std::vector<double> t(n);
        for (double& x : w) x = u(rng) + 1e-3;
        for (double& x : t) x = u(rng);
        const Distribution p = Distribution::normalized(w);
        const double alpha = 48.0 * u(rng);
        req = {{"op", "decide"}, {"p", p.values()}, {"truth", t}, {"alpha", alpha}};
        const Distribution d = decide(Distribution(std::vector<double>(p.values().begin(), p.values().end())),
                                      TruthVector(t), alpha);
        expected.assign(d.values().begin(), d.values().end());
        field = "p_shifted";
      }
      const std::string line = req.dump();
      const std::string wire = client.request(line);
      const json reply = json::parse(wire);
      if (reply.contains("error")) {
        ++errors;
        continue;
      }
      const bool text_equal = wire == handle_request(line, facts, program);
      const bool values_equal = reply.at(field).get<std::vector<double>>() == expected;
      same += text_equal && values_equal ? 1 : 0;
    }
  }
  server.stop();
  return {same == 500, fmt("%.0f/500 bitwise equal, %.0f errors", static_cast<double>(same),
                           static_cast<double>(errors))};
}

bool invariants_hold(const FactBase& f) {
  const AdjacencyMatrix& m = f.edges;
  for (TokenId col = 0; col < m.size(); ++col) {
    auto rows = m.column_rows(col);
    auto weights = m.column_weights(col);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const TokenId row = rows[k];
      if (row == col || m.weight(col, row) != weights[k]) return false;
      if (f.mode == EdgeMode::Hard ? weights[k] != 1.0 : (weights[k] <= 0.0 || weights[k] >= 1.0)) return false;
      for (TokenId mate : f.stems.members(f.stems.class_of(row))) {
        if (mate != col && !f.stems.same_class(mate, col) && m.weight(mate, col) != weights[k]) return false;
      }
    }
  }
  return true;
}

std::string snapshot(const FactBase& f) {
  std::ostringstream s;
  write_snapshot(s, f);
  return s.str();
}

// 10
Outcome ingestion_audit() {
  const Vocabulary vocab = load_vocabulary(data_path("vocab.txt"));
  bool ok = true;
  IngestReport toy;
  for (EdgeMode mode : {EdgeMode::Hard, EdgeMode::Soft}) {
    IngestOptions options;
    options.mode = mode;
    options.stop_words = default_stop_words();
    const IngestResult a = ingest_triple_file(data_path("ingest_toy.tsv"), vocab, options);
    const IngestResult b = ingest_triple_file(data_path("ingest_toy.tsv"), vocab, options);
    const IngestResult kg = ingest_triple_file(data_path("kg.tsv"), vocab, options);
    ok = ok && invariants_hold(a.facts) && invariants_hold(kg.facts);
    ok = ok && snapshot(a.facts) == snapshot(b.facts);
    std::vector<Triple> triples;
    std::ifstream in(data_path("kg.tsv"));
    std::string line;
    while (std::getline(in, line)) {
      Triple t;
      if (parse_triple_line(line, t)) triples.push_back(t);
    }
    std::vector<Triple> doubled = triples;
    doubled.insert(doubled.end(), triples.begin(), triples.end());
    ok = ok && ingest_triples(doubled, vocab, options).facts == kg.facts;
    ok = ok && a.report.read == 10 && a.report.kept == 8 && a.report.discarded == 2 && a.report.malformed == 0;
    toy = a.report;
  }
  return {ok, fmt("read %.0f, kept %.0f, discarded %.0f", static_cast<double>(toy.read),
                  static_cast<double>(toy.kept), static_cast<double>(toy.discarded))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"connective correctness", connectives},
      {"prover oracle equivalence", prover_oracle},
      {"decision identity and boost", decision},
      {"hook identity", hook_identity},
      {"degenerate decoder equivalence", degenerate},
      {"lexical constrained generation", lexical_suite},
      {"dialogue bridging", dialogue_suite},
      {"complexity linearity", linearity},
      {"service differential", service_differential},
      {"ingestion audit", ingestion_audit},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
