#include "app.hpp"

#include <signal.h>

#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <iterator>
#include <optional>
#include <sstream>
#include <tuple>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "logicdec/decoder.hpp"
#include "logicdec/error.hpp"
#include "logicdec/io.hpp"
#include "logicdec/knowledge_base.hpp"
#include "logicdec/ngram.hpp"
#include "logicdec/service.hpp"
#include "logicdec/tasks.hpp"
#include "logicdec/transformer.hpp"

namespace logicdec::cli {

namespace {

using nlohmann::json;

/// Raised for bad flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IngestArgs {
  std::string triples;
  std::string vocab;
  std::string mode = "soft";
  std::string out;
  std::string stop_words;
  std::string black_words;
  std::string marker;
};

struct ScorerArgs {
  std::string kind = "ngram";
  std::string corpus;
  int order = 3;
  double discount = 0.75;
  std::string weights;
  std::uint64_t seed = 1;
  int layers = 2;
  int heads = 2;
  int d_model = 32;
};

struct SearchArgs {
  std::string preset = "custom";
  std::size_t beam = 10;
  double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
  double rho = 1.0;
  std::size_t k = 8;
  std::size_t max_len = 32;
  std::size_t min_len = 0;
  double length_penalty = 0.7;
  std::string bos = "<s>";
  std::string eos = "</s>";
};

struct DecodeArgs {
  std::string factbase;
  std::string rules;
  std::string instances;
  std::string rule = "R";
  std::string out;
  bool trace = false;
  unsigned jobs = 1;
  ScorerArgs scorer;
  SearchArgs search;
};

struct EvalArgs {
  std::string results;
  std::string instances;
  std::string json_out;
};

struct ServeArgs {
  std::string factbase;
  std::string rules;
  std::string host = "127.0.0.1";
  std::uint16_t port = 7878;
};

struct Parsed {
  IngestArgs ingest;
  DecodeArgs decode;
  DecodeArgs baseline;
  EvalArgs eval;
  ServeArgs serve;
  std::map<std::string, CLI::Option*> given;
};

void configure_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("logicdec");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("LOGICDEC_LOG");
  spdlog::set_level(env != nullptr ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void add_scorer_flags(CLI::App* cmd, ScorerArgs& s) {
  cmd->add_option("--scorer", s.kind, "Next-token scorer")->check(CLI::IsMember({"ngram", "transformer"}));
  cmd->add_option("--corpus", s.corpus, "Training corpus for the n-gram scorer, one sentence per line");
  cmd->add_option("--order", s.order, "n-gram order")->check(CLI::Range(1, 5));
  cmd->add_option("--discount", s.discount, "Absolute discount of the n-gram scorer");
  cmd->add_option("--weights", s.weights, "Transformer weight file; random weights when absent");
  cmd->add_option("--seed", s.seed, "Seed for random transformer weights");
  cmd->add_option("--layers", s.layers, "Layers of a random transformer");
  cmd->add_option("--heads", s.heads, "Heads of a random transformer");
  cmd->add_option("--d-model", s.d_model, "Width of a random transformer");
}

void add_search_flags(CLI::App* cmd, SearchArgs& s, Parsed& p, const std::string& prefix, bool logic) {
  auto keep = [&](CLI::Option* o, const std::string& name) { p.given[prefix + name] = o; };
  if (logic) {
    keep(cmd->add_option("--preset", s.preset, "Hyperparameter preset")
             ->check(CLI::IsMember({"commongen", "personachat", "custom"})),
         "preset");
    keep(cmd->add_option("--alpha1", s.alpha1, "Prefix attention intensity"), "alpha1");
    keep(cmd->add_option("--alpha2", s.alpha2, "Target attention intensity"), "alpha2");
    keep(cmd->add_option("--alpha3", s.alpha3, "Prediction intensity"), "alpha3");
    keep(cmd->add_option("--k", s.k, "Per-group beam budget"), "k");
  }
  keep(cmd->add_option("--beam", s.beam, "Beam size"), "beam");
  keep(cmd->add_option("--rho", s.rho, "Pruning ratio in (0, 1]"), "rho");
  keep(cmd->add_option("--max-len", s.max_len, "Maximum generated tokens, end token included"), "max_len");
  keep(cmd->add_option("--min-len", s.min_len, "Minimum generated tokens before the end token"), "min_len");
  keep(cmd->add_option("--length-penalty", s.length_penalty, "Exponent of the length normalisation"),
       "length_penalty");
  cmd->add_option("--bos", s.bos, "Begin-of-sequence token");
  cmd->add_option("--eos", s.eos, "End-of-sequence token");
}

DecodingConfig search_config(const SearchArgs& s, const Parsed& p, const std::string& prefix, const Vocabulary& vocab) {
  DecodingConfig c;
  auto given = [&](const std::string& name) {
    auto it = p.given.find(prefix + name);
    return it != p.given.end() && it->second->count() > 0;
  };
  if (s.preset != "custom") c = preset(s.preset);
  if (s.preset == "custom" || given("beam")) c.beam = s.beam;
  if (s.preset == "custom" || given("alpha1")) c.alpha1 = s.alpha1;
  if (s.preset == "custom" || given("alpha2")) c.alpha2 = s.alpha2;
  if (s.preset == "custom" || given("alpha3")) c.alpha3 = s.alpha3;
  if (s.preset == "custom" || given("rho")) c.rho = s.rho;
  if (s.preset == "custom" || given("k")) c.group_budget = s.k;
  c.max_length = s.max_len;
  c.min_length = s.min_len;
  c.length_penalty = s.length_penalty;
  auto bos = vocab.find(s.bos);
  auto eos = vocab.find(s.eos);
  if (!bos) throw UsageError("--bos token '" + s.bos + "' is not in the vocabulary");
  if (!eos) throw UsageError("--eos token '" + s.eos + "' is not in the vocabulary");
  c.bos = *bos;
  c.eos = *eos;
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!std::filesystem::exists(path)) throw UsageError(std::string(flag) + ": file not found: " + path);
}

std::unique_ptr<Scorer> make_scorer(const ScorerArgs& s, const FactBase& facts, const DecodingConfig& cfg) {
  if (s.kind == "ngram") {
    require_file(s.corpus, "--corpus");
    std::size_t oov = 0;
    const auto sentences = load_corpus(s.corpus, facts.vocab, facts.policy, &oov);
    if (oov > 0) spdlog::info("corpus: {} out-of-vocabulary words skipped", oov);
    NgramOptions o;
    o.order = s.order;
    o.discount = s.discount;
    return std::make_unique<NgramLM>(NgramLM::train(sentences, facts.vocab_size(), cfg.bos, cfg.eos, o));
  }
  if (!s.weights.empty()) {
    require_file(s.weights, "--weights");
    auto m = std::make_unique<TinyTransformer>(TinyTransformer::load(s.weights));
    if (m->vocab_size() != facts.vocab_size()) throw UsageError("--weights vocabulary does not match --factbase");
    return m;
  }
  TransformerConfig tc;
  tc.vocab_size = facts.vocab_size();
  tc.layers = s.layers;
  tc.heads = s.heads;
  tc.d_model = s.d_model;
  tc.d_ff = 4 * s.d_model;
  return std::make_unique<TinyTransformer>(TinyTransformer::random(tc, s.seed));
}

std::string render(std::span<const TokenId> tokens, const FactBase& facts, TokenId eos) {
  std::string text;
  for (TokenId t : tokens) {
    if (t == eos) break;
    if (!text.empty()) text += ' ';
    text += strip_marker(facts.vocab.token(t), facts.policy);
  }
  return text;
}

json pairs(const std::vector<std::pair<TokenId, double>>& v, const FactBase& facts) {
  json a = json::array();
  for (const auto& [t, p] : v) a.push_back(json::array({facts.vocab.token(t), p}));
  return a;
}

json result_line(const TaskInstance& inst, const DecodeResult& r, const FactBase& facts, const DecodingConfig& cfg,
                 bool trace) {
  const Hypothesis& h = r.best();
  json j;
  j["id"] = inst.id;
  j["text"] = render(h.tokens, facts, cfg.eos);
  j["tokens"] = h.tokens;
  j["score"] = h.score;
  j["normalized_score"] = ranking_score(h, cfg.length_penalty);
  j["coverage"] = text_coverage(j["text"].get<std::string>(), inst.concepts);
  j["finished"] = r.finished;
  if (trace) {
    json steps = json::array();
    for (const TraceStep& s : r.trace) {
      steps.push_back({{"step", s.step}, {"hyp", s.hypothesis}, {"before", pairs(s.before, facts)},
                       {"after", pairs(s.after, facts)}});
    }
    j["trace"] = std::move(steps);
  }
  return j;
}

/// Decodes every instance; `logic` false runs the plain beam search.
int run_decode(const DecodeArgs& a, const Parsed& p, const std::string& prefix, bool logic, std::ostream& out) {
  require_file(a.factbase, "--factbase");
  require_file(a.instances, "--instances");
  std::string rules_text;
  if (logic) {
    require_file(a.rules, "--rules");
    std::ostringstream s;
    for (const auto& line : read_lines(a.rules)) s << line << '\n';
    rules_text = s.str();
    parse_program(rules_text);
  }
  const FactBase facts = load_snapshot(a.factbase);
  const DecodingConfig cfg = search_config(a.search, p, prefix, facts.vocab);
  const std::vector<TaskInstance> instances = load_instances(a.instances);
  const std::unique_ptr<Scorer> scorer = make_scorer(a.scorer, facts, cfg);

  auto one = [&](const TaskInstance& inst) -> json {
    try {
      if (!logic) return result_line(inst, baseline_beam_search(*scorer, cfg), facts, cfg, false);
      RuleTemplate t = inst.kind == TaskKind::Lexical
                           ? lexical_rule_template(inst.concepts, facts, rules_text)
                           : dialogue_rule_template(inst.persona, inst.history, facts, rules_text);
      for (const auto& w : t.unaligned) spdlog::info("instance {}: '{}' has no token, skipped", inst.id, w);
      DecodingConfig c = cfg;
      c.trace = a.trace;
      const EvalContext ctx(facts, t.sets);
      return result_line(inst, decode(*scorer, t.program, a.rule, ctx, c), facts, c, a.trace);
    } catch (const std::exception& e) {
      spdlog::warn("instance {} failed: {}", inst.id, e.what());
      return json{{"id", inst.id}, {"error", e.what()}};
    }
  };

  std::vector<json> lines(instances.size());
  const unsigned jobs = std::max(1u, a.jobs);
  std::vector<std::future<void>> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < instances.size(); i += jobs) lines[i] = one(instances[i]);
    }));
  }
  for (auto& f : workers) f.get();

  std::ofstream file;
  std::ostream* sink = &out;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) throw Error("cannot write " + a.out);
    sink = &file;
  }
  for (const json& j : lines) *sink << j.dump() << '\n';
  return kOk;
}

int run_ingest(const IngestArgs& a, std::ostream& out) {
  require_file(a.triples, "--triples");
  require_file(a.vocab, "--vocab");
  if (a.out.empty()) throw UsageError("--out is required");
  IngestOptions o;
  o.mode = a.mode == "hard" ? EdgeMode::Hard : EdgeMode::Soft;
  o.policy.boundary_marker = a.marker;
  if (!a.stop_words.empty()) {
    require_file(a.stop_words, "--stop-words");
    o.stop_words = load_word_list(a.stop_words);
  } else {
    o.stop_words = default_stop_words();
  }
  if (!a.black_words.empty()) {
    require_file(a.black_words, "--black-words");
    o.black_words = load_word_list(a.black_words);
  }
  const Vocabulary vocab = load_vocabulary(a.vocab);
  const IngestResult r = ingest_triple_file(a.triples, vocab, o);
  save_snapshot(a.out, r.facts);
  const IngestReport& rep = r.report;
  json j{{"read", rep.read},           {"kept", rep.kept},
         {"discarded", rep.discarded}, {"filtered", rep.filtered},
         {"malformed", rep.malformed}, {"edges", rep.edge_count},
         {"stem_classes", rep.stem_class_count}};
  out << j.dump() << '\n';
  return kOk;
}

int run_eval(const EvalArgs& a, std::ostream& out) {
  require_file(a.results, "--results");
  require_file(a.instances, "--instances");
  const std::vector<TaskInstance> instances = load_instances(a.instances);
  std::map<std::string, json> by_id;
  std::size_t n = 0;
  for (const std::string& line : read_lines(a.results)) {
    ++n;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(a.results + " line " + std::to_string(n) + ": " + e.what());
    }
    std::string id = j.is_object() ? j.value("id", std::to_string(n)) : std::to_string(n);
    by_id[std::move(id)] = std::move(j);
  }
  std::vector<std::string> outputs;
  double length = 0.0;
  double score = 0.0;
  std::size_t scored = 0;
  std::size_t failed = 0;
  for (const TaskInstance& inst : instances) {
    auto it = by_id.find(inst.id);
    if (it == by_id.end()) throw FormatError("no result for instance " + inst.id);
    const json& j = it->second;
    if (j.contains("error") || !j.contains("text")) {
      ++failed;
      outputs.emplace_back();
      continue;
    }
    outputs.push_back(j["text"].get<std::string>());
    std::istringstream words(outputs.back());
    length += static_cast<double>(std::distance(std::istream_iterator<std::string>(words),
                                                std::istream_iterator<std::string>()));
    score += j.value("score", 0.0);
    ++scored;
  }
  const double coverage = corpus_coverage(outputs, instances);
  const double mean_len = scored > 0 ? length / static_cast<double>(scored) : 0.0;
  const double mean_score = scored > 0 ? score / static_cast<double>(scored) : 0.0;
  out << std::fixed << std::setprecision(2);
  out << "instances     " << instances.size() << '\n';
  out << "failed        " << failed << '\n';
  out << "coverage (%)  " << coverage << '\n';
  out << "mean length   " << mean_len << '\n';
  out << "mean score    " << std::setprecision(4) << mean_score << '\n';
  const json j{{"instances", instances.size()},
               {"failed", failed},
               {"coverage", coverage},
               {"mean_length", mean_len},
               {"mean_score", mean_score}};
  out << j.dump() << '\n';
  if (!a.json_out.empty()) {
    std::ofstream f(a.json_out, std::ios::trunc);
    if (!f) throw Error("cannot write " + a.json_out);
    f << j.dump() << '\n';
  }
  return kOk;
}

int run_serve(const ServeArgs& a, std::ostream& out) {
  require_file(a.factbase, "--factbase");
  require_file(a.rules, "--rules");
  const FactBase facts = load_snapshot(a.factbase);
  const RuleProgram program = load_rule_file(a.rules);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  LogicServer server(facts, program);
  server.bind(a.host, a.port);
  out << "listening on " << a.host << ':' << server.port() << std::endl;
  spdlog::info("serving {} rules over {} tokens", program.rules().size(), facts.vocab_size());
  server.start();
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  return kOk;
}

void build(CLI::App& app, Parsed& p) {
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  auto* ingest = app.add_subcommand("ingest-kg", "Build a fact base snapshot from knowledge-graph triples");
  ingest->add_option("--triples", p.ingest.triples, "TSV triples: head relation tail weight (gzip ok)");
  ingest->add_option("--vocab", p.ingest.vocab, "Vocabulary file, one token per line");
  ingest->add_option("--mode", p.ingest.mode, "Edge weights")->check(CLI::IsMember({"hard", "soft"}));
  ingest->add_option("--out", p.ingest.out, "Snapshot path to write");
  ingest->add_option("--stop-words", p.ingest.stop_words, "Stop-word list; built-in list when absent");
  ingest->add_option("--black-words", p.ingest.black_words, "Black-word list");
  ingest->add_option("--marker", p.ingest.marker, "Word-boundary marker of the vocabulary, e.g. Ġ");

  for (auto [name, args, logic] : {std::tuple{"decode", &p.decode, true}, std::tuple{"baseline-beam", &p.baseline, false}}) {
    auto* cmd = app.add_subcommand(name, logic ? "Rule-guided beam search over task instances"
                                               : "Unconstrained beam search over task instances");
    cmd->add_option("--factbase", args->factbase, "Fact base snapshot from ingest-kg");
    cmd->add_option("--instances", args->instances, "JSONL task instances");
    cmd->add_option("--out", args->out, "Results path; stdout when absent");
    cmd->add_option("--jobs", args->jobs, "Instances decoded in parallel");
    if (logic) {
      cmd->add_option("--rules", args->rules, "Rule file");
      cmd->add_option("--rule", args->rule, "Top rule name");
      cmd->add_flag("--trace", args->trace, "Record top-5 tokens before and after shifting at every step");
    }
    add_scorer_flags(cmd, args->scorer);
    add_search_flags(cmd, args->search, p, std::string(name) + ".", logic);
  }

  auto* eval = app.add_subcommand("eval", "Coverage, length and score of decoding results");
  eval->add_option("--results", p.eval.results, "Results JSONL from decode or baseline-beam");
  eval->add_option("--instances", p.eval.instances, "JSONL task instances");
  eval->add_option("--json", p.eval.json_out, "Also write the metrics JSON here");

  auto* serve = app.add_subcommand("serve", "Serve prove and decide requests as newline-delimited JSON over TCP");
  serve->add_option("--factbase", p.serve.factbase, "Fact base snapshot from ingest-kg");
  serve->add_option("--rules", p.serve.rules, "Rule file");
  serve->add_option("--host", p.serve.host, "Bind address");
  serve->add_option("--port", p.serve.port, "TCP port; 0 picks a free one");
}

}  // namespace

std::string full_help() {
  CLI::App app{"Rule-guided constrained decoding", "logicdec"};
  Parsed p;
  build(app, p);
  std::string text = app.help();
  for (const CLI::App* sub : app.get_subcommands({})) text += "\n" + sub->help();
  return text;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rule-guided constrained decoding", "logicdec"};
  Parsed p;
  build(app, p);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    configure_logging();
    if (app.got_subcommand("ingest-kg")) return run_ingest(p.ingest, out);
    if (app.got_subcommand("decode")) return run_decode(p.decode, p, "decode.", true, out);
    if (app.got_subcommand("baseline-beam")) return run_decode(p.baseline, p, "baseline-beam.", false, out);
    if (app.got_subcommand("eval")) return run_eval(p.eval, out);
    if (app.got_subcommand("serve")) return run_serve(p.serve, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace logicdec::cli
