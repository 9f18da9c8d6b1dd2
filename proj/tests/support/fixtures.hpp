#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "logicdec/knowledge_base.hpp"
#include "logicdec/prover.hpp"
#include "logicdec/rule_dsl.hpp"

namespace logicdec::testing {

std::filesystem::path data_path(const std::string& name);
std::filesystem::path rules_path(const std::string& name);
std::filesystem::path source_path(const std::string& relative);
std::string slurp(const std::filesystem::path& path);

/// vocab.txt plus kg.tsv ingested with the default stop list.
FactBase toy_facts(EdgeMode mode = EdgeMode::Soft);

/// Fact base over the given words with explicit stem classes (one class id
/// per word, any labels) and undirected edges.
FactBase make_facts(const std::vector<std::string>& words, const std::vector<std::uint32_t>& classes,
                    const std::vector<AdjacencyMatrix::Entry>& edges, EdgeMode mode = EdgeMode::Hard);

using Rng = std::mt19937_64;

/// Random vocabulary of 2..max_vocab tokens, random stem classes and up to
/// max_edges edges; hard or soft at random.
FactBase random_facts(Rng& rng, std::size_t max_vocab = 64, std::size_t max_edges = 128);

/// Nonempty random bindings for C, P, U and Prefix.
SetBindings random_sets(Rng& rng, std::size_t vocab_size);

/// Random rule text: helper rules H0.. referencing only earlier helpers and
/// a one-parameter top rule R.
std::string random_program_text(Rng& rng);

struct RandomCase {
  FactBase facts;
  std::string source;
  RuleProgram program;
  SetBindings sets;
  Domain domain;
};

RandomCase random_case(Rng& rng);

/// Sentences of random length over ids [first, vocab_size).
std::vector<std::vector<TokenId>> random_corpus(Rng& rng, std::size_t vocab_size, std::size_t sentences,
                                                TokenId first = 2, std::size_t max_length = 8);

/// Blocking newline-delimited client for the logic service.
class LineClient {
 public:
  LineClient(const std::string& host, std::uint16_t port);
  ~LineClient();
  LineClient(const LineClient&) = delete;
  LineClient& operator=(const LineClient&) = delete;

  void send_line(const std::string& line);
  /// Next reply line; throws on a closed connection.
  std::string read_line();
  std::string request(const std::string& line) {
    send_line(line);
    return read_line();
  }

 private:
  int fd_ = -1;
  std::string buffer_;
};

}  // namespace logicdec::testing
