#include "fixtures.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace logicdec::testing {

namespace {

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

const std::vector<std::string> kSets{"C", "P", "U", "Prefix"};
const std::vector<std::string> kPredicates{"Equal", "Edge", "W"};

struct ProgramGen {
  Rng& rng;
  std::vector<std::size_t> arity;
  int fresh = 0;

  std::string pick(const std::vector<std::string>& scope) { return scope[uniform(rng, 0, scope.size() - 1)]; }

  std::string args(const std::vector<std::string>& scope, std::size_t n) {
    std::string out = "(";
    for (std::size_t i = 0; i < n; ++i) out += (i ? ", " : "") + pick(scope);
    return out + ")";
  }

  std::string leaf(const std::vector<std::string>& scope, std::size_t helpers) {
    if (chance(rng, 0.05)) return chance(rng, 0.5) ? "true" : "false";
    if (helpers > 0 && chance(rng, 0.35)) {
      const std::size_t h = uniform(rng, 0, helpers - 1);
      return "H" + std::to_string(h) + args(scope, arity[h]);
    }
    return kPredicates[uniform(rng, 0, kPredicates.size() - 1)] + args(scope, 2);
  }

  std::string expr(int depth, std::vector<std::string>& scope, std::size_t helpers) {
    if (depth == 0 || chance(rng, 0.3)) return leaf(scope, helpers);
    switch (uniform(rng, 0, 5)) {
      case 0:
        return "~" + expr(depth - 1, scope, helpers);
      case 1:
      case 2: {
        static const char* ops[] = {" | ", " ^ ", " & "};
        const char* op = ops[uniform(rng, 0, 2)];
        const std::size_t n = uniform(rng, 2, 3);
        std::string out = "(";
        for (std::size_t i = 0; i < n; ++i) out += (i ? op : "") + expr(depth - 1, scope, helpers);
        return out + ")";
      }
      default: {
        const std::string var = "v" + std::to_string(fresh++);
        const std::string q = chance(rng, 0.6) ? "exists" : "forall";
        const std::string set = kSets[uniform(rng, 0, kSets.size() - 1)];
        scope.push_back(var);
        std::string body = expr(depth - 1, scope, helpers);
        scope.pop_back();
        return "(" + q + " " + var + " in " + set + ", " + body + ")";
      }
    }
  }
};

}  // namespace

std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(LOGICDEC_TEST_DATA) / name; }

std::filesystem::path rules_path(const std::string& name) {
  return std::filesystem::path(LOGICDEC_SOURCE_DIR) / "rules" / name;
}

std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(LOGICDEC_SOURCE_DIR) / relative;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FactBase toy_facts(EdgeMode mode) {
  IngestOptions options;
  options.mode = mode;
  options.stop_words = default_stop_words();
  return ingest_triple_file(data_path("kg.tsv"), load_vocabulary(data_path("vocab.txt")), options).facts;
}

FactBase make_facts(const std::vector<std::string>& words, const std::vector<std::uint32_t>& classes,
                    const std::vector<AdjacencyMatrix::Entry>& edges, EdgeMode mode) {
  std::map<std::uint32_t, std::uint32_t> dense;
  std::vector<std::uint32_t> class_of;
  for (std::uint32_t c : classes) {
    auto [it, _] = dense.emplace(c, static_cast<std::uint32_t>(dense.size()));
    class_of.push_back(it->second);
  }
  FactBase f;
  f.vocab = Vocabulary(words);
  f.stems = StemIndex(std::move(class_of));
  f.edges = AdjacencyMatrix::from_entries(words.size(), edges);
  f.mode = mode;
  return f;
}

FactBase random_facts(Rng& rng, std::size_t max_vocab, std::size_t max_edges) {
  const std::size_t n = uniform(rng, 2, max_vocab);
  std::vector<std::string> words;
  std::vector<std::uint32_t> classes;
  const std::size_t class_count = uniform(rng, 1, n);
  for (std::size_t i = 0; i < n; ++i) {
    words.push_back("w" + std::to_string(i));
    classes.push_back(static_cast<std::uint32_t>(uniform(rng, 0, class_count - 1)));
  }
  const EdgeMode mode = chance(rng, 0.5) ? EdgeMode::Hard : EdgeMode::Soft;
  std::vector<AdjacencyMatrix::Entry> edges;
  const std::size_t m = uniform(rng, 0, max_edges);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto a = static_cast<TokenId>(uniform(rng, 0, n - 1));
    const auto b = static_cast<TokenId>(uniform(rng, 0, n - 1));
    if (a == b) continue;
    edges.push_back({a, b, mode == EdgeMode::Hard ? 1.0 : weight(rng)});
  }
  return make_facts(words, classes, edges, mode);
}

SetBindings random_sets(Rng& rng, std::size_t vocab_size) {
  SetBindings sets;
  for (const std::string& name : kSets) {
    std::vector<TokenId> ids;
    const std::size_t k = uniform(rng, 1, 5);
    for (std::size_t i = 0; i < k; ++i) ids.push_back(static_cast<TokenId>(uniform(rng, 0, vocab_size - 1)));
    sets[name] = std::move(ids);
  }
  return sets;
}

std::string random_program_text(Rng& rng) {
  ProgramGen gen{rng, {}, 0};
  std::string out;
  const std::size_t helpers = uniform(rng, 0, 3);
  for (std::size_t h = 0; h < helpers; ++h) {
    const std::size_t arity = uniform(rng, 1, 2);
    std::vector<std::string> scope{"a"};
    if (arity == 2) scope.push_back("b");
    out += "H" + std::to_string(h) + (arity == 2 ? "(a, b)" : "(a)") + " :- " + gen.expr(3, scope, h) + "\n";
    gen.arity.push_back(arity);
  }
  std::vector<std::string> scope{"x"};
  out += "R(x) :- " + gen.expr(4, scope, helpers) + "\n";
  return out;
}

RandomCase random_case(Rng& rng) {
  RandomCase c;
  c.facts = random_facts(rng);
  c.source = random_program_text(rng);
  c.program = parse_program(c.source);
  c.sets = random_sets(rng, c.facts.vocab_size());
  std::vector<TokenId> ids;
  const std::size_t k = uniform(rng, 1, 8);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(static_cast<TokenId>(uniform(rng, 0, c.facts.vocab_size() - 1)));
  switch (uniform(rng, 0, 3)) {
    case 0:
      c.domain = Domain::vocabulary();
      break;
    case 1:
      c.domain = Domain::prefix(ids);
      break;
    case 2:
      c.domain = Domain::targets(c.sets.at("C"));
      break;
    default:
      c.domain = Domain::custom(ids);
  }
  return c;
}

std::vector<std::vector<TokenId>> random_corpus(Rng& rng, std::size_t vocab_size, std::size_t sentences,
                                                TokenId first, std::size_t max_length) {
  std::vector<std::vector<TokenId>> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    std::vector<TokenId> sent;
    const std::size_t len = uniform(rng, 1, max_length);
    for (std::size_t i = 0; i < len; ++i) sent.push_back(static_cast<TokenId>(uniform(rng, first, vocab_size - 1)));
    out.push_back(std::move(sent));
  }
  return out;
}

LineClient::LineClient(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) {
    throw std::runtime_error("cannot resolve " + host);
  }
  for (addrinfo* ai = res; ai != nullptr && fd_ < 0; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
    } else {
      ::close(fd);
    }
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port));
}

LineClient::~LineClient() {
  if (fd_ >= 0) ::close(fd_);
}

void LineClient::send_line(const std::string& line) {
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n <= 0) throw std::runtime_error("send failed");
    off += static_cast<std::size_t>(n);
  }
}

std::string LineClient::read_line() {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n <= 0) throw std::runtime_error("connection closed");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace logicdec::testing
