#include "logicdec/knowledge_base.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "logicdec/error.hpp"
#include "logicdec/io.hpp"
#include "logicdec/stemmer.hpp"

namespace logicdec {

StemIndex::StemIndex(const Vocabulary& vocab, const AlignmentPolicy& policy) {
  std::unordered_map<std::string, std::uint32_t> ids;
  class_of_.resize(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const std::string key = stem_key(strip_marker(vocab.token(static_cast<TokenId>(i)), policy));
    auto [it, inserted] = ids.emplace(key, static_cast<std::uint32_t>(members_.size()));
    if (inserted) members_.emplace_back();
    class_of_[i] = it->second;
    members_[it->second].push_back(static_cast<TokenId>(i));
  }
}

StemIndex::StemIndex(std::vector<std::uint32_t> class_of) : class_of_(std::move(class_of)) {
  std::uint32_t count = 0;
  for (std::uint32_t c : class_of_) count = std::max(count, c + 1);
  members_.resize(count);
  for (std::size_t i = 0; i < class_of_.size(); ++i) members_[class_of_[i]].push_back(static_cast<TokenId>(i));
  for (std::size_t c = 0; c < members_.size(); ++c) {
    if (members_[c].empty()) throw FormatError("stem class " + std::to_string(c) + " has no members");
  }
}

AdjacencyMatrix AdjacencyMatrix::from_entries(std::size_t size, std::span<const Entry> entries) {
  std::map<std::pair<TokenId, TokenId>, double> cells;
  for (const Entry& e : entries) {
    if (e.row >= size || e.col >= size) throw DimensionError("edge endpoint outside the vocabulary");
    if (e.row == e.col) throw DimensionError("self-loop on token " + std::to_string(e.row));
    if (!(e.weight > 0.0 && e.weight <= 1.0)) {
      throw DimensionError("edge weight " + std::to_string(e.weight) + " outside (0, 1]");
    }
    for (auto key : {std::pair{e.col, e.row}, std::pair{e.row, e.col}}) {
      auto [it, inserted] = cells.emplace(key, e.weight);
      if (!inserted) it->second = std::max(it->second, e.weight);
    }
  }
  AdjacencyMatrix m;
  m.col_ptr_.assign(size + 1, 0);
  m.rows_.reserve(cells.size());
  m.weights_.reserve(cells.size());
  // Keys are (col, row), so iteration is already column-major and row-sorted.
  for (const auto& [key, w] : cells) {
    ++m.col_ptr_[key.first + 1];
    m.rows_.push_back(key.second);
    m.weights_.push_back(w);
  }
  for (std::size_t c = 0; c < size; ++c) m.col_ptr_[c + 1] += m.col_ptr_[c];
  return m;
}

AdjacencyMatrix AdjacencyMatrix::from_csc(std::size_t size, std::vector<std::uint64_t> col_ptr,
                                          std::vector<TokenId> rows, std::vector<double> weights) {
  if (col_ptr.size() != size + 1 || col_ptr.front() != 0 || col_ptr.back() != rows.size() ||
      rows.size() != weights.size()) {
    throw FormatError("inconsistent compressed-column arrays");
  }
  for (std::size_t c = 0; c < size; ++c) {
    if (col_ptr[c] > col_ptr[c + 1]) throw FormatError("column pointers are not monotone");
    for (std::uint64_t k = col_ptr[c]; k < col_ptr[c + 1]; ++k) {
      if (rows[k] >= size || rows[k] == c) throw FormatError("bad row index in column " + std::to_string(c));
      if (k > col_ptr[c] && rows[k - 1] >= rows[k]) throw FormatError("unsorted rows in column " + std::to_string(c));
      if (!(weights[k] > 0.0 && weights[k] <= 1.0)) throw FormatError("edge weight outside (0, 1]");
    }
  }
  AdjacencyMatrix m;
  m.col_ptr_ = std::move(col_ptr);
  m.rows_ = std::move(rows);
  m.weights_ = std::move(weights);
  for (std::size_t c = 0; c < size; ++c) {
    auto rs = m.column_rows(static_cast<TokenId>(c));
    auto ws = m.column_weights(static_cast<TokenId>(c));
    for (std::size_t k = 0; k < rs.size(); ++k) {
      if (m.weight(static_cast<TokenId>(c), rs[k]) != ws[k]) throw FormatError("adjacency is not symmetric");
    }
  }
  return m;
}

std::span<const TokenId> AdjacencyMatrix::column_rows(TokenId col) const {
  if (col >= size()) throw DimensionError("column " + std::to_string(col) + " outside the matrix");
  return std::span<const TokenId>(rows_).subspan(col_ptr_[col], col_ptr_[col + 1] - col_ptr_[col]);
}

std::span<const double> AdjacencyMatrix::column_weights(TokenId col) const {
  if (col >= size()) throw DimensionError("column " + std::to_string(col) + " outside the matrix");
  return std::span<const double>(weights_).subspan(col_ptr_[col], col_ptr_[col + 1] - col_ptr_[col]);
}

double AdjacencyMatrix::weight(TokenId row, TokenId col) const {
  auto rs = column_rows(col);
  auto it = std::lower_bound(rs.begin(), rs.end(), row);
  if (it == rs.end() || *it != row) return 0.0;
  return column_weights(col)[static_cast<std::size_t>(it - rs.begin())];
}

TruthVector equal_vector(std::span<const TokenId> domain, TokenId y, const FactBase& facts) {
  if (y >= facts.vocab_size()) throw DimensionError("token id " + std::to_string(y) + " outside the vocabulary");
  const std::uint32_t target = facts.stems.class_of(y);
  std::vector<double> out(domain.size());
  for (std::size_t i = 0; i < domain.size(); ++i) out[i] = facts.stems.class_of(domain[i]) == target ? 1.0 : 0.0;
  return TruthVector(std::move(out));
}

TruthVector edge_vector(const TruthVector& x, TokenId p, const FactBase& facts) {
  if (x.size() != facts.vocab_size()) {
    throw DimensionError("bag-of-words length " + std::to_string(x.size()) + " does not match vocabulary size " +
                         std::to_string(facts.vocab_size()));
  }
  if (p >= facts.vocab_size()) throw DimensionError("token id " + std::to_string(p) + " outside the vocabulary");
  std::vector<double> out(x.size(), 0.0);
  auto rows = facts.edges.column_rows(p);
  auto weights = facts.edges.column_weights(p);
  for (std::size_t k = 0; k < rows.size(); ++k) out[rows[k]] = x[rows[k]] * weights[k];
  return TruthVector(std::move(out), x.domain());
}

double rescale_weight(double raw) { return std::clamp(raw / (raw + 1.0), 0.05, 0.95); }

std::vector<std::string> phrase_words(std::string_view phrase) {
  std::vector<std::string> words;
  std::string current;
  for (char c : phrase) {
    if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

bool parse_triple_line(const std::string& line, Triple& out) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (fields.size() != 4) return false;
  for (const auto& f : fields) {
    if (f.empty()) return false;
  }
  double w = 0.0;
  const auto& wf = fields[3];
  auto [ptr, ec] = std::from_chars(wf.data(), wf.data() + wf.size(), w);
  if (ec != std::errc() || ptr != wf.data() + wf.size() || !std::isfinite(w) || w < 0.0) return false;
  out = Triple{fields[0], fields[1], fields[2], w};
  return true;
}

namespace {

bool excluded(const std::string& word, const IngestOptions& options) {
  const std::string lemma = lemmatize(word);
  for (const auto* list : {&options.stop_words, &options.black_words}) {
    if (list->count(word) != 0 || list->count(lemma) != 0) return true;
  }
  return false;
}

std::vector<std::string> preprocess(const std::string& phrase, const IngestOptions& options) {
  std::vector<std::string> out;
  for (auto& w : phrase_words(to_lower(phrase))) {
    if (!excluded(w, options)) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

std::optional<TokenId> align_with_lemma(std::string_view word, const Vocabulary& vocab,
                                        const AlignmentPolicy& policy) {
  if (auto id = align_word_to_token(word, vocab, policy)) return id;
  const std::string lemma = lemmatize(word);
  if (lemma != word) return align_word_to_token(lemma, vocab, policy);
  return std::nullopt;
}

IngestResult ingest_triples(std::span<const Triple> triples, const Vocabulary& vocab,
                            const IngestOptions& options) {
  IngestResult result;
  FactBase& facts = result.facts;
  facts.vocab = vocab;
  facts.policy = options.policy;
  facts.mode = options.mode;
  facts.stems = StemIndex(vocab, options.policy);

  std::map<std::pair<TokenId, TokenId>, double> base;
  for (const Triple& t : triples) {
    ++result.report.read;
    if (!std::isfinite(t.weight) || t.weight < 0.0) {
      ++result.report.malformed;
      continue;
    }
    const auto heads = preprocess(t.head, options);
    const auto tails = preprocess(t.tail, options);
    if (heads.empty() || tails.empty()) {
      ++result.report.filtered;
      continue;
    }
    const double w = options.mode == EdgeMode::Soft ? rescale_weight(t.weight) : 1.0;
    bool stored = false;
    bool misaligned = false;
    for (const auto& h : heads) {
      const auto hid = align_with_lemma(h, vocab, options.policy);
      for (const auto& tl : tails) {
        const auto tid = align_with_lemma(tl, vocab, options.policy);
        if (!hid || !tid) {
          misaligned = true;
          continue;
        }
        if (facts.stems.same_class(*hid, *tid)) continue;
        const auto key = std::minmax(*hid, *tid);
        auto [it, inserted] = base.emplace(std::pair{key.first, key.second}, w);
        if (!inserted) it->second = std::max(it->second, w);
        stored = true;
      }
    }
    if (stored) {
      ++result.report.kept;
    } else if (misaligned) {
      ++result.report.discarded;
    } else {
      ++result.report.filtered;
    }
  }

  // Morphological extension: every stem-mate of an endpoint inherits the edge.
  std::vector<AdjacencyMatrix::Entry> entries;
  for (const auto& [key, w] : base) {
    for (TokenId a : facts.stems.members(facts.stems.class_of(key.first))) {
      for (TokenId b : facts.stems.members(facts.stems.class_of(key.second))) {
        if (a != b) entries.push_back({a, b, w});
      }
    }
  }
  facts.edges = AdjacencyMatrix::from_entries(vocab.size(), entries);
  result.report.edge_count = facts.edges.edge_count();
  result.report.stem_class_count = facts.stems.class_count();
  return result;
}

IngestResult ingest_triple_file(const std::filesystem::path& path, const Vocabulary& vocab,
                                const IngestOptions& options) {
  std::vector<Triple> triples;
  std::size_t malformed = 0;
  for (const auto& line : read_lines(path)) {
    if (line.empty() || line.front() == '#') continue;
    Triple t;
    if (parse_triple_line(line, t)) {
      triples.push_back(std::move(t));
    } else {
      ++malformed;
    }
  }
  IngestResult result = ingest_triples(triples, vocab, options);
  result.report.read += malformed;
  result.report.malformed += malformed;
  return result;
}

std::set<std::string> load_word_list(const std::filesystem::path& path) {
  std::set<std::string> words;
  for (auto& line : read_lines(path)) {
    std::string w = to_lower(line);
    while (!w.empty() && std::isspace(static_cast<unsigned char>(w.back()))) w.pop_back();
    std::size_t b = 0;
    while (b < w.size() && std::isspace(static_cast<unsigned char>(w[b]))) ++b;
    w = w.substr(b);
    if (w.empty() || w.front() == '#') continue;
    words.insert(std::move(w));
  }
  return words;
}

const std::set<std::string>& default_stop_words() {
  static const std::set<std::string> words{
      "a",      "about",   "above", "after", "again",  "against", "all",    "also",  "am",     "an",
      "and",    "any",     "are",   "as",    "at",     "be",      "because", "been", "before", "being",
      "below",  "between", "both",  "but",   "by",     "can",     "could",  "did",   "do",     "does",
      "doing",  "down",    "during", "each", "few",    "for",     "from",   "further", "had",  "has",
      "have",   "having",  "he",    "her",   "here",   "hers",    "herself", "him",  "himself", "his",
      "how",    "i",       "if",    "in",    "into",   "is",      "it",     "its",   "itself", "just",
      "me",     "more",    "most",  "my",    "myself", "no",      "nor",    "not",   "now",    "of",
      "off",    "on",      "once",  "only",  "or",     "other",   "our",    "ours",  "ourselves", "out",
      "over",   "own",     "same",  "she",   "should", "so",      "some",   "such",  "than",   "that",
      "the",    "their",   "theirs", "them", "themselves", "then", "there", "these", "they",  "this",
      "those",  "through", "to",    "too",   "under",  "until",   "up",     "very",  "was",    "we",
      "were",   "what",    "when",  "where", "which",  "while",   "who",    "whom",  "why",    "will",
      "with",   "would",   "you",   "your",  "yours",  "yourself", "yourselves", "im", "dont", "really",
      "s",      "t",       "m",     "ll",    "ve",     "re",      "d",
  };
  return words;
}

namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }

  template <typename T>
  void le(T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      const char c = static_cast<char>((u >> (8 * i)) & 0xFF);
      out_.put(c);
    }
  }

  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

  void str(const std::string& s) {
    le(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("truncated snapshot");
  }

  template <typename T>
  T le() {
    using U = std::make_unsigned_t<T>;
    unsigned char buf[sizeof(T)];
    bytes(buf, sizeof(T));
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(static_cast<U>(buf[i]) << (8 * i));
    return static_cast<T>(u);
  }

  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

  std::string str(std::size_t limit) {
    const auto n = le<std::uint32_t>();
    if (n > limit) throw FormatError("string length " + std::to_string(n) + " exceeds limit");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::istream& in_;
};

constexpr char kSnapshotMagic[4] = {'L', 'D', 'F', 'B'};
constexpr std::uint32_t kSnapshotVersion = 1;

}  // namespace

void write_snapshot(std::ostream& out, const FactBase& facts) {
  Writer w(out);
  w.bytes(kSnapshotMagic, 4);
  w.le(kSnapshotVersion);
  w.le(static_cast<std::uint32_t>(facts.mode));
  w.le(static_cast<std::uint32_t>(facts.vocab.size()));
  for (const auto& t : facts.vocab.tokens()) w.str(t);
  w.str(facts.policy.boundary_marker);
  w.le(static_cast<std::uint32_t>(facts.stems.class_count()));
  for (std::uint32_t c : facts.stems.assignment()) w.le(c);
  w.le(static_cast<std::uint64_t>(facts.edges.nnz()));
  for (std::uint64_t p : facts.edges.col_ptr()) w.le(p);
  for (TokenId r : facts.edges.rows()) w.le(r);
  for (double x : facts.edges.weights()) w.f64(x);
  if (!out) throw Error("failed writing snapshot");
}

FactBase read_snapshot(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (!std::equal(magic, magic + 4, kSnapshotMagic)) throw FormatError("not a fact-base snapshot (bad magic)");
  const auto version = r.le<std::uint32_t>();
  if (version != kSnapshotVersion) throw FormatError("unsupported snapshot version " + std::to_string(version));
  const auto mode = r.le<std::uint32_t>();
  if (mode > 1) throw FormatError("unknown edge mode " + std::to_string(mode));
  const auto n = r.le<std::uint32_t>();
  std::vector<std::string> tokens;
  tokens.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) tokens.push_back(r.str(1 << 20));

  FactBase facts;
  facts.mode = static_cast<EdgeMode>(mode);
  facts.vocab = Vocabulary(std::move(tokens));
  facts.policy.boundary_marker = r.str(64);
  const auto classes = r.le<std::uint32_t>();
  std::vector<std::uint32_t> class_of(n);
  for (auto& c : class_of) {
    c = r.le<std::uint32_t>();
    if (c >= classes) throw FormatError("stem class id out of range");
  }
  facts.stems = StemIndex(std::move(class_of));
  if (facts.stems.class_count() != classes) throw FormatError("stem class count mismatch");
  const auto nnz = r.le<std::uint64_t>();
  if (nnz > static_cast<std::uint64_t>(n) * n) throw FormatError("edge count exceeds |V|^2");
  std::vector<std::uint64_t> col_ptr(static_cast<std::size_t>(n) + 1);
  for (auto& p : col_ptr) p = r.le<std::uint64_t>();
  std::vector<TokenId> rows(nnz);
  for (auto& x : rows) x = r.le<std::uint32_t>();
  std::vector<double> weights(nnz);
  for (auto& x : weights) x = r.f64();
  facts.edges = AdjacencyMatrix::from_csc(n, std::move(col_ptr), std::move(rows), std::move(weights));
  return facts;
}

void save_snapshot(const std::filesystem::path& path, const FactBase& facts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write snapshot " + path.string());
  write_snapshot(out, facts);
}

FactBase load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

}  // namespace logicdec
