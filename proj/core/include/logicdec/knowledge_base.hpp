#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "logicdec/truth.hpp"
#include "logicdec/types.hpp"
#include "logicdec/vocabulary.hpp"

namespace logicdec {

/// Partition of the vocabulary into stem classes. Two tokens are Equal iff
/// they share a class.
class StemIndex {
 public:
  StemIndex() = default;
  /// Groups tokens by stem_key of their marker-stripped surface form.
  StemIndex(const Vocabulary& vocab, const AlignmentPolicy& policy);
  /// Takes an explicit class assignment; class ids must be dense.
  explicit StemIndex(std::vector<std::uint32_t> class_of);

  std::size_t vocab_size() const { return class_of_.size(); }
  std::size_t class_count() const { return members_.size(); }
  std::uint32_t class_of(TokenId id) const { return class_of_.at(id); }
  std::span<const TokenId> members(std::uint32_t cls) const { return members_.at(cls); }
  bool same_class(TokenId a, TokenId b) const { return class_of_.at(a) == class_of_.at(b); }
  const std::vector<std::uint32_t>& assignment() const { return class_of_; }

  bool operator==(const StemIndex& other) const { return class_of_ == other.class_of_; }

 private:
  std::vector<std::uint32_t> class_of_;
  std::vector<std::vector<TokenId>> members_;
};

/// Symmetric sparse |V| x |V| weight matrix in compressed-column form. Row
/// indices within each column are strictly increasing; the diagonal is never
/// stored.
class AdjacencyMatrix {
 public:
  struct Entry {
    TokenId row;
    TokenId col;
    double weight;
  };

  AdjacencyMatrix() = default;
  /// Builds from undirected entries; both orientations are stored. Repeated
  /// pairs keep the largest weight. Throws on self-loops, ids >= size or
  /// weights outside (0, 1].
  static AdjacencyMatrix from_entries(std::size_t size, std::span<const Entry> entries);
  static AdjacencyMatrix from_csc(std::size_t size, std::vector<std::uint64_t> col_ptr,
                                  std::vector<TokenId> rows, std::vector<double> weights);

  std::size_t size() const { return col_ptr_.empty() ? 0 : col_ptr_.size() - 1; }
  /// Number of stored (directed) entries.
  std::size_t nnz() const { return rows_.size(); }
  std::size_t edge_count() const { return rows_.size() / 2; }

  double weight(TokenId row, TokenId col) const;
  std::span<const TokenId> column_rows(TokenId col) const;
  std::span<const double> column_weights(TokenId col) const;

  const std::vector<std::uint64_t>& col_ptr() const { return col_ptr_; }
  const std::vector<TokenId>& rows() const { return rows_; }
  const std::vector<double>& weights() const { return weights_; }

  bool operator==(const AdjacencyMatrix& other) const {
    return col_ptr_ == other.col_ptr_ && rows_ == other.rows_ && weights_ == other.weights_;
  }

 private:
  std::vector<std::uint64_t> col_ptr_;
  std::vector<TokenId> rows_;
  std::vector<double> weights_;
};

enum class EdgeMode : std::uint32_t { Hard = 0, Soft = 1 };

/// Everything the prover needs to ground Equal, Edge and W.
struct FactBase {
  Vocabulary vocab;
  AlignmentPolicy policy;
  StemIndex stems;
  AdjacencyMatrix edges;
  EdgeMode mode = EdgeMode::Hard;

  std::size_t vocab_size() const { return vocab.size(); }
  bool operator==(const FactBase& other) const = default;
};

/// Entry i is 1 iff domain[i] shares a stem class with y.
TruthVector equal_vector(std::span<const TokenId> domain, TokenId y, const FactBase& facts);

/// X elementwise-times column p of the adjacency matrix; X ranges over the
/// vocabulary.
TruthVector edge_vector(const TruthVector& x, TokenId p, const FactBase& facts);

/// align_word_to_token, retried with the lemma of `word` on failure.
std::optional<TokenId> align_with_lemma(std::string_view word, const Vocabulary& vocab,
                                        const AlignmentPolicy& policy);

/// Soft-mode weight convention: raw / (raw + 1), clamped to [0.05, 0.95].
double rescale_weight(double raw);

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;
  double weight = 1.0;
};

struct IngestOptions {
  EdgeMode mode = EdgeMode::Hard;
  AlignmentPolicy policy;
  std::set<std::string> stop_words;
  std::set<std::string> black_words;
};

struct IngestReport {
  std::size_t read = 0;
  std::size_t kept = 0;
  /// At least one side failed to align to a token.
  std::size_t discarded = 0;
  /// Nothing left after stop/black-word filtering.
  std::size_t filtered = 0;
  std::size_t malformed = 0;
  std::size_t edge_count = 0;
  std::size_t stem_class_count = 0;
};

struct IngestResult {
  FactBase facts;
  IngestReport report;
};

IngestResult ingest_triples(std::span<const Triple> triples, const Vocabulary& vocab,
                            const IngestOptions& options);

/// Reads tab-separated `head relation tail weight` lines; gzip input is
/// detected transparently. Malformed lines are counted and skipped.
IngestResult ingest_triple_file(const std::filesystem::path& path, const Vocabulary& vocab,
                                const IngestOptions& options);

/// Parses one TSV record; returns false for malformed lines.
bool parse_triple_line(const std::string& line, Triple& out);

/// Splits a concept phrase on whitespace and underscores.
std::vector<std::string> phrase_words(std::string_view phrase);

/// One word per line, lower-cased; `#` lines and blanks ignored.
std::set<std::string> load_word_list(const std::filesystem::path& path);

/// Small built-in English stop-word list.
const std::set<std::string>& default_stop_words();

/// Snapshot layout (little-endian):
///   "LDFB" u32 version=1 u32 mode
///   u32 |V|, then |V| x (u32 length, bytes)      vocabulary
///   u32 marker length, bytes                      boundary marker
///   u32 class count, |V| x u32                    stem class per token
///   u64 nnz, (|V|+1) x u64 col_ptr, nnz x u32 rows, nnz x f64 weights
void write_snapshot(std::ostream& out, const FactBase& facts);
FactBase read_snapshot(std::istream& in);
void save_snapshot(const std::filesystem::path& path, const FactBase& facts);
FactBase load_snapshot(const std::filesystem::path& path);

}  // namespace logicdec
