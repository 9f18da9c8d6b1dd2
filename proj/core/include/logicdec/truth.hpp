#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace logicdec {

/// What a truth vector or distribution ranges over.
enum class DomainKind { Vocabulary, PrefixPositions, TargetWords, Custom };

/// Soft truth values in [0, 1], one per domain element.
class TruthVector {
 public:
  TruthVector() = default;
  /// Throws DimensionError if any value is outside [0, 1] or NaN.
  explicit TruthVector(std::vector<double> values, DomainKind domain = DomainKind::Custom);

  static TruthVector constant(std::size_t size, double value, DomainKind domain = DomainKind::Custom);
  static TruthVector zeros(std::size_t size, DomainKind domain = DomainKind::Custom) {
    return constant(size, 0.0, domain);
  }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  DomainKind domain() const { return domain_; }
  void set_domain(DomainKind d) { domain_ = d; }

  bool operator==(const TruthVector& other) const { return values_ == other.values_; }

 private:
  std::vector<double> values_;
  DomainKind domain_ = DomainKind::Custom;
};

}  // namespace logicdec
