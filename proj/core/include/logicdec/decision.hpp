#pragma once

#include <span>
#include <vector>

#include "logicdec/truth.hpp"

namespace logicdec {

/// Score assigned to zero-probability entries instead of -inf.
inline constexpr double kLogFloor = -1e30;

/// Nonnegative weights summing to one (within 1e-6).
class Distribution {
 public:
  Distribution() = default;
  /// Throws DimensionError on negative or non-finite mass, or a sum that is
  /// not 1 within 1e-6.
  explicit Distribution(std::vector<double> probs, DomainKind domain = DomainKind::Custom);
  /// Rescales nonnegative weights to sum to one.
  static Distribution normalized(std::vector<double> weights, DomainKind domain = DomainKind::Custom);
  static Distribution from_float(std::span<const float> probs, DomainKind domain = DomainKind::Custom);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> values() const { return p_; }
  DomainKind domain() const { return domain_; }

 private:
  std::vector<double> p_;
  DomainKind domain_ = DomainKind::Custom;
};

/// Natural log of each entry; zeros map to kLogFloor.
std::vector<double> pre_activation(std::span<const double> p);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);

/// Unnormalised shifted weights p_i * exp(alpha * truth_i * p_i). Inputs need
/// not sum to one, which lets callers shift one segment of a larger row.
std::vector<double> boost_weights(std::span<const double> p, const TruthVector& truth, double alpha);

/// softmax(log P + I * (alpha * P)): moves mass toward entries whose truth
/// value is high, in proportion to their existing probability.
Distribution decide(const Distribution& p, const TruthVector& truth, double alpha);

}  // namespace logicdec
