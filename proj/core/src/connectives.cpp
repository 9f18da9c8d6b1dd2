#include "logicdec/connectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logicdec/error.hpp"

namespace logicdec {

TruthVector::TruthVector(std::vector<double> values, DomainKind domain)
    : values_(std::move(values)), domain_(domain) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DimensionError("truth value " + std::to_string(v) + " at index " + std::to_string(i) +
                           " is outside [0, 1]");
    }
  }
}

TruthVector TruthVector::constant(std::size_t size, double value, DomainKind domain) {
  return TruthVector(std::vector<double>(size, value), domain);
}

namespace {

std::size_t common_length(std::span<const TruthVector> children) {
  if (children.empty()) throw DimensionError("connective needs at least one operand");
  const std::size_t n = children.front().size();
  for (const TruthVector& c : children) {
    if (c.size() != n) {
      throw DimensionError("connective operands differ in length: " + std::to_string(n) + " vs " +
                           std::to_string(c.size()));
    }
  }
  return n;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

TruthVector or_vec(std::span<const TruthVector> children) {
  const std::size_t n = common_length(children);
  std::vector<double> out(n, 0.0);
  for (const TruthVector& c : children) {
    for (std::size_t i = 0; i < n; ++i) out[i] += c[i];
  }
  for (double& v : out) v = std::min(1.0, clamp01(v));
  return TruthVector(std::move(out), children.front().domain());
}

TruthVector and_avg_vec(std::span<const TruthVector> children) {
  const std::size_t n = common_length(children);
  std::vector<double> out(n, 0.0);
  for (const TruthVector& c : children) {
    for (std::size_t i = 0; i < n; ++i) out[i] += c[i];
  }
  const double count = static_cast<double>(children.size());
  for (double& v : out) v = clamp01(v / count);
  return TruthVector(std::move(out), children.front().domain());
}

TruthVector and_luk_vec(std::span<const TruthVector> children) {
  const std::size_t n = common_length(children);
  std::vector<double> out(children.front().values().begin(), children.front().values().end());
  for (std::size_t k = 1; k < children.size(); ++k) {
    const TruthVector& c = children[k];
    for (std::size_t i = 0; i < n; ++i) out[i] = std::max(out[i] + c[i] - 1.0, 0.0);
  }
  for (double& v : out) v = clamp01(v);
  return TruthVector(std::move(out), children.front().domain());
}

TruthVector not_vec(const TruthVector& child) {
  std::vector<double> out(child.size());
  for (std::size_t i = 0; i < child.size(); ++i) out[i] = clamp01(1.0 - child[i]);
  return TruthVector(std::move(out), child.domain());
}

}  // namespace logicdec
