#include "logicdec/decision.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logicdec/error.hpp"

namespace logicdec {

namespace {

void check_mass(std::span<const double> p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) {
      throw DimensionError("probability " + std::to_string(p[i]) + " at index " + std::to_string(i) +
                           " is negative or not finite");
    }
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> probs, DomainKind domain) : p_(std::move(probs)), domain_(domain) {
  check_mass(p_);
  double sum = 0.0;
  for (double v : p_) sum += v;
  if (std::abs(sum - 1.0) > 1e-6) throw DimensionError("distribution sums to " + std::to_string(sum));
}

Distribution Distribution::normalized(std::vector<double> weights, DomainKind domain) {
  check_mass(weights);
  double sum = 0.0;
  for (double v : weights) sum += v;
  if (!(sum > 0.0) || !std::isfinite(sum)) throw DimensionError("cannot normalise weights with sum " + std::to_string(sum));
  for (double& v : weights) v /= sum;
  return Distribution(std::move(weights), domain);
}

Distribution Distribution::from_float(std::span<const float> probs, DomainKind domain) {
  return normalized(std::vector<double>(probs.begin(), probs.end()), domain);
}

std::vector<double> pre_activation(std::span<const double> p) {
  std::vector<double> s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) s[i] = p[i] > 0.0 ? std::log(p[i]) : kLogFloor;
  return s;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> boost_weights(std::span<const double> p, const TruthVector& truth, double alpha) {
  if (p.size() != truth.size()) {
    throw DimensionError("distribution has " + std::to_string(p.size()) + " entries but truth vector has " +
                         std::to_string(truth.size()));
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DimensionError("intensity alpha must be a finite value >= 0");
  check_mass(p);
  std::vector<double> w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) w[i] = p[i] * std::exp(alpha * truth[i] * p[i]);
  return w;
}

Distribution decide(const Distribution& p, const TruthVector& truth, double alpha) {
  if (p.size() != truth.size()) {
    throw DimensionError("distribution has " + std::to_string(p.size()) + " entries but truth vector has " +
                         std::to_string(truth.size()));
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DimensionError("intensity alpha must be a finite value >= 0");
  std::vector<double> scores = pre_activation(p.values());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += truth[i] * (alpha * p[i]);
  return Distribution(softmax(scores), p.domain());
}

}  // namespace logicdec
