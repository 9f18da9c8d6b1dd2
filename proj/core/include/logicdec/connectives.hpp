#pragma once

// Soft-logic connectives over truth vectors, applied elementwise:
//
//   or       min(1, p1 + ... + pn)
//   and_avg  (p1 + ... + pn) / n
//   and_luk  left fold of max(a + b - 1, 0)
//   not      1 - p
//
// All results are clamped to [0, 1]. Inputs must share one length.

#include <span>

#include "logicdec/truth.hpp"

namespace logicdec {

TruthVector or_vec(std::span<const TruthVector> children);
TruthVector and_avg_vec(std::span<const TruthVector> children);
TruthVector and_luk_vec(std::span<const TruthVector> children);
TruthVector not_vec(const TruthVector& child);

/// Binary helpers on scalars, exposed for the closed-form checks.
inline double soft_or(double a, double b) { return a + b < 1.0 ? a + b : 1.0; }
inline double soft_and_luk(double a, double b) { return a + b - 1.0 > 0.0 ? a + b - 1.0 : 0.0; }

}  // namespace logicdec
