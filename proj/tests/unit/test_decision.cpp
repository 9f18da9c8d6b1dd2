#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "logicdec/decision.hpp"
#include "logicdec/error.hpp"

using namespace logicdec;

namespace {

Distribution random_distribution(logicdec::testing::Rng& rng, std::size_t n, double zero_rate = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  for (double& x : w) x = u(rng) < zero_rate ? 0.0 : u(rng) + 1e-3;
  w[0] = u(rng) + 1e-3;
  return Distribution::normalized(std::move(w));
}

TruthVector random_truth(logicdec::testing::Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t(n);
  for (double& x : t) x = u(rng);
  return TruthVector(std::move(t));
}

}  // namespace

TEST_CASE("closed-form example") {
  const Distribution out = decide(Distribution({0.5, 0.5}), TruthVector(std::vector<double>{1, 0}), 2.0);
  const double e = std::exp(1.0);
  CHECK(out[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));
  CHECK(std::abs(out[0] - 0.7311) <= 1e-4);
  CHECK(std::abs(out[1] - 0.2689) <= 1e-4);
}

TEST_CASE("pre-activation") {
  CHECK(pre_activation(std::vector<double>{1.0}) == std::vector<double>{0.0});
  const std::vector<double> p{0.25, 0.75};
  const auto back = softmax(pre_activation(p));
  CHECK(std::abs(back[0] - 0.25) <= 1e-9);
  CHECK(std::abs(back[1] - 0.75) <= 1e-9);
  const auto floored = pre_activation(std::vector<double>{0.0, 1.0});
  CHECK(floored[0] == kLogFloor);
  for (double alpha : {0.0, 1.0, 50.0}) {
    for (double t : {0.0, 0.5, 1.0}) {
      const Distribution out = decide(Distribution({0.0, 1.0}), TruthVector(std::vector<double>{t, 1.0 - t}), alpha);
      CHECK(out[0] == 0.0);
      CHECK(out[1] == 1.0);
    }
  }
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(decide(Distribution({0.5, 0.5}), TruthVector(std::vector<double>{1}), 1.0), DimensionError);
  CHECK_THROWS_AS(decide(Distribution({0.5, 0.5}), TruthVector(std::vector<double>{1, 0}), -1.0), DimensionError);
  CHECK_THROWS_AS(Distribution({-0.5, 1.5}), DimensionError);
  CHECK_THROWS_AS(Distribution({0.5, 0.6}), DimensionError);
  CHECK_THROWS_AS(Distribution::normalized({0.0, 0.0}), DimensionError);
}

TEST_CASE("identity with zero truth or zero intensity") {
  logicdec::testing::Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 50;
    const Distribution p = random_distribution(rng, n, 0.2);
    const Distribution a = decide(p, TruthVector::zeros(n), 24.0);
    const Distribution b = decide(p, random_truth(rng, n), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a[i] - p[i]) <= 1e-9);
      CHECK(std::abs(b[i] - p[i]) <= 1e-9);
    }
  }
}

TEST_CASE("normalisation, zero preservation and boost ordering") {
  logicdec::testing::Rng rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 40;
    const Distribution p = random_distribution(rng, n, 0.2);
    const TruthVector t = random_truth(rng, n);
    const double alpha = 48.0 * u(rng);
    const Distribution out = decide(p, t, alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += out[i];
      if (p[i] == 0.0) CHECK(out[i] == 0.0);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-6);

    // Two entries with equal mass and different truth.
    std::vector<double> w(n);
    for (double& x : w) x = u(rng) + 1e-3;
    w[1] = w[0];
    const Distribution q = Distribution::normalized(w);
    std::vector<double> tv(n);
    for (double& x : tv) x = u(rng);
    tv[0] = std::min(1.0, tv[1] + 0.01 + 0.5 * u(rng));
    const Distribution shifted = decide(q, TruthVector(tv), 1.0 + alpha);
    CHECK(shifted[0] > shifted[1]);
  }
}

TEST_CASE("boost grows with the original probability") {
  logicdec::testing::Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = 1.0 + 30.0 * u(rng);
    const std::size_t n = 6;
    double prev_ratio = 0.0;
    // Same rest-of-vocabulary shape, increasing P_w.
    std::vector<double> rest(n - 1);
    for (double& x : rest) x = u(rng) + 0.05;
    for (double pw : {0.05, 0.1, 0.2, 0.4, 0.6, 0.8}) {
      std::vector<double> w = rest;
      const double rest_sum = [&] {
        double s = 0.0;
        for (double x : rest) s += x;
        return s;
      }();
      for (double& x : w) x *= (1.0 - pw) / rest_sum;
      w.insert(w.begin(), pw);
      std::vector<double> t(n, 0.0);
      t[0] = 1.0;
      const Distribution p(w);
      const Distribution out = decide(p, TruthVector(t), alpha);
      // Odds of w relative to the unshifted odds; equals exp(alpha * P_w).
      double out_rest = 0.0;
      for (std::size_t i = 1; i < n; ++i) out_rest += out[i];
      const double ratio = (out[0] / out_rest) / (p[0] / (1.0 - p[0]));
      CHECK(ratio == doctest::Approx(std::exp(alpha * pw)).epsilon(1e-9));
      CHECK(out[0] > p[0]);
      CHECK(ratio >= prev_ratio);
      prev_ratio = ratio;
    }
  }
  const std::vector<double> b = boost_weights(std::vector<double>{0.2, 0.4}, TruthVector(std::vector<double>{1, 1}), 2.0);
  CHECK(b[0] == doctest::Approx(0.2 * std::exp(0.4)));
  CHECK(b[1] == doctest::Approx(0.4 * std::exp(0.8)));
}

TEST_CASE("deterministic") {
  logicdec::testing::Rng rng(4);
  const Distribution p = random_distribution(rng, 100);
  const TruthVector t = random_truth(rng, 100);
  const Distribution a = decide(p, t, 12.0);
  const Distribution b = decide(p, t, 12.0);
  for (std::size_t i = 0; i < 100; ++i) CHECK(a[i] == b[i]);
}
