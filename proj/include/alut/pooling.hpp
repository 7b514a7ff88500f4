/* Copyright (c) 2026 The alut Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alut/error.hpp"
#include "alut/lut.hpp"
#include "alut/orientation.hpp"

namespace alut {

enum class PoolingKind { kAverage, kGmp, kOap };
enum class Norm { kL1, kL2 };

inline std::string to_string(PoolingKind kind) {
  switch (kind) {
    case PoolingKind::kAverage: return "avg";
    case PoolingKind::kGmp: return "gmp";
    case PoolingKind::kOap: return "oap";
  }
  return "?";
}

inline PoolingKind parse_pooling(const std::string& s) {
  if (s == "avg" || s == "average") return PoolingKind::kAverage;
  if (s == "gmp") return PoolingKind::kGmp;
  if (s == "oap") return PoolingKind::kOap;
  throw DomainError("unknown pooling '" + s + "' (expected avg, gmp or oap)");
}

inline Norm parse_norm(const std::string& s) {
  if (s == "l1" || s == "L1") return Norm::kL1;
  if (s == "l2" || s == "L2") return Norm::kL2;
  throw DomainError("unknown norm '" + s + "' (expected l1 or l2)");
}

struct PoolingSpec {
  PoolingKind kind = PoolingKind::kAverage;
  double tau = 1.0;
  Norm norm = Norm::kL2;
  bool tau_trainable = false;
  // Coefficient table for OAP: m == k logits (real) or weights (integer).
  std::shared_ptr<const Lut> coeff_lut;

  void validate(int k) const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("GMP temperature must be positive and finite");
    if (kind == PoolingKind::kOap) {
      if (!coeff_lut) throw ShapeError("OAP pooling requires a coefficient table");
      if (coeff_lut->m() != k) {
        throw ShapeError("coefficient table has " + std::to_string(coeff_lut->m()) + " outputs, expected k=" +
                         std::to_string(k));
      }
    }
  }
};

struct FusionResult {
  std::vector<double> output;
  std::vector<double> weights;
};

// out = sum_i weights[i] * xs[i], accumulated in orientation order. Every
// fuser goes through here so equal weights give bitwise-equal outputs.
inline void weighted_sum(const Predictions& xs, std::span<const double> weights, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < xs.k(); ++i) {
    const auto x = xs.row(i);
    for (int ch = 0; ch < xs.m(); ++ch) out[ch] += weights[i] * x[ch];
  }
}

inline FusionResult fuse_with_weights(const Predictions& xs, std::vector<double> weights) {
  FusionResult res;
  res.weights = std::move(weights);
  res.output.assign(static_cast<std::size_t>(xs.m()), 0.0);
  weighted_sum(xs, res.weights, res.output);
  return res;
}

// In-place softmax with max subtraction.
inline void softmax(std::span<double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

inline void check_predictions(const Predictions& xs) {
  if (xs.k() < 1 || xs.m() < 1) throw ShapeError("fusion needs at least one non-empty prediction");
}

inline void uniform_weights(int k, std::span<double> w) { std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(k)); }

inline FusionResult fuse_average(const Predictions& xs) {
  check_predictions(xs);
  std::vector<double> w(static_cast<std::size_t>(xs.k()));
  uniform_weights(xs.k(), w);
  return fuse_with_weights(xs, std::move(w));
}

// Channel-wise mean of the predictions.
inline void prediction_mean(const Predictions& xs, std::span<double> mean) {
  std::fill(mean.begin(), mean.end(), 0.0);
  for (int i = 0; i < xs.k(); ++i) {
    const auto x = xs.row(i);
    for (int ch = 0; ch < xs.m(); ++ch) mean[ch] += x[ch];
  }
  for (double& v : mean) v /= static_cast<double>(xs.k());
}

// Distance of each prediction from the cross-orientation mean, summed over
// channels (L1) or Euclidean over channels (L2).
inline void consensus_distances(const Predictions& xs, Norm norm, std::span<double> d) {
  std::vector<double> mean(static_cast<std::size_t>(xs.m()));
  prediction_mean(xs, mean);
  for (int i = 0; i < xs.k(); ++i) {
    const auto x = xs.row(i);
    double acc = 0.0;
    for (int ch = 0; ch < xs.m(); ++ch) {
      const double u = x[ch] - mean[ch];
      acc += norm == Norm::kL1 ? std::abs(u) : u * u;
    }
    d[i] = norm == Norm::kL1 ? acc : std::sqrt(acc);
  }
}

// Softmin of distance/tau: weights decay with distance from the consensus.
inline void gmp_weights(const Predictions& xs, double tau, Norm norm, std::span<double> w) {
  consensus_distances(xs, norm, w);
  for (double& v : w) v = -v / tau;
  softmax(w);
}

inline FusionResult fuse_gmp(const Predictions& xs, double tau, Norm norm = Norm::kL2) {
  check_predictions(xs);
  if (!(tau > 0.0)) throw DomainError("GMP temperature must be positive");
  for (double v : xs.data()) {
    if (!std::isfinite(v)) throw NumericError("non-finite prediction passed to GMP");
  }
  std::vector<double> w(static_cast<std::size_t>(xs.k()));
  gmp_weights(xs, tau, norm, w);
  return fuse_with_weights(xs, std::move(w));
}

// Orientation weights predicted by a coefficient table at `patch`. A real
// table holds logits and is normalized by softmax; an integer (exported)
// table holds non-negative weights normalized by their sum, falling back to
// uniform when they sum to zero.
inline void coefficient_weights(const Lut& coeff, std::span<const double> patch, std::span<double> w) {
  query(coeff, patch, w);
  if (coeff.is_real()) {
    softmax(w);
    return;
  }
  double sum = 0.0;
  for (double v : w) sum += v;
  if (sum <= 0.0) {
    uniform_weights(static_cast<int>(w.size()), w);
    return;
  }
  for (double& v : w) v /= sum;
}

inline FusionResult fuse_oap(const Predictions& xs, std::span<const double> patch, const Lut& coeff) {
  check_predictions(xs);
  if (coeff.m() != xs.k()) throw ShapeError("coefficient table outputs do not match orientation count");
  std::vector<double> w(static_cast<std::size_t>(xs.k()));
  coefficient_weights(coeff, patch, w);
  return fuse_with_weights(xs, std::move(w));
}

inline bool simplex_project_check(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= -1e-9)) return false;
    sum += w;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

}  // namespace alut
