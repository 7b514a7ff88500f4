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
#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alut/error.hpp"
#include "alut/image.hpp"
#include "alut/lut.hpp"
#include "alut/orientation.hpp"
#include "alut/pooling.hpp"
#include "alut/resample.hpp"

namespace alut {

enum class Task { kSuperResolution, kRestore };

// One cascade stage: a table per kernel pattern, in pattern order.
struct Stage {
  std::vector<std::shared_ptr<const Lut>> luts;
};

struct PipelineConfig {
  Task task = Task::kRestore;
  int scale = 1;
  std::vector<KernelPattern> patterns = {square_pattern()};
  OrientationSet orientations;
  PoolingSpec pooling;
  bool residual = false;
  std::vector<Stage> stages;
  // Reuse the stage-1 OAP weights at every later stage instead of querying
  // the coefficient table again on each stage's input.
  bool share_oap_across_stages = true;
  // Unrotated patch the coefficient table reads at each anchor.
  KernelPattern coeff_pattern = square_pattern();
  // Replicate padding; negative means the largest pattern reach.
  int padding = -1;

  int pad_width() const {
    if (padding >= 0) return padding;
    int reach = coeff_pattern.reach();
    for (const auto& p : patterns) reach = std::max(reach, p.reach());
    return reach;
  }

  int stage_outputs(std::size_t stage) const {
    if (task == Task::kSuperResolution && stage + 1 == stages.size()) return scale * scale;
    return 1;
  }

  void validate() const {
    if (patterns.empty()) throw ShapeError("pipeline has no kernel patterns");
    for (const auto& p : patterns) p.validate();
    coeff_pattern.validate();
    orientations.validate();
    pooling.validate(orientations.k());
    if (task == Task::kSuperResolution && (scale < 2 || scale > 8)) {
      throw DomainError("super-resolution scale must be in [2,8]");
    }
    if (task == Task::kRestore && scale != 1) throw DomainError("restoration tasks run at scale 1");
    if (stages.empty()) throw ShapeError("pipeline has no stages");
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const auto& st = stages[s];
      if (st.luts.size() != patterns.size()) {
        throw ShapeError("stage " + std::to_string(s + 1) + " has " + std::to_string(st.luts.size()) +
                         " tables for " + std::to_string(patterns.size()) + " patterns");
      }
      for (std::size_t p = 0; p < st.luts.size(); ++p) {
        const auto& lut = st.luts[p];
        if (!lut) throw ShapeError("stage " + std::to_string(s + 1) + " has a missing table");
        if (lut->n() != patterns[p].size()) {
          throw ShapeError("stage " + std::to_string(s + 1) + " table " + std::to_string(p + 1) + " has n=" +
                           std::to_string(lut->n()) + " but pattern '" + patterns[p].name + "' has " +
                           std::to_string(patterns[p].size()) + " offsets");
        }
        if (lut->m() != stage_outputs(s)) {
          throw ShapeError("stage " + std::to_string(s + 1) + " table has m=" + std::to_string(lut->m()) +
                           ", expected " + std::to_string(stage_outputs(s)));
        }
      }
    }
    if (pooling.kind == PoolingKind::kOap && pooling.coeff_lut->n() != coeff_pattern.size()) {
      throw ShapeError("coefficient table n does not match the coefficient pattern");
    }
  }
};

struct QueryCounter {
  std::uint64_t anchors = 0;
  std::uint64_t lut_queries = 0;
  std::uint64_t coeff_queries = 0;
};

struct QueryCost {
  std::uint64_t lut_queries_per_pixel = 0;
  std::uint64_t coeff_queries_per_pixel = 0;
  friend bool operator==(const QueryCost&, const QueryCost&) = default;
};

// Table lookups per input pixel: k * stages * patterns restoration queries,
// plus one coefficient query per pixel (per stage when weights are not
// shared) under OAP.
inline QueryCost query_cost_model(const PipelineConfig& config) {
  QueryCost cost;
  const auto stages = static_cast<std::uint64_t>(config.stages.size());
  cost.lut_queries_per_pixel = static_cast<std::uint64_t>(config.orientations.k()) * stages *
                               static_cast<std::uint64_t>(config.patterns.size());
  if (config.pooling.kind == PoolingKind::kOap) cost.coeff_queries_per_pixel = config.share_oap_across_stages ? 1 : stages;
  return cost;
}

// base + residual, clamped to [0,255].
inline double apply_residual(double base, double residual) { return std::clamp(base + residual, 0.0, 255.0); }

inline Image apply_residual(const Image& base, const Image& residual) {
  if (base.width() != residual.width() || base.height() != residual.height()) {
    throw ShapeError("residual and baseline differ in size");
  }
  Image out = base;
  auto o = out.pixels();
  const auto r = residual.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = apply_residual(o[i], r[i]);
  return out;
}

// Residual baseline of a stage: bicubic upsample when the stage upscales,
// the stage input otherwise.
inline Image residual_baseline(const Image& input, int outputs_per_anchor) {
  const int s = block_side(outputs_per_anchor);
  return s == 1 ? input : bicubic_resize(input, static_cast<double>(s));
}

struct RunOptions {
  QueryCounter* counter = nullptr;
  // Round the final image to 8-bit levels; intermediate values are always
  // clamped to [0,255].
  bool quantize_output = true;
};

// Weights for one anchor under `pooling`, given precomputed OAP weights.
inline void pooling_weights(const Predictions& xs, const PoolingSpec& pooling, std::span<const double> oap_weights,
                            std::span<double> w) {
  switch (pooling.kind) {
    case PoolingKind::kAverage:
      uniform_weights(xs.k(), w);
      break;
    case PoolingKind::kGmp:
      gmp_weights(xs, pooling.tau, pooling.norm, w);
      break;
    case PoolingKind::kOap:
      std::copy(oap_weights.begin(), oap_weights.end(), w.begin());
      break;
  }
}

namespace detail {

// OAP weights of every anchor of `input`, k per anchor in raster order.
inline std::vector<double> anchor_coefficients(const Image& padded, int pad, int height, int width,
                                               const PipelineConfig& config, QueryCounter* counter) {
  const int k = config.orientations.k();
  std::vector<double> alphas(static_cast<std::size_t>(height) * width * k);
  std::array<double, kMaxInputs> patch{};
  std::span<double> p(patch.data(), static_cast<std::size_t>(config.coeff_pattern.size()));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      rotate_patch(padded, r + pad, c + pad, config.coeff_pattern, 0, p);
      std::span<double> a(alphas.data() + (static_cast<std::size_t>(r) * width + c) * k, static_cast<std::size_t>(k));
      coefficient_weights(*config.pooling.coeff_lut, p, a);
      if (counter) ++counter->coeff_queries;
    }
  }
  return alphas;
}

}  // namespace detail

// One cascade stage on an input in [0,255]. Returns clamped
// real values; `shared_alphas` supplies precomputed OAP weights (else they
// are queried from this stage's input).
inline Image run_stage(const Image& input, const PipelineConfig& config, std::size_t stage,
                       const std::vector<double>* shared_alphas, QueryCounter* counter) {
  const int pad = config.pad_width();
  const Image padded = pad_replicate(input, pad);
  const int h = input.height();
  const int w = input.width();
  const int k = config.orientations.k();
  const int m = config.stage_outputs(stage);
  const int s = block_side(m);

  std::vector<PatternTable> tables;
  for (std::size_t p = 0; p < config.patterns.size(); ++p) {
    tables.push_back({&config.patterns[p], config.stages[stage].luts[p].get()});
  }

  std::vector<double> local_alphas;
  const std::vector<double>* alphas = shared_alphas;
  if (config.pooling.kind == PoolingKind::kOap && !alphas) {
    local_alphas = detail::anchor_coefficients(padded, pad, h, w, config, counter);
    alphas = &local_alphas;
  }

  Image base;
  if (config.residual) base = residual_baseline(input, m);

  Image out(w * s, h * s);
  Predictions xs(k, m);
  std::vector<double> weights(static_cast<std::size_t>(k));
  std::vector<double> fused(static_cast<std::size_t>(m));
  const std::uint64_t queries_per_anchor = static_cast<std::uint64_t>(k) * tables.size();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      oriented_predictions(padded, r + pad, c + pad, tables, config.orientations, xs);
      std::span<const double> oap;
      if (alphas) oap = {alphas->data() + (static_cast<std::size_t>(r) * w + c) * k, static_cast<std::size_t>(k)};
      pooling_weights(xs, config.pooling, oap, weights);
      weighted_sum(xs, weights, fused);
      for (int br = 0; br < s; ++br) {
        for (int bc = 0; bc < s; ++bc) {
          const int orow = r * s + br;
          const int ocol = c * s + bc;
          const double v = fused[br * s + bc];
          out.at(orow, ocol) = config.residual ? apply_residual(base.at(orow, ocol), v) : std::clamp(v, 0.0, 255.0);
        }
      }
      if (counter) {
        ++counter->anchors;
        counter->lut_queries += queries_per_anchor;
      }
    }
  }
  return out;
}

// Runs every stage in order; stage t+1 reads the clamped output of stage t.
inline Image cascade(const Image& image, const PipelineConfig& config, const RunOptions& options = {}) {
  config.validate();
  for (double v : image.pixels()) {
    if (!(v >= 0.0 && v <= 255.0)) throw DomainError("input pixels must lie in [0,255]");
  }
  QueryCounter local;
  QueryCounter* counter = options.counter;
  std::vector<double> shared;
  bool have_shared = false;
  Image cur = image;
  for (std::size_t s = 0; s < config.stages.size(); ++s) {
    const std::vector<double>* alphas = nullptr;
    if (config.pooling.kind == PoolingKind::kOap && config.share_oap_across_stages) {
      if (!have_shared) {
        const int pad = config.pad_width();
        shared = detail::anchor_coefficients(pad_replicate(cur, pad), pad, cur.height(), cur.width(), config, counter);
        have_shared = true;
      }
      alphas = &shared;
    }
    // Anchors are counted once per input pixel, not once per stage.
    QueryCounter* stage_counter = counter;
    if (counter && s > 0) {
      local = {};
      stage_counter = &local;
    }
    cur = run_stage(cur, config, s, alphas, stage_counter);
    if (counter && s > 0) {
      counter->lut_queries += local.lut_queries;
      counter->coeff_queries += local.coeff_queries;
    }
  }
  return options.quantize_output ? quantize(cur) : cur;
}

inline Image restore_image(const Image& image, const PipelineConfig& config, const RunOptions& options = {}) {
  return cascade(image, config, options);
}

}  // namespace alut
