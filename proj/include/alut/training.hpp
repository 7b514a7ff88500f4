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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "alut/error.hpp"
#include "alut/image.hpp"
#include "alut/lut.hpp"
#include "alut/metrics.hpp"
#include "alut/orientation.hpp"
#include "alut/pipeline.hpp"
#include "alut/pooling.hpp"
#include "alut/serialize.hpp"

namespace alut {

// ---------------------------------------------------------------------------
// Losses and regularizers

enum class LossKind { kCharbonnier, kL1, kL2 };
enum class Regularizer { kNone, kEntropy };

inline LossKind parse_loss(const std::string& s) {
  if (s == "charbonnier") return LossKind::kCharbonnier;
  if (s == "l1") return LossKind::kL1;
  if (s == "l2") return LossKind::kL2;
  throw DomainError("unknown loss '" + s + "'");
}

// Mean of sqrt((pred - target)^2 + eps^2).
inline double charbonnier(std::span<const double> pred, std::span<const double> target, double epsilon) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += std::sqrt(d * d + epsilon * epsilon);
  }
  return acc / static_cast<double>(pred.size());
}

// Loss value and d loss / d pred (written to grad).
inline double fidelity_loss(LossKind kind, double epsilon, std::span<const double> pred,
                            std::span<const double> target, std::span<double> grad) {
  const double inv = 1.0 / static_cast<double>(pred.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    switch (kind) {
      case LossKind::kCharbonnier: {
        const double s = std::sqrt(d * d + epsilon * epsilon);
        acc += s;
        grad[i] = d / s * inv;
        break;
      }
      case LossKind::kL1:
        acc += std::abs(d);
        grad[i] = (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) * inv;
        break;
      case LossKind::kL2:
        acc += d * d;
        grad[i] = 2.0 * d * inv;
        break;
    }
  }
  return acc * inv;
}

// Negative entropy sum(a log a) with 0 log 0 = 0. Minimized (-log k) at the
// uniform point, so adding it to the loss pushes weights away from
// collapsing onto one orientation.
inline double entropy_regularizer(std::span<const double> weights) {
  double acc = 0.0;
  for (double a : weights) {
    if (a > 0.0) acc += a * std::log(a);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Optimizer

struct CosineSchedule {
  double initial = 1e-4;
  std::int64_t horizon = 1;

  double at(std::int64_t step) const {
    if (step < 0 || step > horizon) {
      throw DomainError("step " + std::to_string(step) + " outside schedule horizon " + std::to_string(horizon));
    }
    return initial * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(horizon)));
  }
};

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  std::vector<double> m1;
  std::vector<double> m2;
  std::int64_t steps = 0;

  void resize(std::size_t n) {
    m1.assign(n, 0.0);
    m2.assign(n, 0.0);
    steps = 0;
  }
};

namespace detail {

inline void adam_update(double& param, double grad, double& m1, double& m2, double lr, double c1, double c2) {
  m1 = AdamState::kBeta1 * m1 + (1.0 - AdamState::kBeta1) * grad;
  m2 = AdamState::kBeta2 * m2 + (1.0 - AdamState::kBeta2) * grad * grad;
  param -= lr * (m1 / c1) / (std::sqrt(m2 / c2) + AdamState::kEps);
}

}  // namespace detail

// One Adam update of `params` at schedule step `step` (0-based). When
// `only` is given, just those indices are updated (lazy Adam for sparse
// table gradients); bias correction always uses the global step count.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, std::int64_t step,
                      const CosineSchedule& schedule, double lr_scale = 1.0,
                      const std::vector<std::uint32_t>* only = nullptr) {
  if (state.m1.size() != params.size()) state.resize(params.size());
  const double lr = schedule.at(step) * lr_scale;
  state.steps = step + 1;
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.steps));
  if (only) {
    for (std::uint32_t i : *only) detail::adam_update(params[i], grads[i], state.m1[i], state.m2[i], lr, c1, c2);
  } else {
    for (std::size_t i = 0; i < params.size(); ++i) {
      detail::adam_update(params[i], grads[i], state.m1[i], state.m2[i], lr, c1, c2);
    }
  }
}

// ---------------------------------------------------------------------------
// Trainable tables

// Real-valued table with gradient accumulator and Adam moments.
struct TrainableLut {
  Lut table;
  std::vector<double> grad;
  AdamState adam;
  // Entries with a gradient contribution since the last zero_grad().
  std::vector<std::uint32_t> touched;
  std::vector<char> touched_flag;

  TrainableLut() = default;
  explicit TrainableLut(Lut t) : table(std::move(t)) {
    if (!table.is_real()) {
      Lut real = Lut::real(table.q(), table.n(), table.m(), table.k());
      std::copy(table.values().begin(), table.values().end(), real.values().begin());
      table = std::move(real);
    }
    grad.assign(table.entry_count(), 0.0);
    touched_flag.assign(table.entry_count(), 0);
    adam.resize(table.entry_count());
  }

  void zero_grad() {
    for (std::uint32_t i : touched) {
      grad[i] = 0.0;
      touched_flag[i] = 0;
    }
    touched.clear();
  }

  void accumulate(std::size_t entry, double g) {
    grad[entry] += g;
    if (!touched_flag[entry]) {
      touched_flag[entry] = 1;
      touched.push_back(static_cast<std::uint32_t>(entry));
    }
  }
};

// Sidecar holding Adam moments: the table container with m doubled
// (first then second moment per entry) and k holding the step count.
inline void save_checkpoint(const TrainableLut& t, const std::filesystem::path& path) {
  save_lut(t.table, path);
  Lut moments = Lut::real(t.table.q(), t.table.n(), 2 * t.table.m(), static_cast<int>(t.adam.steps));
  auto v = moments.values();
  const std::size_t m = static_cast<std::size_t>(t.table.m());
  for (std::size_t p = 0; p < t.table.point_count(); ++p) {
    for (std::size_t ch = 0; ch < m; ++ch) {
      v[p * 2 * m + ch] = t.adam.m1[p * m + ch];
      v[p * 2 * m + m + ch] = t.adam.m2[p * m + ch];
    }
  }
  auto sidecar = path;
  sidecar += ".adam";
  save_lut(moments, sidecar);
}

inline TrainableLut load_checkpoint(const std::filesystem::path& path) {
  TrainableLut t(load_lut(path));
  auto sidecar = path;
  sidecar += ".adam";
  if (!std::filesystem::exists(sidecar)) return t;
  const Lut moments = load_lut(sidecar);
  if (moments.q() != t.table.q() || moments.n() != t.table.n() || moments.m() != 2 * t.table.m()) {
    throw ShapeError("optimizer sidecar does not match its table");
  }
  const std::size_t m = static_cast<std::size_t>(t.table.m());
  const auto v = moments.values();
  for (std::size_t p = 0; p < t.table.point_count(); ++p) {
    for (std::size_t ch = 0; ch < m; ++ch) {
      t.adam.m1[p * m + ch] = v[p * 2 * m + ch];
      t.adam.m2[p * m + ch] = v[p * 2 * m + m + ch];
    }
  }
  t.adam.steps = moments.k();
  return t;
}

// ---------------------------------------------------------------------------
// Model

// A single-stage pipeline whose tables (and GMP temperature) are trainable.
struct TrainableModel {
  Task task = Task::kSuperResolution;
  int scale = 2;
  std::vector<KernelPattern> patterns = {square_pattern()};
  OrientationSet orientations;
  PoolingKind pooling = PoolingKind::kAverage;
  Norm norm = Norm::kL2;
  bool residual = true;
  KernelPattern coeff_pattern = square_pattern();

  std::vector<TrainableLut> luts;  // one per pattern
  std::optional<TrainableLut> coeff;

  // GMP temperature, optimized as log(tau) to stay positive.
  double log_tau = 0.0;
  double grad_log_tau = 0.0;
  AdamState tau_adam;
  bool tau_trainable = false;
  bool train_restoration = true;

  double tau() const { return std::exp(log_tau); }
  int outputs() const { return task == Task::kSuperResolution ? scale * scale : 1; }
  int pad_width() const {
    int reach = coeff_pattern.reach();
    for (const auto& p : patterns) reach = std::max(reach, p.reach());
    return reach;
  }

  // Residual tables start at zero (the baseline); direct tables start at
  // the identity, replicated over the sub-pixel outputs.
  static TrainableModel create(Task task, int scale, int q, std::vector<KernelPattern> patterns, bool residual) {
    TrainableModel model;
    model.task = task;
    model.scale = task == Task::kSuperResolution ? scale : 1;
    model.patterns = std::move(patterns);
    model.residual = residual;
    for (const auto& p : model.patterns) {
      p.validate();
      Lut t = Lut::real(q, p.size(), model.outputs());
      if (!residual) {
        bake_into(t, [](std::span<const double> x, std::span<double> out) {
          for (double& v : out) v = std::min(x[0], 255.0);
        });
      }
      model.luts.emplace_back(std::move(t));
    }
    return model;
  }

  // Attaches a coefficient table of zero logits: uniform weights, i.e.
  // exactly average pooling until it is trained.
  void attach_coefficients(int q = 5) {
    pooling = PoolingKind::kOap;
    coeff.emplace(Lut::real(q, coeff_pattern.size(), orientations.k(), orientations.k()));
  }

  void zero_grad() {
    for (auto& t : luts) t.zero_grad();
    if (coeff) coeff->zero_grad();
    grad_log_tau = 0.0;
  }

  // Inference configuration over copies of the current real-valued tables.
  PipelineConfig pipeline_config() const {
    PipelineConfig cfg;
    cfg.task = task;
    cfg.scale = scale;
    cfg.patterns = patterns;
    cfg.orientations = orientations;
    cfg.residual = residual;
    cfg.coeff_pattern = coeff_pattern;
    cfg.pooling.kind = pooling;
    cfg.pooling.norm = norm;
    cfg.pooling.tau = tau();
    cfg.pooling.tau_trainable = tau_trainable;
    if (coeff) cfg.pooling.coeff_lut = std::make_shared<const Lut>(coeff->table);
    Stage stage;
    for (const auto& t : luts) stage.luts.push_back(std::make_shared<const Lut>(t.table));
    cfg.stages = {std::move(stage)};
    return cfg;
  }
};

// ---------------------------------------------------------------------------
// Data

// A degraded/clean pair prepared for anchor sampling: the padded degraded
// image, the residual baseline at output resolution, and the target.
struct TrainingImage {
  Image padded;
  Image baseline;
  Image target;
  int pad = 0;
  int height = 0;
  int width = 0;
};

inline TrainingImage prepare_training_image(const Image& degraded, const Image& clean, const TrainableModel& model) {
  const int s = model.task == Task::kSuperResolution ? model.scale : 1;
  if (clean.width() != degraded.width() * s || clean.height() != degraded.height() * s) {
    throw ShapeError("clean image must be scale x the degraded image");
  }
  TrainingImage t;
  t.pad = model.pad_width();
  t.padded = pad_replicate(degraded, t.pad);
  t.baseline = residual_baseline(degraded, model.outputs());
  t.target = clean;
  t.height = degraded.height();
  t.width = degraded.width();
  return t;
}

struct Sample {
  const TrainingImage* image = nullptr;
  int row = 0;
  int col = 0;
};

// ---------------------------------------------------------------------------
// Forward / backward

struct TrainConfig {
  LossKind loss = LossKind::kCharbonnier;
  double epsilon = 1e-3;
  Regularizer regularizer = Regularizer::kEntropy;
  double lambda = 1e-3;
  // Initial learning rate on normalized [0,1] intensities, cosine-annealed
  // to zero over `iterations`.
  double lr = 1e-4;
  // Restoration entries live in 8-bit units, so their step is scaled by
  // this factor (and by restoration_lr_factor during fine-tuning).
  double value_lr_scale = 255.0;
  double restoration_lr_factor = 1.0;
  // restoration_lr_factor used by finetune().
  double finetune_lr_factor = 0.1;
  // GMP temperature (pixel units) set by finetune(), and the step scale of
  // its log-space parameter.
  double tau_init = 1.0;
  double tau_lr_scale = 100.0;
  int batch_size = 32;
  int patch_size = 48;
  int iterations = 1000;
  std::uint64_t seed = 1;
  bool augment = true;
  bool lazy_adam = true;
  // Validate every this many steps (0: only at the end).
  int val_every = 0;
  // Keep the tables with the best validation PSNR, including the initial
  // ones, instead of the final ones.
  bool keep_best = false;
  int shave = -1;  // metric border crop; negative means the scale

  void validate() const {
    if (!(lr > 0.0)) throw DomainError("learning rate must be positive");
    if (!(epsilon > 0.0)) throw DomainError("Charbonnier epsilon must be positive");
    if (lambda < 0.0) throw DomainError("regularizer weight must be non-negative");
    if (batch_size < 1 || iterations < 0 || patch_size < 1) throw DomainError("invalid batch/patch/iteration counts");
  }
};

namespace detail {

struct Workspace {
  Predictions xs;
  std::vector<double> alpha, d_alpha, dist, pred, grad_pred, target, block, dblock;
  std::vector<double> mean;
};

}  // namespace detail

// Loss of one anchor; with `backward`, d(loss * weight)/d(parameters) is
// accumulated into the model. Prediction reuses the inference routines.
inline double anchor_loss(TrainableModel& model, const Sample& s, const TrainConfig& cfg, double weight, bool backward,
                          detail::Workspace& ws) {
  const TrainingImage& img = *s.image;
  const int k = model.orientations.k();
  const int m = model.outputs();
  const int side = block_side(m);
  const int row = s.row + img.pad;
  const int col = s.col + img.pad;

  std::vector<PatternTable> tables;
  tables.reserve(model.luts.size());
  for (std::size_t p = 0; p < model.luts.size(); ++p) tables.push_back({&model.patterns[p], &model.luts[p].table});
  oriented_predictions(img.padded, row, col, tables, model.orientations, ws.xs);

  ws.alpha.resize(k);
  std::array<double, kMaxInputs> coeff_patch{};
  std::span<double> cpatch(coeff_patch.data(), static_cast<std::size_t>(model.coeff_pattern.size()));
  switch (model.pooling) {
    case PoolingKind::kAverage:
      uniform_weights(k, ws.alpha);
      break;
    case PoolingKind::kGmp:
      gmp_weights(ws.xs, model.tau(), model.norm, ws.alpha);
      break;
    case PoolingKind::kOap:
      if (!model.coeff) throw ShapeError("OAP training requires a coefficient table");
      rotate_patch(img.padded, row, col, model.coeff_pattern, 0, cpatch);
      coefficient_weights(model.coeff->table, cpatch, ws.alpha);
      break;
  }
  ws.pred.resize(m);
  weighted_sum(ws.xs, ws.alpha, ws.pred);
  ws.target.resize(m);
  for (int br = 0; br < side; ++br) {
    for (int bc = 0; bc < side; ++bc) {
      const int orow = s.row * side + br;
      const int ocol = s.col * side + bc;
      if (model.residual) ws.pred[br * side + bc] += img.baseline.at(orow, ocol);
      ws.target[br * side + bc] = img.target.at(orow, ocol);
    }
  }
  ws.grad_pred.resize(m);
  double loss = fidelity_loss(cfg.loss, cfg.epsilon, ws.pred, ws.target, ws.grad_pred);
  const bool regularize = model.pooling == PoolingKind::kOap && cfg.regularizer == Regularizer::kEntropy;
  if (regularize) loss += cfg.lambda * entropy_regularizer(ws.alpha);
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "non-finite loss at anchor (" << s.row << "," << s.col << "), prediction";
    for (double v : ws.pred) msg << ' ' << v;
    throw NumericError(msg.str());
  }
  if (!backward) return loss;

  for (double& g : ws.grad_pred) g *= weight;

  // d loss / d alpha_i and d loss / d x_i through the weighted sum.
  ws.d_alpha.assign(k, 0.0);
  Predictions dxs(k, m);
  for (int i = 0; i < k; ++i) {
    const auto x = ws.xs.row(i);
    auto dx = dxs.row(i);
    double acc = 0.0;
    for (int ch = 0; ch < m; ++ch) {
      acc += ws.grad_pred[ch] * x[ch];
      dx[ch] = ws.alpha[i] * ws.grad_pred[ch];
    }
    ws.d_alpha[i] = acc;
    if (regularize && ws.alpha[i] > 0.0) ws.d_alpha[i] += weight * cfg.lambda * (std::log(ws.alpha[i]) + 1.0);
  }
  // Through the softmax shared by GMP and OAP: d logit_i = a_i (da_i - <a, da>).
  double dot = 0.0;
  for (int i = 0; i < k; ++i) dot += ws.alpha[i] * ws.d_alpha[i];

  if (model.pooling == PoolingKind::kGmp) {
    const double tau = model.tau();
    ws.dist.resize(k);
    consensus_distances(ws.xs, model.norm, ws.dist);
    ws.mean.resize(m);
    prediction_mean(ws.xs, ws.mean);
    double dtau = 0.0;
    // logits are -d_i / tau.
    std::vector<double> e(static_cast<std::size_t>(k) * m, 0.0);
    std::vector<double> e_sum(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < k; ++i) {
      const double dlogit = ws.alpha[i] * (ws.d_alpha[i] - dot);
      const double dd = -dlogit / tau;
      dtau += dlogit * ws.dist[i] / (tau * tau);
      const auto x = ws.xs.row(i);
      for (int ch = 0; ch < m; ++ch) {
        const double u = x[ch] - ws.mean[ch];
        double partial = 0.0;
        if (model.norm == Norm::kL2) {
          partial = ws.dist[i] > 0.0 ? u / ws.dist[i] : 0.0;
        } else {
          partial = u > 0 ? 1.0 : u < 0 ? -1.0 : 0.0;
        }
        e[static_cast<std::size_t>(i) * m + ch] = dd * partial;
        e_sum[ch] += dd * partial;
      }
    }
    for (int i = 0; i < k; ++i) {
      auto dx = dxs.row(i);
      for (int ch = 0; ch < m; ++ch) dx[ch] += e[static_cast<std::size_t>(i) * m + ch] - e_sum[ch] / k;
    }
    if (model.tau_trainable) model.grad_log_tau += dtau * tau;
  } else if (model.pooling == PoolingKind::kOap) {
    std::vector<double> dlogit(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) dlogit[i] = ws.alpha[i] * (ws.d_alpha[i] - dot);
    auto& coeff = *model.coeff;
    for_each_corner(coeff.table, cpatch, [&](std::size_t point, double w) {
      for (int i = 0; i < k; ++i) coeff.accumulate(point * k + i, w * dlogit[i]);
    });
  }

  if (!model.train_restoration) return loss;
  // Back through unrotation (a permutation) and the per-pattern mean into
  // the interpolation weights of each touched entry.
  ws.dblock.resize(m);
  std::array<double, kMaxInputs> patch{};
  const double inv_patterns = 1.0 / static_cast<double>(model.luts.size());
  for (int i = 0; i < k; ++i) {
    const int r = model.orientations.rotations[i];
    rotate_block(dxs.row(i), -r, ws.dblock);
    if (model.luts.size() > 1) {
      for (double& v : ws.dblock) v *= inv_patterns;
    }
    for (std::size_t p = 0; p < model.luts.size(); ++p) {
      auto& t = model.luts[p];
      std::span<double> pp(patch.data(), static_cast<std::size_t>(model.patterns[p].size()));
      rotate_patch(img.padded, row, col, model.patterns[p], r, pp);
      for_each_corner(t.table, pp, [&](std::size_t point, double w) {
        for (int ch = 0; ch < m; ++ch) t.accumulate(point * m + ch, w * ws.dblock[ch]);
      });
    }
  }
  return loss;
}

// Mean loss over the batch; accumulates gradients of that mean. Samples are
// processed in order, so the reduction is deterministic.
inline double forward_backward(TrainableModel& model, std::span<const Sample> batch, const TrainConfig& cfg,
                               bool backward = true) {
  if (batch.empty()) throw DomainError("empty batch");
  detail::Workspace ws;
  const double weight = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const Sample& s : batch) total += anchor_loss(model, s, cfg, weight, backward, ws);
  return total * weight;
}

inline double batch_loss(TrainableModel& model, std::span<const Sample> batch, const TrainConfig& cfg) {
  return forward_backward(model, batch, cfg, false);
}

// ---------------------------------------------------------------------------
// Export

struct ExportReport {
  Lut table;
  double max_abs_error = 0.0;
  std::size_t clamped = 0;
};

// Quantizes a real table into an integer container.
inline ExportReport export_lut(const Lut& real, int bit_depth = 8, bool is_signed = false) {
  ExportReport rep;
  rep.table = Lut::integer(real.q(), real.n(), real.m(), bit_depth, is_signed, real.k());
  const auto src = real.values();
  auto dst = rep.table.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!std::isfinite(src[i])) throw NumericError("cannot export non-finite table entry");
    const double rounded = std::round(src[i]);
    if (rounded < rep.table.min_value() || rounded > rep.table.max_value()) ++rep.clamped;
    dst[i] = rep.table.representable(src[i]);
    rep.max_abs_error = std::max(rep.max_abs_error, std::abs(dst[i] - src[i]));
  }
  return rep;
}

// Turns coefficient logits into 8-bit weights: softmax at every lattice
// point, rescaled so the largest weight is 255.
inline ExportReport export_coefficients(const Lut& logits) {
  ExportReport rep;
  const int k = logits.m();
  rep.table = Lut::integer(logits.q(), logits.n(), k, 8, false, k);
  std::vector<double> a(static_cast<std::size_t>(k));
  for (std::size_t p = 0; p < logits.point_count(); ++p) {
    for (int i = 0; i < k; ++i) a[i] = logits.value(p, i);
    softmax(a);
    const double mx = *std::max_element(a.begin(), a.end());
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      rep.table.values()[p * k + i] = std::round(255.0 * a[i] / mx);
      sum += rep.table.values()[p * k + i];
    }
    for (int i = 0; i < k; ++i) rep.max_abs_error = std::max(rep.max_abs_error, std::abs(rep.table.values()[p * k + i] / sum - a[i]));
  }
  return rep;
}

// Integer pipeline built from the model: restoration tables rounded into
// 8-bit containers (signed for residual tables), coefficients exported as
// normalized weights.
inline PipelineConfig exported_pipeline(const TrainableModel& model, std::size_t* clamped = nullptr) {
  PipelineConfig cfg = model.pipeline_config();
  std::size_t total = 0;
  for (std::size_t p = 0; p < model.luts.size(); ++p) {
    auto rep = export_lut(model.luts[p].table, 8, model.residual);
    total += rep.clamped;
    cfg.stages[0].luts[p] = std::make_shared<const Lut>(std::move(rep.table));
  }
  if (model.coeff) cfg.pooling.coeff_lut = std::make_shared<const Lut>(export_coefficients(model.coeff->table).table);
  if (clamped) *clamped = total;
  return cfg;
}

// ---------------------------------------------------------------------------
// Training loop

// Mean PSNR (dB) of a pipeline over validation pairs.
inline double validation_psnr(const PipelineConfig& cfg, std::span<const ImagePair> val, int shave_border) {
  if (val.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : val) {
    const Image out = restore_image(v.degraded, cfg);
    acc += shave_border > 0 ? psnr(shave(v.clean, shave_border), shave(out, shave_border)) : psnr(v.clean, out);
  }
  return acc / static_cast<double>(val.size());
}

struct TrainLogRow {
  int step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double val_psnr = 0.0;  // NaN when not evaluated at this step
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  std::vector<double> losses;  // per step
  double initial_val_psnr = 0.0;
  double final_val_psnr = 0.0;
  double best_val_psnr = 0.0;
  int best_step = 0;
};

inline void write_train_log(const std::vector<TrainLogRow>& rows, std::ostream& out) {
  out << "step,lr,loss,val_psnr\n";
  for (const auto& r : rows) {
    out << r.step << ',' << r.lr << ',' << r.loss << ',';
    if (std::isfinite(r.val_psnr)) out << r.val_psnr;
    out << '\n';
  }
}

namespace detail {

struct Snapshot {
  std::vector<Lut> luts;
  std::optional<Lut> coeff;
  double log_tau = 0.0;
};

inline Snapshot snapshot(const TrainableModel& m) {
  Snapshot s;
  for (const auto& t : m.luts) s.luts.push_back(t.table);
  if (m.coeff) s.coeff = m.coeff->table;
  s.log_tau = m.log_tau;
  return s;
}

inline void restore_snapshot(TrainableModel& m, const Snapshot& s) {
  for (std::size_t i = 0; i < s.luts.size(); ++i) m.luts[i].table = s.luts[i];
  if (s.coeff) m.coeff->table = *s.coeff;
  m.log_tau = s.log_tau;
}

}  // namespace detail

// Adam + cosine schedule over anchors sampled uniformly from random
// patch_size crops of randomly rotated/flipped training pairs.
inline TrainResult train(TrainableModel& model, std::span<const ImagePair> train_pairs,
                         std::span<const ImagePair> val_pairs, const TrainConfig& cfg,
                         const std::function<void(const TrainLogRow&)>& on_log = {}) {
  cfg.validate();
  if (train_pairs.empty()) throw DomainError("no training pairs");
  const int shave_border = cfg.shave >= 0 ? cfg.shave : (model.task == Task::kSuperResolution ? model.scale : 0);

  std::vector<TrainingImage> images;
  const int augmentations = cfg.augment ? 8 : 1;
  for (const auto& p : train_pairs) {
    for (int a = 0; a < augmentations; ++a) {
      images.push_back(prepare_training_image(dihedral(p.degraded, a), dihedral(p.clean, a), model));
    }
  }

  std::mt19937_64 rng(cfg.seed);
  const CosineSchedule schedule{cfg.lr, std::max<std::int64_t>(cfg.iterations, 1)};
  TrainResult result;
  result.losses.reserve(static_cast<std::size_t>(cfg.iterations));

  auto validate = [&] { return validation_psnr(model.pipeline_config(), val_pairs, shave_border); };
  result.initial_val_psnr = val_pairs.empty() ? 0.0 : validate();
  result.best_val_psnr = result.initial_val_psnr;
  detail::Snapshot best;
  if (cfg.keep_best) best = detail::snapshot(model);

  std::vector<Sample> batch(static_cast<std::size_t>(cfg.batch_size));
  std::uniform_int_distribution<std::size_t> pick_image(0, images.size() - 1);
  for (int step = 0; step < cfg.iterations; ++step) {
    for (auto& s : batch) {
      const TrainingImage& img = images[pick_image(rng)];
      const int ch = std::min(cfg.patch_size, img.height);
      const int cw = std::min(cfg.patch_size, img.width);
      const int r0 = std::uniform_int_distribution<int>(0, img.height - ch)(rng);
      const int c0 = std::uniform_int_distribution<int>(0, img.width - cw)(rng);
      s.image = &img;
      s.row = r0 + std::uniform_int_distribution<int>(0, ch - 1)(rng);
      s.col = c0 + std::uniform_int_distribution<int>(0, cw - 1)(rng);
    }
    model.zero_grad();
    const double loss = forward_backward(model, batch, cfg);
    result.losses.push_back(loss);

    const double restoration_scale = cfg.value_lr_scale * cfg.restoration_lr_factor;
    if (model.train_restoration) {
      for (auto& t : model.luts) {
        adam_step(t.table.values(), t.grad, t.adam, step, schedule, restoration_scale,
                  cfg.lazy_adam ? &t.touched : nullptr);
      }
    }
    if (model.coeff) {
      auto& c = *model.coeff;
      adam_step(c.table.values(), c.grad, c.adam, step, schedule, 1.0, cfg.lazy_adam ? &c.touched : nullptr);
    }
    if (model.pooling == PoolingKind::kGmp && model.tau_trainable) {
      std::span<double> p(&model.log_tau, 1);
      std::span<const double> g(&model.grad_log_tau, 1);
      adam_step(p, g, model.tau_adam, step, schedule, cfg.tau_lr_scale);
    }

    TrainLogRow row{step + 1, schedule.at(step), loss, std::nan("")};
    const bool last = step + 1 == cfg.iterations;
    if (!val_pairs.empty() && ((cfg.val_every > 0 && (step + 1) % cfg.val_every == 0) || last)) {
      row.val_psnr = validate();
      if (row.val_psnr > result.best_val_psnr) {
        result.best_val_psnr = row.val_psnr;
        result.best_step = step + 1;
        if (cfg.keep_best) best = detail::snapshot(model);
      }
      if (last) result.final_val_psnr = row.val_psnr;
    }
    result.log.push_back(row);
    if (on_log) on_log(row);
  }
  if (cfg.iterations == 0) result.final_val_psnr = result.initial_val_psnr;
  if (cfg.keep_best && !val_pairs.empty()) {
    detail::restore_snapshot(model, best);
    result.final_val_psnr = result.best_val_psnr;
  }
  return result;
}

// Fine-tunes pretrained restoration tables together with a new pooling
// rule. OAP starts from zero logits (average pooling); restoration tables
// move at finetune_lr_factor of the base rate; the best validation
// checkpoint, including the starting point, is kept.
inline TrainResult finetune(TrainableModel& model, PoolingKind pooling, std::span<const ImagePair> train_pairs,
                            std::span<const ImagePair> val_pairs, TrainConfig cfg, int coeff_q = 5,
                            const std::function<void(const TrainLogRow&)>& on_log = {}) {
  if (pooling == PoolingKind::kOap) {
    model.attach_coefficients(coeff_q);
  } else {
    model.pooling = pooling;
    model.coeff.reset();
    if (pooling == PoolingKind::kGmp) {
      model.tau_trainable = true;
      model.log_tau = std::log(cfg.tau_init);
      model.tau_adam.resize(1);
    }
  }
  cfg.keep_best = true;
  cfg.restoration_lr_factor = cfg.finetune_lr_factor;
  return train(model, train_pairs, val_pairs, cfg, on_log);
}

}  // namespace alut
