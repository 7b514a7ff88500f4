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

// Randomized small training instances and a central-difference checker.
#pragma once

#include <cmath>
#include <deque>
#include <random>
#include <vector>

#include "alut/training.hpp"

namespace alut::testing {

inline KernelPattern pair_pattern() { return {"pair", {{0, 0}, {0, 1}}}; }

struct GradInstance {
  TrainableModel model;
  std::deque<TrainingImage> images;
  std::vector<Sample> batch;
  TrainConfig cfg;
};

inline Image random_image(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Image img(w, h);
  for (double& v : img.pixels()) v = std::round(u(rng));
  return img;
}

// Two-input tables (q in {5,6}), four orientations, random entries, logits
// and temperature, a handful of anchors on random images.
inline GradInstance random_instance(PoolingKind pooling, int q, std::uint64_t seed, Task task = Task::kSuperResolution) {
  std::mt19937_64 rng(seed);
  GradInstance g;
  g.model = TrainableModel::create(task, 2, q, {pair_pattern()}, true);
  g.model.coeff_pattern = pair_pattern();
  std::normal_distribution<double> n01(0.0, 1.0);
  for (double& v : g.model.luts[0].table.values()) v = 8.0 * n01(rng);
  if (pooling == PoolingKind::kOap) {
    g.model.attach_coefficients(q);
    for (double& v : g.model.coeff->table.values()) v = n01(rng);
  }
  g.model.pooling = pooling;
  if (pooling == PoolingKind::kGmp) {
    g.model.tau_trainable = true;
    g.model.log_tau = std::log(2.0 + 6.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }
  g.cfg.loss = LossKind::kCharbonnier;
  g.cfg.epsilon = 1.0;
  g.cfg.lambda = 0.5;
  const int s = task == Task::kSuperResolution ? 2 : 1;
  for (int i = 0; i < 2; ++i) {
    const Image lr = random_image(6, 6, rng);
    g.images.push_back(prepare_training_image(lr, random_image(6 * s, 6 * s, rng), g.model));
  }
  std::uniform_int_distribution<int> pos(0, 5);
  for (int i = 0; i < 6; ++i) g.batch.push_back({&g.images[i % 2], pos(rng), pos(rng)});
  return g;
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

// Central difference of the batch loss with respect to *param.
inline double numeric_gradient(GradInstance& g, double* param, double h) {
  const double v = *param;
  *param = v + h;
  const double lp = batch_loss(g.model, g.batch, g.cfg);
  *param = v - h;
  const double lm = batch_loss(g.model, g.batch, g.cfg);
  *param = v;
  return (lp - lm) / (2.0 * h);
}

struct GradCheck {
  int checked = 0;
  int failed = 0;
  double max_rel = 0.0;

  void add(double analytic, double numeric, double tol) {
    const double rel = relative_error(analytic, numeric);
    ++checked;
    if (rel > tol) ++failed;
    max_rel = std::max(max_rel, rel);
  }
};

// Checks up to `per_table` touched entries of each table, plus tau.
inline GradCheck check_instance(GradInstance& g, int per_table, double tol, std::mt19937_64& rng) {
  GradCheck out;
  g.model.zero_grad();
  forward_backward(g.model, g.batch, g.cfg);
  auto check_table = [&](TrainableLut& t) {
    std::vector<std::uint32_t> idx = t.touched;
    std::shuffle(idx.begin(), idx.end(), rng);
    if (static_cast<int>(idx.size()) > per_table) idx.resize(per_table);
    const std::vector<double> grad = t.grad;
    for (std::uint32_t i : idx) out.add(grad[i], numeric_gradient(g, &t.table.values()[i], 1e-4), tol);
  };
  for (auto& t : g.model.luts) check_table(t);
  if (g.model.coeff) check_table(*g.model.coeff);
  if (g.model.pooling == PoolingKind::kGmp && g.model.tau_trainable) {
    const double analytic = g.model.grad_log_tau;
    out.add(analytic, numeric_gradient(g, &g.model.log_tau, 1e-5), tol);
  }
  return out;
}

}  // namespace alut::testing
