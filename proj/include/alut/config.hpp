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

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "alut/error.hpp"
#include "alut/orientation.hpp"
#include "alut/pipeline.hpp"
#include "alut/pooling.hpp"
#include "alut/serialize.hpp"
#include "alut/training.hpp"

namespace alut {

// Everything a run needs besides the command line: pipeline shape, table
// files, dataset and training settings. Stored as JSON, e.g.
//
//   {
//     "task": "sr", "scale": 2, "patterns": ["S"], "residual": true,
//     "pooling": {"kind": "oap", "tau": 1.0, "norm": "l2"},
//     "stages": [["sr_x2.alut"]], "coeff_lut": "coeff.alut",
//     "manifest": "data/manifest.tsv",
//     "train": {"q": 4, "iterations": 10000, "lr": 1e-4, "seed": 1}
//   }
//
// Relative paths resolve against the config file's directory.
struct TrainSettings {
  TrainConfig config;
  int q = 4;
  int coeff_q = 5;
  // Negative: 10% of the main schedule.
  int finetune_iterations = -1;

  int resolved_finetune_iterations() const {
    return finetune_iterations >= 0 ? finetune_iterations : std::max(1, config.iterations / 10);
  }
};

struct RunConfig {
  Task task = Task::kRestore;
  int scale = 1;
  std::vector<std::string> patterns = {"S"};
  std::vector<int> rotations = {0, 1, 2, 3};
  PoolingKind pooling = PoolingKind::kAverage;
  double tau = 1.0;
  Norm norm = Norm::kL2;
  bool tau_trainable = false;
  bool residual = false;
  bool share_oap_across_stages = true;
  std::string coeff_pattern = "S";
  int padding = -1;
  std::vector<std::vector<std::filesystem::path>> stages;
  std::filesystem::path coeff_lut;
  std::filesystem::path manifest;
  std::uint64_t seed = 1;
  TrainSettings train;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw FormatError("unknown " + where + " key '" + it.key() + "'");
  }
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline Task parse_task(const std::string& s) {
  if (s == "sr" || s == "super-resolution") return Task::kSuperResolution;
  if (s == "restore" || s == "denoise" || s == "deblock" || s == "deblur") return Task::kRestore;
  throw DomainError("unknown task '" + s + "'");
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base) {
  RunConfig c;
  try {
    if (!j.is_object()) throw FormatError("config must be a JSON object");
    detail::reject_unknown(j,
                           {"task", "scale", "patterns", "rotations", "pooling", "residual", "share_oap_across_stages",
                            "coeff_pattern", "padding", "stages", "coeff_lut", "manifest", "seed", "train"},
                           "config");
    if (j.contains("task")) c.task = detail::parse_task(j.at("task").get<std::string>());
    c.scale = c.task == Task::kSuperResolution ? 2 : 1;
    detail::read_field(j, "scale", c.scale);
    detail::read_field(j, "patterns", c.patterns);
    detail::read_field(j, "rotations", c.rotations);
    detail::read_field(j, "residual", c.residual);
    detail::read_field(j, "share_oap_across_stages", c.share_oap_across_stages);
    detail::read_field(j, "coeff_pattern", c.coeff_pattern);
    detail::read_field(j, "padding", c.padding);
    detail::read_field(j, "seed", c.seed);
    if (j.contains("pooling")) {
      const auto& p = j.at("pooling");
      if (p.is_string()) {
        c.pooling = parse_pooling(p.get<std::string>());
      } else {
        detail::reject_unknown(p, {"kind", "tau", "norm", "tau_trainable"}, "pooling");
        if (p.contains("kind")) c.pooling = parse_pooling(p.at("kind").get<std::string>());
        detail::read_field(p, "tau", c.tau);
        if (p.contains("norm")) c.norm = parse_norm(p.at("norm").get<std::string>());
        detail::read_field(p, "tau_trainable", c.tau_trainable);
      }
    }
    if (j.contains("stages")) {
      for (const auto& st : j.at("stages")) {
        std::vector<std::filesystem::path> files;
        if (st.is_string()) {
          files.push_back(base / st.get<std::string>());
        } else {
          for (const auto& f : st) files.push_back(base / f.get<std::string>());
        }
        c.stages.push_back(std::move(files));
      }
    }
    if (j.contains("coeff_lut")) c.coeff_lut = base / j.at("coeff_lut").get<std::string>();
    if (j.contains("manifest")) c.manifest = base / j.at("manifest").get<std::string>();
    if (j.contains("train")) {
      const auto& t = j.at("train");
      detail::reject_unknown(t,
                             {"loss", "epsilon", "regularizer", "lambda", "lr", "value_lr_scale",
                              "restoration_lr_factor", "finetune_lr_factor", "tau_init", "tau_lr_scale", "batch_size", "patch_size",
                              "iterations", "seed", "augment", "lazy_adam", "val_every", "keep_best", "shave", "q",
                              "coeff_q", "finetune_iterations"},
                             "train");
      TrainConfig& tc = c.train.config;
      tc.seed = c.seed;
      if (t.contains("loss")) tc.loss = parse_loss(t.at("loss").get<std::string>());
      if (t.contains("regularizer")) {
        const auto r = t.at("regularizer").get<std::string>();
        if (r == "entropy") {
          tc.regularizer = Regularizer::kEntropy;
        } else if (r == "none") {
          tc.regularizer = Regularizer::kNone;
        } else {
          throw DomainError("unknown regularizer '" + r + "'");
        }
      }
      detail::read_field(t, "epsilon", tc.epsilon);
      detail::read_field(t, "lambda", tc.lambda);
      detail::read_field(t, "lr", tc.lr);
      detail::read_field(t, "value_lr_scale", tc.value_lr_scale);
      detail::read_field(t, "restoration_lr_factor", tc.restoration_lr_factor);
      detail::read_field(t, "finetune_lr_factor", tc.finetune_lr_factor);
      detail::read_field(t, "tau_init", tc.tau_init);
      detail::read_field(t, "tau_lr_scale", tc.tau_lr_scale);
      detail::read_field(t, "batch_size", tc.batch_size);
      detail::read_field(t, "patch_size", tc.patch_size);
      detail::read_field(t, "iterations", tc.iterations);
      detail::read_field(t, "seed", tc.seed);
      detail::read_field(t, "augment", tc.augment);
      detail::read_field(t, "lazy_adam", tc.lazy_adam);
      detail::read_field(t, "val_every", tc.val_every);
      detail::read_field(t, "keep_best", tc.keep_best);
      detail::read_field(t, "shave", tc.shave);
      detail::read_field(t, "q", c.train.q);
      detail::read_field(t, "coeff_q", c.train.coeff_q);
      detail::read_field(t, "finetune_iterations", c.train.finetune_iterations);
      tc.validate();
    } else {
      c.train.config.seed = c.seed;
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

inline std::vector<KernelPattern> resolve_patterns(const std::vector<std::string>& names) {
  std::vector<KernelPattern> out;
  for (const auto& n : names) out.push_back(pattern_by_name(n));
  return out;
}

// Writes the pipeline part of a config (plus seed and manifest), with
// paths relative to the output file's directory.
inline void save_run_config(const RunConfig& c, const std::filesystem::path& path) {
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    return std::filesystem::proximate(p, base).generic_string();
  };
  nlohmann::json j;
  j["task"] = c.task == Task::kSuperResolution ? "sr" : "restore";
  j["scale"] = c.scale;
  j["patterns"] = c.patterns;
  j["rotations"] = c.rotations;
  j["residual"] = c.residual;
  j["share_oap_across_stages"] = c.share_oap_across_stages;
  j["coeff_pattern"] = c.coeff_pattern;
  j["padding"] = c.padding;
  j["seed"] = c.seed;
  j["pooling"] = {{"kind", to_string(c.pooling)},
                  {"tau", c.tau},
                  {"norm", c.norm == Norm::kL1 ? "l1" : "l2"},
                  {"tau_trainable", c.tau_trainable}};
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& st : c.stages) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : st) files.push_back(rel(f));
    stages.push_back(files);
  }
  j["stages"] = stages;
  if (!c.coeff_lut.empty()) j["coeff_lut"] = rel(c.coeff_lut);
  if (!c.manifest.empty()) j["manifest"] = rel(c.manifest);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Pipeline over the config's table files.
inline PipelineConfig build_pipeline(const RunConfig& c) {
  PipelineConfig p;
  p.task = c.task;
  p.scale = c.task == Task::kSuperResolution ? c.scale : 1;
  p.patterns = resolve_patterns(c.patterns);
  p.orientations.rotations = c.rotations;
  p.residual = c.residual;
  p.share_oap_across_stages = c.share_oap_across_stages;
  p.coeff_pattern = pattern_by_name(c.coeff_pattern);
  p.padding = c.padding;
  p.pooling.kind = c.pooling;
  p.pooling.tau = c.tau;
  p.pooling.norm = c.norm;
  p.pooling.tau_trainable = c.tau_trainable;
  for (const auto& files : c.stages) {
    Stage st;
    for (const auto& f : files) st.luts.push_back(std::make_shared<const Lut>(load_lut(f)));
    p.stages.push_back(std::move(st));
  }
  if (c.pooling == PoolingKind::kOap) {
    if (c.coeff_lut.empty()) throw DomainError("OAP pooling needs a coefficient table");
    p.pooling.coeff_lut = std::make_shared<const Lut>(load_lut(c.coeff_lut));
  }
  p.validate();
  return p;
}

// Bytes of table payload a pipeline holds.
inline std::uint64_t table_bytes(const PipelineConfig& p) {
  std::uint64_t total = 0;
  for (const auto& st : p.stages) {
    for (const auto& l : st.luts) total += l->storage_bytes();
  }
  if (p.pooling.coeff_lut) total += p.pooling.coeff_lut->storage_bytes();
  return total;
}

}  // namespace alut
