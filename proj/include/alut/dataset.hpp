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
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "alut/degrade.hpp"
#include "alut/error.hpp"
#include "alut/image.hpp"
#include "alut/netpbm.hpp"

namespace alut {

// Manifest: one item per line, tab-separated
//   <split> TAB <clean path> TAB <degraded path | recipe>
// Blank lines and lines starting with '#' are skipped, except that
// "#name <name>" names the dataset. Relative paths resolve against the
// manifest's directory.
struct ManifestItem {
  std::string split;
  std::filesystem::path clean;
  std::optional<std::filesystem::path> degraded;
  std::optional<DegradationRecipe> recipe;
  std::size_t index = 0;  // position in the manifest, keys the noise stream
};

struct DatasetManifest {
  std::string name;
  std::vector<ManifestItem> items;

  std::vector<ManifestItem> split(const std::string& tag) const {
    std::vector<ManifestItem> out;
    for (const auto& it : items) {
      if (tag.empty() || it.split == tag) out.push_back(it);
    }
    return out;
  }
};

inline bool looks_like_recipe(const std::string& field) {
  return field.rfind("bicubic_down:", 0) == 0 || field.rfind("awgn:", 0) == 0;
}

inline DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base, std::string name,
                                      bool check_paths = true) {
  DatasetManifest m;
  m.name = std::move(name);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("#name ", 0) == 0) m.name = line.substr(6);
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    const std::string where = "manifest line " + std::to_string(lineno);
    if (fields.size() != 3) throw FormatError(where + ": expected 3 tab-separated fields");
    if (fields[0] != "train" && fields[0] != "val" && fields[0] != "test") {
      throw FormatError(where + ": split must be train, val or test");
    }
    ManifestItem item;
    item.split = fields[0];
    item.clean = base / fields[1];
    item.index = m.items.size();
    if (looks_like_recipe(fields[2])) {
      item.recipe = parse_recipe(fields[2]);
    } else {
      item.degraded = base / fields[2];
    }
    if (check_paths) {
      if (!std::filesystem::exists(item.clean)) throw IoError(where + ": missing " + item.clean.string());
      if (item.degraded && !std::filesystem::exists(*item.degraded)) {
        throw IoError(where + ": missing " + item.degraded->string());
      }
    }
    m.items.push_back(std::move(item));
  }
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path(), path.stem().string());
}

struct NamedPair {
  std::string name;
  ImagePair pair;
};

inline NamedPair load_item(const ManifestItem& item) {
  NamedPair p;
  p.name = item.clean.stem().string();
  p.pair.clean = read_gray(item.clean);
  p.pair.degraded = item.recipe ? degrade(p.pair.clean, *item.recipe, item.index) : read_gray(*item.degraded);
  return p;
}

inline std::vector<NamedPair> load_split(const DatasetManifest& m, const std::string& tag) {
  std::vector<NamedPair> out;
  for (const auto& it : m.split(tag)) out.push_back(load_item(it));
  return out;
}

inline std::vector<ImagePair> pairs_of(const std::vector<NamedPair>& named) {
  std::vector<ImagePair> out;
  out.reserve(named.size());
  for (const auto& n : named) out.push_back(n.pair);
  return out;
}

}  // namespace alut
