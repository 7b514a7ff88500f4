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
#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "alut/error.hpp"
#include "alut/image.hpp"
#include "alut/lut.hpp"

namespace alut {

struct Offset {
  int dr = 0;
  int dc = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

// Counter-clockwise quarter turns in (row, col) coordinates with rows
// pointing down: (dr, dc) -> (-dc, dr).
inline Offset rotate_offset(Offset o, int quarter_turns) {
  const int turns = ((quarter_turns % 4) + 4) % 4;
  for (int t = 0; t < turns; ++t) o = {-o.dc, o.dr};
  return o;
}

// Pixel displacements, relative to the anchor, that form one table query.
struct KernelPattern {
  std::string name;
  std::vector<Offset> offsets;

  int size() const { return static_cast<int>(offsets.size()); }

  // Largest |dr| or |dc|; rotation preserves it.
  int reach() const {
    int r = 0;
    for (const auto& o : offsets) r = std::max({r, std::abs(o.dr), std::abs(o.dc)});
    return r;
  }

  void validate() const {
    if (offsets.empty()) throw ShapeError("kernel pattern '" + name + "' has no offsets");
    if (offsets.size() > static_cast<std::size_t>(kMaxInputs)) {
      throw ShapeError("kernel pattern '" + name + "' exceeds " + std::to_string(kMaxInputs) + " offsets");
    }
    if (std::find(offsets.begin(), offsets.end(), Offset{0, 0}) == offsets.end()) {
      throw ShapeError("kernel pattern '" + name + "' lacks the anchor offset (0,0)");
    }
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      for (std::size_t j = i + 1; j < offsets.size(); ++j) {
        if (offsets[i] == offsets[j]) throw ShapeError("kernel pattern '" + name + "' repeats an offset");
      }
    }
  }
};

inline KernelPattern square_pattern() { return {"S", {{0, 0}, {0, 1}, {1, 0}, {1, 1}}}; }
inline KernelPattern diagonal_pattern() { return {"D", {{0, 0}, {1, 1}, {2, 2}, {3, 3}}}; }
inline KernelPattern y_pattern() { return {"Y", {{0, 0}, {1, 1}, {1, -1}, {2, 0}}}; }

inline KernelPattern pattern_by_name(const std::string& name) {
  if (name == "S") return square_pattern();
  if (name == "D") return diagonal_pattern();
  if (name == "Y") return y_pattern();
  throw DomainError("unknown kernel pattern '" + name + "'");
}

// The rotations a patch is processed under. Default: all four quarter turns.
struct OrientationSet {
  std::vector<int> rotations = {0, 1, 2, 3};

  int k() const { return static_cast<int>(rotations.size()); }

  void validate() const {
    if (rotations.empty()) throw ShapeError("orientation set is empty");
    for (std::size_t i = 0; i < rotations.size(); ++i) {
      if (rotations[i] < 0 || rotations[i] > 3) throw DomainError("rotation index must be in [0,3]");
      for (std::size_t j = i + 1; j < rotations.size(); ++j) {
        if (rotations[i] == rotations[j]) throw ShapeError("orientation set repeats a rotation");
      }
    }
  }
};

// Pixel values at anchor + rot^r(offset) for every pattern offset.
inline void rotate_patch(const Image& img, int row, int col, const KernelPattern& pattern, int rotation,
                         std::span<double> out) {
  if (static_cast<int>(out.size()) != pattern.size()) throw ShapeError("patch buffer size mismatch");
  for (int i = 0; i < pattern.size(); ++i) {
    const Offset o = rotate_offset(pattern.offsets[i], rotation);
    const int r = row + o.dr;
    const int c = col + o.dc;
    if (!img.contains(r, c)) {
      throw BoundsError("rotated offset (" + std::to_string(o.dr) + "," + std::to_string(o.dc) +
                        ") from anchor (" + std::to_string(row) + "," + std::to_string(col) +
                        ") leaves the image; pad it first");
    }
    out[i] = img.at(r, c);
  }
}

inline std::vector<double> rotate_patch(const Image& img, int row, int col, const KernelPattern& pattern,
                                        int rotation) {
  std::vector<double> out(static_cast<std::size_t>(pattern.size()));
  rotate_patch(img, row, col, pattern, rotation, out);
  return out;
}

// Side length of a square output block of m values; m = 1 is a 1x1 block.
inline int block_side(int m) {
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (m < 1 || s * s != m) throw ShapeError("output count " + std::to_string(m) + " is not a square block");
  return s;
}

// Rotates a row-major square block counter-clockwise by `quarter_turns`.
inline void rotate_block(std::span<const double> block, int quarter_turns, std::span<double> out) {
  const int m = static_cast<int>(block.size());
  if (out.size() != block.size()) throw ShapeError("block buffer size mismatch");
  const int s = block_side(m);
  const int turns = ((quarter_turns % 4) + 4) % 4;
  for (int r = 0; r < s; ++r) {
    for (int c = 0; c < s; ++c) {
      int sr = r;
      int sc = c;
      // Destination (r,c) of a CCW turn reads source (c, s-1-r).
      for (int t = 0; t < turns; ++t) {
        const int nr = sc;
        const int nc = s - 1 - sr;
        sr = nr;
        sc = nc;
      }
      out[r * s + c] = block[sr * s + sc];
    }
  }
}

// Maps a table output computed on the rotation-r patch back into the image
// frame. Sampling at rot^r(offset) views the content turned clockwise by r,
// so the block is turned back counter-clockwise by r.
inline void unrotate_output(std::span<const double> block, int rotation, std::span<double> out) {
  rotate_block(block, rotation, out);
}

inline std::vector<double> unrotate_output(std::span<const double> block, int rotation) {
  std::vector<double> out(block.size());
  unrotate_output(block, rotation, out);
  return out;
}

// k oriented predictions of m values each, stored row per orientation.
class Predictions {
 public:
  Predictions() = default;
  Predictions(int k, int m) : k_(k), m_(m), data_(static_cast<std::size_t>(k) * m, 0.0) {}
  Predictions(std::initializer_list<std::vector<double>> rows) {
    for (const auto& r : rows) push_back(r);
  }

  void push_back(std::span<const double> row) {
    if (k_ == 0) m_ = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != m_) throw ShapeError("prediction rows differ in length");
    data_.insert(data_.end(), row.begin(), row.end());
    ++k_;
  }

  int k() const { return k_; }
  int m() const { return m_; }
  std::span<double> row(int i) { return {data_.data() + static_cast<std::size_t>(i) * m_, static_cast<std::size_t>(m_)}; }
  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * m_, static_cast<std::size_t>(m_)};
  }
  std::span<const double> data() const { return data_; }

 private:
  int k_ = 0;
  int m_ = 0;
  std::vector<double> data_;
};

// One table per pattern; predictions of the patterns are averaged before
// the block is unrotated.
struct PatternTable {
  const KernelPattern* pattern;
  const Lut* lut;
};

inline void oriented_predictions(const Image& img, int row, int col, std::span<const PatternTable> tables,
                                 const OrientationSet& orientations, Predictions& out) {
  if (tables.empty()) throw ShapeError("no restoration tables");
  const int m = tables.front().lut->m();
  for (const auto& t : tables) {
    if (t.lut->n() != t.pattern->size()) {
      throw ShapeError("table expects " + std::to_string(t.lut->n()) + " inputs, pattern '" + t.pattern->name +
                       "' has " + std::to_string(t.pattern->size()));
    }
    if (t.lut->m() != m) throw ShapeError("tables of one stage disagree on outputs per entry");
  }
  const int k = orientations.k();
  if (out.k() != k || out.m() != m) out = Predictions(k, m);
  std::array<double, kMaxInputs> patch{};
  std::vector<double> acc(static_cast<std::size_t>(m));
  std::vector<double> tmp(static_cast<std::size_t>(m));
  const double inv_patterns = 1.0 / static_cast<double>(tables.size());
  for (int i = 0; i < k; ++i) {
    const int r = orientations.rotations[i];
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& t : tables) {
      std::span<double> p(patch.data(), static_cast<std::size_t>(t.pattern->size()));
      rotate_patch(img, row, col, *t.pattern, r, p);
      query(*t.lut, p, tmp);
      for (int ch = 0; ch < m; ++ch) acc[ch] += tmp[ch];
    }
    if (tables.size() > 1) {
      for (double& v : acc) v *= inv_patterns;
    }
    unrotate_output(acc, r, out.row(i));
  }
}

inline Predictions oriented_predictions(const Image& img, int row, int col, const KernelPattern& pattern,
                                        const Lut& lut, const OrientationSet& orientations) {
  const PatternTable t{&pattern, &lut};
  Predictions out;
  oriented_predictions(img, row, col, std::span<const PatternTable>(&t, 1), orientations, out);
  return out;
}

}  // namespace alut
