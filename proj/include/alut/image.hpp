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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "alut/error.hpp"

namespace alut {

// Single-channel raster in row-major order. Pixels are kept as doubles so
// intermediate stages can carry unclamped values; 8-bit storage happens at
// I/O time through quantize().
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw ShapeError("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                       std::to_string(height));
    }
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double& at(int row, int col) { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
  double at(int row, int col) const {
    return pixels_[static_cast<std::size_t>(row) * width_ + col];
  }

  // Edge-clamped read.
  double clamped(int row, int col) const {
    row = std::clamp(row, 0, height_ - 1);
    col = std::clamp(col, 0, width_ - 1);
    return at(row, col);
  }

  bool contains(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

// Round half away from zero and clamp to [lo, hi].
inline double round_clamp(double v, double lo, double hi) {
  return std::clamp(std::round(v), lo, hi);
}

// Final 8-bit quantization of a working-precision image.
inline Image quantize(const Image& img) {
  Image out = img;
  for (double& p : out.pixels()) p = round_clamp(p, 0.0, 255.0);
  return out;
}

inline Image pad_replicate(const Image& img, int border) {
  if (border < 0) throw DomainError("negative padding width");
  Image out(img.width() + 2 * border, img.height() + 2 * border);
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) out.at(r, c) = img.clamped(r - border, c - border);
  }
  return out;
}

inline Image crop(const Image& img, int row, int col, int height, int width) {
  if (row < 0 || col < 0 || row + height > img.height() || col + width > img.width()) {
    throw BoundsError("crop window exceeds image");
  }
  Image out(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out.at(r, c) = img.at(row + r, col + c);
  }
  return out;
}

// Drop `border` pixels from every side.
inline Image shave(const Image& img, int border) {
  return crop(img, border, border, img.height() - 2 * border, img.width() - 2 * border);
}

// Counter-clockwise quarter turns of the whole raster.
inline Image rotate90(const Image& img, int quarter_turns = 1) {
  int turns = ((quarter_turns % 4) + 4) % 4;
  Image cur = img;
  for (int t = 0; t < turns; ++t) {
    Image next(cur.height(), cur.width());
    for (int r = 0; r < next.height(); ++r) {
      for (int c = 0; c < next.width(); ++c) next.at(r, c) = cur.at(c, cur.width() - 1 - r);
    }
    cur = std::move(next);
  }
  return cur;
}

inline Image flip_horizontal(const Image& img) {
  Image out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out.at(r, c) = img.at(r, img.width() - 1 - c);
  }
  return out;
}

// The eight elements of the dihedral group acting on a raster: index & 3
// quarter turns, preceded by a horizontal flip when index & 4.
inline Image dihedral(const Image& img, int index) {
  return rotate90((index & 4) ? flip_horizontal(img) : img, index & 3);
}

// Interleaved 8-bit RGB raster, only used at the I/O boundary.
// Degraded input and its clean reference.
struct ImagePair {
  Image degraded;
  Image clean;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> data;  // r,g,b per pixel
};

}  // namespace alut
