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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "alut/error.hpp"
#include "alut/image.hpp"
#include "alut/resample.hpp"

namespace alut {

// Soft-edged stripes at angle theta (radians) over a linear ramp.
inline Image stripe_image(int size, double theta, double period, double phase, double contrast, double sharpness,
                          double mean, double gx, double gy) {
  Image img(size, size);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (int r = 0; r < size; ++r) {
    for (int col = 0; col < size; ++col) {
      const double t = 2.0 * std::numbers::pi * (col * c + r * s) / period + phase;
      const double wave = std::tanh(sharpness * std::sin(t)) / std::tanh(sharpness);
      img.at(r, col) = mean + gx * (col - size / 2.0) + gy * (r - size / 2.0) + contrast * wave;
    }
  }
  return quantize(img);
}

inline Image ramp_image(int size, double offset, double gx, double gy) {
  return stripe_image(size, 0.0, 1.0, 0.0, 0.0, 1.0, offset, gx, gy);
}

// Seeded corpus of soft oriented stripes over linear ramps, 8-bit levels.
inline std::vector<Image> synthetic_corpus(int count, int size, std::uint64_t seed) {
  if (count < 1 || size < 4) throw DomainError("corpus needs count >= 1 and size >= 4");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  std::vector<Image> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double gx = range(-1.0, 1.0) * 80.0 / size;
    const double gy = range(-1.0, 1.0) * 80.0 / size;
    out.push_back(stripe_image(size, range(0.0, std::numbers::pi), range(4.0, 12.0), range(0.0, 6.3),
                               range(20.0, 80.0), range(0.5, 5.0), range(90.0, 165.0), gx, gy));
  }
  return out;
}

// Super-resolution pairs: the low-resolution input is the bicubic
// downscale of each image, rounded to 8-bit.
inline std::vector<ImagePair> downscale_pairs(std::span<const Image> clean, int scale) {
  if (scale < 2) throw DomainError("scale must be >= 2");
  std::vector<ImagePair> out;
  for (const Image& hr : clean) {
    if (hr.width() % scale || hr.height() % scale) throw ShapeError("image size is not a multiple of the scale");
    out.push_back({quantize(bicubic_resize(hr, 1.0 / scale)), hr});
  }
  return out;
}

}  // namespace alut
