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
#include <string>
#include <vector>

#include "alut/error.hpp"
#include "alut/image.hpp"
#include "alut/resample.hpp"

namespace alut {

struct DegradationRecipe {
  enum class Kind { kBicubicDown, kAwgn };
  Kind kind = Kind::kBicubicDown;
  int scale = 2;
  double sigma = 15.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (kind == Kind::kBicubicDown && (scale < 2 || scale > 4)) throw DomainError("bicubic_down scale must be 2, 3 or 4");
    if (kind == Kind::kAwgn && !(sigma > 0.0 && std::isfinite(sigma))) throw DomainError("awgn sigma must be positive");
  }

  std::string to_string() const {
    if (kind == Kind::kBicubicDown) return "bicubic_down:" + std::to_string(scale);
    std::string s = std::to_string(sigma);
    s.erase(s.find_last_not_of('0') + 1);
    if (s.back() == '.') s.pop_back();
    return "awgn:" + s + ":" + std::to_string(seed);
  }
};

// "bicubic_down:<scale>" or "awgn:<sigma>[:<seed>]".
inline DegradationRecipe parse_recipe(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  DegradationRecipe r;
  try {
    std::size_t used = 0;
    if (parts[0] == "bicubic_down" && parts.size() == 2) {
      r.kind = DegradationRecipe::Kind::kBicubicDown;
      r.scale = std::stoi(parts[1], &used);
      if (used != parts[1].size()) throw DomainError("");
    } else if (parts[0] == "awgn" && (parts.size() == 2 || parts.size() == 3)) {
      r.kind = DegradationRecipe::Kind::kAwgn;
      r.sigma = std::stod(parts[1], &used);
      if (used != parts[1].size()) throw DomainError("");
      if (parts.size() == 3) {
        r.seed = std::stoull(parts[2], &used);
        if (used != parts[2].size()) throw DomainError("");
      }
    } else {
      throw DomainError("");
    }
  } catch (const std::exception&) {
    throw DomainError("invalid degradation recipe '" + text + "'");
  }
  r.validate();
  return r;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Standard normal deviate that depends only on (seed, image, pixel), so
// images can be degraded in any order or in parallel.
inline double counter_gaussian(std::uint64_t seed, std::uint64_t image, std::uint64_t pixel) {
  const std::uint64_t key = splitmix64(splitmix64(seed ^ splitmix64(image)) ^ pixel);
  const std::uint64_t a = splitmix64(key);
  const std::uint64_t b = splitmix64(a);
  // 53-bit uniforms; u1 in (0,1] keeps the log finite.
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Adds N(0, sigma^2) without clamping.
inline Image add_gaussian_noise(const Image& img, double sigma, std::uint64_t seed, std::uint64_t image_index) {
  Image out = img;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] += sigma * counter_gaussian(seed, image_index, i);
  return out;
}

// Applies a recipe; output is clamped and rounded to 8-bit levels.
inline Image degrade(const Image& clean, const DegradationRecipe& recipe, std::uint64_t image_index = 0) {
  recipe.validate();
  if (recipe.kind == DegradationRecipe::Kind::kBicubicDown) {
    if (clean.width() % recipe.scale || clean.height() % recipe.scale) {
      throw ShapeError("image " + std::to_string(clean.width()) + "x" + std::to_string(clean.height()) +
                       " is not divisible by scale " + std::to_string(recipe.scale));
    }
    return quantize(bicubic_resize(clean, 1.0 / recipe.scale));
  }
  return quantize(add_gaussian_noise(clean, recipe.sigma, recipe.seed, image_index));
}

}  // namespace alut
