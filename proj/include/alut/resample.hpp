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
#include <vector>

#include "alut/error.hpp"
#include "alut/image.hpp"

namespace alut {

// Keys cubic convolution kernel with a = -0.5.
inline double keys_cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace detail {

struct Contribution {
  std::vector<int> index;
  std::vector<double> weight;
};

// Per-output-sample taps along one axis. When shrinking, the kernel is
// stretched by 1/scale so it low-passes; taps outside the source are
// clamped to the edge.
inline std::vector<Contribution> axis_contributions(int in_size, int out_size, double scale) {
  const double kscale = scale < 1.0 ? scale : 1.0;
  const double support = 2.0 / kscale;
  std::vector<Contribution> out(static_cast<std::size_t>(out_size));
  for (int o = 0; o < out_size; ++o) {
    const double center = (o + 0.5) / scale - 0.5;
    const int first = static_cast<int>(std::floor(center - support));
    const int last = static_cast<int>(std::ceil(center + support));
    auto& c = out[o];
    double sum = 0.0;
    for (int j = first; j <= last; ++j) {
      const double w = keys_cubic((center - j) * kscale) * kscale;
      if (w == 0.0) continue;
      c.index.push_back(std::clamp(j, 0, in_size - 1));
      c.weight.push_back(w);
      sum += w;
    }
    for (double& w : c.weight) w /= sum;
  }
  return out;
}

}  // namespace detail

// Separable bicubic resampling to an explicit size. `scale` is the sampling
// ratio used to place taps; it defaults to out/in per axis.
inline Image bicubic_resize(const Image& img, int out_width, int out_height, double scale_x = 0.0,
                            double scale_y = 0.0) {
  if (out_width < 1 || out_height < 1) throw ShapeError("bicubic target size must be at least 1x1");
  if (scale_x <= 0.0) scale_x = static_cast<double>(out_width) / img.width();
  if (scale_y <= 0.0) scale_y = static_cast<double>(out_height) / img.height();
  const auto cols = detail::axis_contributions(img.width(), out_width, scale_x);
  const auto rows = detail::axis_contributions(img.height(), out_height, scale_y);

  Image tmp(out_width, img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < out_width; ++c) {
      const auto& ct = cols[c];
      double acc = 0.0;
      for (std::size_t t = 0; t < ct.index.size(); ++t) acc += ct.weight[t] * img.at(r, ct.index[t]);
      tmp.at(r, c) = acc;
    }
  }
  Image out(out_width, out_height);
  for (int r = 0; r < out_height; ++r) {
    const auto& rt = rows[r];
    for (int c = 0; c < out_width; ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < rt.index.size(); ++t) acc += rt.weight[t] * tmp.at(rt.index[t], c);
      out.at(r, c) = acc;
    }
  }
  return out;
}

inline Image bicubic_resize(const Image& img, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("bicubic scale must be positive");
  const int w = static_cast<int>(std::lround(img.width() * scale));
  const int h = static_cast<int>(std::lround(img.height() * scale));
  if (w < 1 || h < 1) throw ShapeError("bicubic scale collapses the image");
  return bicubic_resize(img, w, h, scale, scale);
}

}  // namespace alut
