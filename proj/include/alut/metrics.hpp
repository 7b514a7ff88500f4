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
#include <string>
#include <vector>

#include "alut/error.hpp"
#include "alut/image.hpp"

namespace alut {

// Returned for identical images instead of +inf.
inline constexpr double kPsnrCap = 100.0;

namespace detail {

inline void require_same_shape(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError("images differ in size: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                     " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

inline double psnr_from_mse(double mse, double peak) {
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

}  // namespace detail

inline double mse(const Image& a, const Image& b) {
  detail::require_same_shape(a, b);
  double acc = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pa.size());
}

inline double psnr(const Image& a, const Image& b, double peak = 255.0) {
  return detail::psnr_from_mse(mse(a, b), peak);
}

// Mean SSIM over all positions where an 11x11 Gaussian window (sigma 1.5)
// fits entirely inside the image.
inline double ssim(const Image& a, const Image& b, double peak = 255.0) {
  detail::require_same_shape(a, b);
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  if (a.width() < kWin || a.height() < kWin) throw ShapeError("SSIM needs images of at least 11x11");
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  std::vector<double> g(kWin);
  double gsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double x = i - kWin / 2;
    g[i] = std::exp(-(x * x) / (2 * kSigma * kSigma));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  const int ow = a.width() - kWin + 1;
  const int oh = a.height() - kWin + 1;
  // Separable 'valid' filtering of the five moment images.
  auto filter = [&](auto&& pixel) {
    std::vector<double> rows(static_cast<std::size_t>(a.height()) * ow);
    for (int r = 0; r < a.height(); ++r) {
      for (int c = 0; c < ow; ++c) {
        double acc = 0.0;
        for (int t = 0; t < kWin; ++t) acc += g[t] * pixel(r, c + t);
        rows[static_cast<std::size_t>(r) * ow + c] = acc;
      }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int r = 0; r < oh; ++r) {
      for (int c = 0; c < ow; ++c) {
        double acc = 0.0;
        for (int t = 0; t < kWin; ++t) acc += g[t] * rows[static_cast<std::size_t>(r + t) * ow + c];
        out[static_cast<std::size_t>(r) * ow + c] = acc;
      }
    }
    return out;
  };
  const auto mu_a = filter([&](int r, int c) { return a.at(r, c); });
  const auto mu_b = filter([&](int r, int c) { return b.at(r, c); });
  const auto aa = filter([&](int r, int c) { return a.at(r, c) * a.at(r, c); });
  const auto bb = filter([&](int r, int c) { return b.at(r, c) * b.at(r, c); });
  const auto ab = filter([&](int r, int c) { return a.at(r, c) * b.at(r, c); });

  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double va = aa[i] - ma * ma;
    const double vb = bb[i] - mb * mb;
    const double cov = ab[i] - ma * mb;
    total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

// Blocking effect factor of `img` for a block grid of size `block`: how
// much larger the mean squared step across block boundaries is than across
// the remaining neighbour pairs, scaled by log2(block)/log2(min(W,H)).
inline double blocking_effect_factor(const Image& img, int block = 8) {
  if (block < 2) throw DomainError("block size must be >= 2");
  double boundary = 0.0, inner = 0.0;
  std::size_t n_boundary = 0, n_inner = 0;
  auto visit = [&](double d, bool on_boundary) {
    if (on_boundary) {
      boundary += d * d;
      ++n_boundary;
    } else {
      inner += d * d;
      ++n_inner;
    }
  };
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c + 1 < img.width(); ++c) visit(img.at(r, c) - img.at(r, c + 1), (c + 1) % block == 0);
  }
  for (int r = 0; r + 1 < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) visit(img.at(r, c) - img.at(r + 1, c), (r + 1) % block == 0);
  }
  if (n_boundary == 0 || n_inner == 0) return 0.0;
  const double db = boundary / static_cast<double>(n_boundary);
  const double dbc = inner / static_cast<double>(n_inner);
  if (db <= dbc) return 0.0;
  const double eta = std::log2(static_cast<double>(block)) /
                     std::log2(static_cast<double>(std::min(img.width(), img.height())));
  return eta * (db - dbc);
}

// PSNR with the blocking effect factor of the reconstruction `test` added
// to the MSE against `reference`.
inline double psnr_b(const Image& reference, const Image& test, int block = 8, double peak = 255.0) {
  const double e = mse(reference, test);
  if (e <= 0.0) return kPsnrCap;
  return detail::psnr_from_mse(e + blocking_effect_factor(test, block), peak);
}

// BT.601 studio-swing luma of an 8-bit RGB raster, unrounded.
inline Image rgb_to_y(const RgbImage& rgb) {
  if (rgb.data.size() != static_cast<std::size_t>(rgb.width) * rgb.height * 3) {
    throw ShapeError("RGB buffer must hold exactly 3 channels per pixel");
  }
  Image y(rgb.width, rgb.height);
  auto out = y.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = rgb.data[3 * i], g = rgb.data[3 * i + 1], b = rgb.data[3 * i + 2];
    out[i] = 16.0 + (65.481 * r + 128.553 * g + 24.966 * b) / 255.0;
  }
  return y;
}

struct MetricValues {
  double psnr = 0.0;
  double ssim = 0.0;
  double psnr_b = 0.0;
};

// All three metrics after removing `shave_border` pixels from each side.
inline MetricValues evaluate(const Image& reference, const Image& test, int shave_border = 0) {
  detail::require_same_shape(reference, test);
  const Image a = shave_border > 0 ? shave(reference, shave_border) : reference;
  const Image b = shave_border > 0 ? shave(test, shave_border) : test;
  MetricValues v;
  v.psnr = psnr(a, b);
  v.ssim = ssim(a, b);
  v.psnr_b = psnr_b(a, b);
  return v;
}

}  // namespace alut
