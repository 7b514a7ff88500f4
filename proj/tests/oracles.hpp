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

// Test-only reference implementations. Deliberately naive and independent of
// the library's fast paths.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "alut/lut.hpp"

namespace alut::testing {

// Multilinear interpolation by explicit 2^n corner enumeration with nested
// loops, written out for n = 4.
inline std::vector<double> naive_query4(const Lut& lut, const std::vector<double>& p) {
  const double width = static_cast<double>(lut.cell_width());
  int base[4];
  double frac[4];
  for (int d = 0; d < 4; ++d) {
    base[d] = static_cast<int>(std::floor(p[d] / width));
    frac[d] = p[d] / width - base[d];
  }
  const int side = lut.side();
  std::vector<double> out(lut.m(), 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int e = 0; e < 2; ++e) {
          const double w = (a ? frac[0] : 1 - frac[0]) * (b ? frac[1] : 1 - frac[1]) *
                           (c ? frac[2] : 1 - frac[2]) * (e ? frac[3] : 1 - frac[3]);
          const std::size_t idx =
              ((static_cast<std::size_t>(base[0] + a) * side + (base[1] + b)) * side + (base[2] + c)) * side +
              (base[3] + e);
          for (int ch = 0; ch < lut.m(); ++ch) out[ch] += w * lut.values()[idx * lut.m() + ch];
        }
  return out;
}

// Same for arbitrary n by recursion over dimensions.
inline void naive_query_rec(const Lut& lut, const std::vector<double>& p, int d, std::size_t idx, double w,
                            std::vector<double>& out) {
  if (d == lut.n()) {
    for (int ch = 0; ch < lut.m(); ++ch) out[ch] += w * lut.values()[idx * lut.m() + ch];
    return;
  }
  const double width = static_cast<double>(lut.cell_width());
  const int base = static_cast<int>(std::floor(p[d] / width));
  const double f = p[d] / width - base;
  naive_query_rec(lut, p, d + 1, idx * lut.side() + base, w * (1 - f), out);
  naive_query_rec(lut, p, d + 1, idx * lut.side() + base + 1, w * f, out);
}

inline std::vector<double> naive_query(const Lut& lut, const std::vector<double>& p) {
  std::vector<double> out(lut.m(), 0.0);
  naive_query_rec(lut, p, 0, 0, 1.0, out);
  return out;
}

// GMP on scalars evaluated in long double straight from the definition.
inline long double gmp_scalar_reference(const std::vector<long double>& x, long double tau,
                                        std::vector<long double>* weights = nullptr) {
  long double mean = 0;
  for (auto v : x) mean += v;
  mean /= x.size();
  std::vector<long double> e(x.size());
  long double sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = std::exp(-std::fabs(x[i] - mean) / tau);
    sum += e[i];
  }
  long double y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] /= sum;
    y += e[i] * x[i];
  }
  if (weights) *weights = e;
  return y;
}

}  // namespace alut::testing
