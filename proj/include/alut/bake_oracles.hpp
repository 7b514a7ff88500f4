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

#include <functional>
#include <span>
#include <string>

#include "alut/error.hpp"
#include "alut/orientation.hpp"

namespace alut {

// Closed-form table generators used by `alut bake` and the tests.
using BakeOracle = std::function<void(std::span<const double>, std::span<double>)>;

// Output = the anchor pixel (first patch input), replicated over m outputs.
inline BakeOracle identity_oracle() {
  return [](std::span<const double> p, std::span<double> out) {
    for (double& v : out) v = p[0];
  };
}

inline BakeOracle constant_oracle(double value) {
  return [value](std::span<const double>, std::span<double> out) {
    for (double& v : out) v = value;
  };
}

// Super-resolution from the bilinear surface through a square 2x2 patch
// (anchor, right, below, below-right), evaluated at the centres of the
// anchor's scale x scale sub-pixels. Reproduces linear ramps exactly.
inline BakeOracle planar_sr_oracle(int scale) {
  return [scale](std::span<const double> p, std::span<double> out) {
    if (p.size() != 4) throw ShapeError("planar SR oracle needs a 2x2 patch");
    if (static_cast<int>(out.size()) != scale * scale) throw ShapeError("planar SR oracle output size mismatch");
    for (int br = 0; br < scale; ++br) {
      const double y = (br + 0.5) / scale - 0.5;
      for (int bc = 0; bc < scale; ++bc) {
        const double x = (bc + 0.5) / scale - 0.5;
        out[br * scale + bc] =
            p[0] * (1 - y) * (1 - x) + p[1] * (1 - y) * x + p[2] * y * (1 - x) + p[3] * y * x;
      }
    }
  };
}

inline BakeOracle oracle_by_name(const std::string& name, int scale, double constant) {
  if (name == "identity") return identity_oracle();
  if (name == "constant") return constant_oracle(constant);
  if (name == "zero-residual") return constant_oracle(0.0);
  if (name == "planar-sr") return planar_sr_oracle(scale);
  throw DomainError("unknown oracle '" + name + "' (expected identity, constant, zero-residual, planar-sr)");
}

}  // namespace alut
