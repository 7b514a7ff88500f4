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

#include "alut/pooling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"

namespace alut {
namespace {

Predictions scalars(std::initializer_list<double> v) {
  Predictions xs;
  for (double x : v) xs.push_back(std::vector<double>{x});
  return xs;
}

TEST(FuseAverage, Basics) {
  EXPECT_EQ(fuse_average(scalars({0, 0, 0, 4})).output[0], 1.0);
  const auto same = fuse_average(scalars({7.5, 7.5, 7.5}));
  EXPECT_EQ(same.output[0], 7.5);
  // Three consistent estimates and one outlier at 56 average to 108.
  const auto diluted = fuse_average(scalars({130, 122, 124, 56}));
  EXPECT_EQ(diluted.output[0], 108.0);
  for (double w : diluted.weights) EXPECT_EQ(w, 0.25);
  EXPECT_THROW(fuse_average(Predictions{}), ShapeError);
}

TEST(FuseGmp, IdenticalInputs) {
  for (double tau : {1e-6, 1.0, 1e6}) {
    const auto r = fuse_gmp(scalars({42, 42, 42, 42}), tau);
    EXPECT_EQ(r.output[0], 42.0);
    for (double w : r.weights) EXPECT_EQ(w, 0.25);
  }
}

TEST(FuseGmp, HighTemperatureApproachesAverage) {
  EXPECT_NEAR(fuse_gmp(scalars({10, 20, 30, 40}), 1e9).output[0], 25.0, 1e-6);
}

TEST(FuseGmp, LowTemperatureSelectsEstimateNearestMean) {
  // Mean 112.75; 130 is nearest (17.25 away, 131 is 18.25 away).
  const auto r = fuse_gmp(scalars({130, 131, 134, 56}), 1e-6);
  EXPECT_NEAR(r.output[0], 130.0, 1e-9);
  EXPECT_GE(r.weights[0], 1.0 - 1e-6);
}

TEST(FuseGmp, UnitTemperatureMatchesHighPrecisionReference) {
  std::vector<long double> ref_w;
  const long double ref = testing::gmp_scalar_reference({130, 131, 134, 56}, 1.0L, &ref_w);
  const auto r = fuse_gmp(scalars({130, 131, 134, 56}), 1.0);
  EXPECT_NEAR(r.output[0], static_cast<double>(ref), 1e-12);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.weights[i], static_cast<double>(ref_w[i]), 1e-15);
  // Frozen from a 40-digit evaluation of the softmin definition.
  EXPECT_NEAR(r.weights[0], 0.72139918427396865, 1e-15);
  EXPECT_NEAR(r.weights[1], 0.26538792877224193, 1e-15);
  EXPECT_NEAR(r.weights[2], 0.013212886953789415, 1e-15);
  EXPECT_NEAR(r.weights[3], 5.0529338380457802e-18, 1e-30);
  EXPECT_NEAR(r.output[0], 130.31823947658740, 1e-11);
}

TEST(FuseGmp, NormsOverChannels) {
  Predictions xs;
  xs.push_back(std::vector<double>{0, 0});
  xs.push_back(std::vector<double>{3, 4});
  std::vector<double> d(2);
  consensus_distances(xs, Norm::kL2, d);
  EXPECT_DOUBLE_EQ(d[0], 2.5);
  EXPECT_DOUBLE_EQ(d[1], 2.5);
  consensus_distances(xs, Norm::kL1, d);
  EXPECT_DOUBLE_EQ(d[0], 3.5);
  EXPECT_DOUBLE_EQ(d[1], 3.5);
}

TEST(FuseGmp, RejectsBadArguments) {
  EXPECT_THROW(fuse_gmp(scalars({1, 2}), 0.0), DomainError);
  EXPECT_THROW(fuse_gmp(scalars({1, std::nan("")}), 1.0), NumericError);
}

TEST(FuseOap, ConstantTableEqualsAverage) {
  Lut coeff = Lut::real(5, 4, 4, 4);
  for (double& v : coeff.values()) v = 0.7;
  const auto xs = scalars({3, 9, 27, 81});
  const std::vector<double> patch = {10, 200, 33, 255};
  const auto oap = fuse_oap(xs, patch, coeff);
  const auto avg = fuse_average(xs);
  EXPECT_EQ(oap.output, avg.output);
  EXPECT_EQ(oap.weights, avg.weights);
}

TEST(FuseOap, SoftmaxOfLogits) {
  Lut coeff = Lut::real(5, 4, 4, 4);
  const std::vector<int> c = {1, 2, 3, 4};
  const std::size_t pt = coeff.point_index(c);
  coeff.values()[pt * 4 + 0] = std::log(3.0);
  const std::vector<double> patch = {32, 64, 96, 128};
  const auto r = fuse_oap(scalars({6, 0, 0, 0}), patch, coeff);
  EXPECT_NEAR(r.weights[0], 0.5, 1e-15);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(r.weights[i], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(r.output[0], 3.0, 1e-14);
}

TEST(FuseOap, ExportedWeightsNormalizeBySum) {
  Lut coeff = Lut::integer(5, 4, 4, 8, false, 4);
  for (std::size_t p = 0; p < coeff.point_count(); ++p) coeff.values()[p * 4] = 255.0;
  const std::vector<double> patch = {1, 2, 3, 4};
  const auto r = fuse_oap(scalars({11, 22, 33, 44}), patch, coeff);
  EXPECT_EQ(r.weights, (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(r.output[0], 11.0);

  Lut zero = Lut::integer(5, 4, 4, 8, false, 4);
  const auto u = fuse_oap(scalars({11, 22, 33, 44}), patch, zero);
  for (double w : u.weights) EXPECT_EQ(w, 0.25);
}

TEST(FuseOap, RejectsMismatches) {
  const Lut coeff = Lut::real(5, 4, 3);
  const std::vector<double> patch = {1, 2, 3, 4};
  EXPECT_THROW(fuse_oap(scalars({1, 2, 3, 4}), patch, coeff), ShapeError);
  const Lut coeff4 = Lut::real(5, 4, 4);
  const std::vector<double> short_patch = {1, 2};
  EXPECT_THROW(fuse_oap(scalars({1, 2, 3, 4}), short_patch, coeff4), ShapeError);
}

TEST(SimplexCheck, Examples) {
  EXPECT_TRUE(simplex_project_check(std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_FALSE(simplex_project_check(std::vector<double>{0.5, 0.5, 0.1, -0.1}));
  EXPECT_FALSE(simplex_project_check(std::vector<double>{0.5, 0.4}));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 30.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> l = {g(rng), g(rng), g(rng), g(rng), g(rng)};
    softmax(l);
    EXPECT_TRUE(simplex_project_check(l));
  }
}

// Property: every fuser lands on the simplex and inside the input hull.
TEST(FusionProperties, SimplexAndConvexHull) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-50.0, 300.0);
  std::uniform_int_distribution<int> m_dist(1, 4);
  Lut coeff = Lut::real(6, 2, 4, 4);
  std::normal_distribution<double> g(0.0, 3.0);
  for (double& v : coeff.values()) v = g(rng);
  for (int t = 0; t < 2000; ++t) {
    const int m = m_dist(rng);
    Predictions xs;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> x(m);
      for (double& v : x) v = u(rng);
      xs.push_back(x);
    }
    const std::vector<double> patch = {std::fmod(std::abs(u(rng)), 255.0), std::fmod(std::abs(u(rng)), 255.0)};
    const double tau = std::exp(std::uniform_real_distribution<double>(-5.0, 5.0)(rng));
    for (const auto& r : {fuse_average(xs), fuse_gmp(xs, tau, t % 2 ? Norm::kL1 : Norm::kL2), fuse_oap(xs, patch, coeff)}) {
      EXPECT_TRUE(simplex_project_check(r.weights));
      for (int ch = 0; ch < m; ++ch) {
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < 4; ++i) {
          lo = std::min(lo, xs.row(i)[ch]);
          hi = std::max(hi, xs.row(i)[ch]);
        }
        EXPECT_GE(r.output[ch], lo - 1e-9);
        EXPECT_LE(r.output[ch], hi + 1e-9);
      }
    }
  }
}

TEST(FusionProperties, TemperatureLimits) {
  // Unit-range inputs (normalized intensities).
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const auto xs = scalars({u(rng), u(rng), u(rng), u(rng)});
    EXPECT_LE(std::abs(fuse_gmp(xs, 1e6).output[0] - fuse_average(xs).output[0]), 1e-4);
    std::vector<double> d(4);
    consensus_distances(xs, Norm::kL2, d);
    std::vector<double> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[1] - sorted[0] < 20 * 1e-6) continue;  // not separable at this temperature
    const auto r = fuse_gmp(xs, 1e-6);
    const auto best = std::min_element(d.begin(), d.end()) - d.begin();
    EXPECT_GE(r.weights[best], 1.0 - 1e-6);
  }
}

TEST(FusionProperties, HighTemperatureDeviationIsFirstOrderInSpread) {
  // To first order, gmp - average = -(1/(k tau)) * sum u_i |u_i| with
  // u_i = x_i - mean, so at 8-bit scale tau must grow with spread^2.
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (int t = 0; t < 500; ++t) {
    const std::vector<double> v = {u(rng), u(rng), u(rng), u(rng)};
    const auto xs = scalars({v[0], v[1], v[2], v[3]});
    const double mean = (v[0] + v[1] + v[2] + v[3]) / 4;
    double first_order = 0.0;
    for (double x : v) first_order -= (x - mean) * std::abs(x - mean);
    first_order /= 4 * 1e6;
    const double dev = fuse_gmp(xs, 1e6).output[0] - fuse_average(xs).output[0];
    EXPECT_NEAR(dev, first_order, 1e-7 + 1e-3 * std::abs(first_order));
  }
}

TEST(FusionProperties, OutlierRobustnessSweep) {
  for (double v : {0.0, 60.0, 130.0, 200.0}) {
    for (double delta = -100.0; delta <= 100.0; delta += 0.5) {
      if (delta == 0.0) continue;
      const auto xs = scalars({v, v, v, v + delta});
      const double avg = std::abs(fuse_average(xs).output[0] - v);
      for (double frac : {0.25, 0.125, 0.01}) {
        const double tau = std::abs(delta) * frac;
        EXPECT_LT(std::abs(fuse_gmp(xs, tau).output[0] - v), avg) << "v=" << v << " delta=" << delta;
      }
    }
  }
}

TEST(FusionProperties, PermutationEquivariance) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v = {u(rng), u(rng), u(rng), u(rng)};
    std::vector<int> perm = {0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    Predictions a, b;
    for (int i = 0; i < 4; ++i) {
      a.push_back(std::vector<double>{v[i]});
      b.push_back(std::vector<double>{v[perm[i]]});
    }
    const auto ra = fuse_gmp(a, 5.0);
    const auto rb = fuse_gmp(b, 5.0);
    EXPECT_NEAR(ra.output[0], rb.output[0], 1e-9);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(rb.weights[i], ra.weights[perm[i]], 1e-12);
    EXPECT_NEAR(fuse_average(a).output[0], fuse_average(b).output[0], 1e-9);
  }
}

}  // namespace
}  // namespace alut
