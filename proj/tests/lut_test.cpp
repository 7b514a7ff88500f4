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

#include "alut/lut.hpp"

#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "oracles.hpp"

namespace alut {
namespace {

TEST(StorageBytes, MatchesPublishedTableSizes) {
  EXPECT_EQ(storage_bytes(4, 4, 16, 8), 1336336u);  // x4 SR table, 1.274 MB
  EXPECT_EQ(storage_bytes(4, 4, 1, 8), 83521u);     // restoration table, 81.563 KB
  EXPECT_EQ(storage_bytes(5, 4, 4, 8), 26244u);     // tiny coefficient table
  EXPECT_NEAR(storage_bytes(4, 4, 16, 8) / 1048576.0, 1.274, 5e-4);
  EXPECT_NEAR(storage_bytes(4, 4, 1, 8) / 1024.0, 81.563, 5e-4);
}

TEST(StorageBytes, RejectsInvalidArguments) {
  EXPECT_THROW(storage_bytes(4, 4, 1, 12), DomainError);
  EXPECT_THROW(storage_bytes(0, 4, 1, 8), DomainError);
  EXPECT_THROW(storage_bytes(8, 4, 1, 8), DomainError);
  EXPECT_THROW(storage_bytes(4, 0, 1, 8), DomainError);
  EXPECT_THROW(storage_bytes(4, 4, 0, 8), DomainError);
  EXPECT_EQ(storage_bytes(4, 4, 1, 16), 2u * 83521u);
}

TEST(Decompose, SplitsIntoCellAndFraction) {
  const std::vector<double> v = {0, 16, 32, 255};
  const auto lq = decompose(v, 4);
  EXPECT_EQ(lq.base[0], 0);
  EXPECT_EQ(lq.base[1], 1);
  EXPECT_EQ(lq.base[2], 2);
  EXPECT_EQ(lq.base[3], 15);
  EXPECT_EQ(lq.fractions[0], 0.0);
  EXPECT_EQ(lq.fractions[1], 0.0);
  EXPECT_EQ(lq.fractions[2], 0.0);
  EXPECT_EQ(lq.fractions[3], 0.9375);

  const std::vector<double> v2 = {31, 32};
  const auto lq2 = decompose(v2, 5);
  EXPECT_EQ(lq2.base[0], 0);
  EXPECT_EQ(lq2.base[1], 1);
  EXPECT_EQ(lq2.fractions[0], 0.96875);
  EXPECT_EQ(lq2.fractions[1], 0.0);

  const std::vector<double> v3 = {8.0};
  EXPECT_EQ(decompose(v3, 4).fractions[0], 0.5);
}

TEST(Decompose, RejectsOutOfRange) {
  const std::vector<double> hi = {0, 256};
  const std::vector<double> lo = {-0.5};
  const std::vector<double> nan = {std::nan("")};
  EXPECT_THROW(decompose(hi, 4), DomainError);
  EXPECT_THROW(decompose(lo, 4), DomainError);
  EXPECT_THROW(decompose(nan, 4), DomainError);
}

TEST(Query, LatticePointReturnsStoredEntry) {
  Lut lut = Lut::integer(4, 4, 2);
  std::mt19937_64 rng(1);
  for (double& v : lut.values()) v = static_cast<double>(rng() % 256);
  const std::vector<int> coords = {3, 0, 15, 7};
  const std::vector<double> patch = {48, 0, 240, 112};
  const auto out = query(lut, patch);
  const std::size_t pt = lut.point_index(coords);
  EXPECT_EQ(out[0], lut.value(pt, 0));
  EXPECT_EQ(out[1], lut.value(pt, 1));
}

TEST(Query, ReproducesLinearFunctions) {
  const double a[4] = {0.2, 0.3, 0.1, 0.3};
  auto g = [&](std::span<const double> p, std::span<double> out) {
    out[0] = a[0] * p[0] + a[1] * p[1] + a[2] * p[2] + a[3] * p[3];
  };
  const Lut real = bake_real(g, 4, 4, 1);
  const Lut quant = bake(g, 4, 4, 1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> p = {u(rng), u(rng), u(rng), u(rng)};
    const double expect = a[0] * p[0] + a[1] * p[1] + a[2] * p[2] + a[3] * p[3];
    EXPECT_NEAR(query(real, p)[0], expect, 1e-10);
    EXPECT_LE(std::abs(query(quant, p)[0] - expect), 0.5 + 1e-12);
  }
}

TEST(Query, MatchesNaiveCornerEnumeration) {
  Lut lut = Lut::real(4, 4, 3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(-300.0, 300.0);
  for (double& v : lut.values()) v = val(rng);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> p = {u(rng), u(rng), u(rng), u(rng)};
    if (t % 7 == 0) p[t % 4] = 255.0;
    const auto fast = query(lut, p);
    const auto slow = testing::naive_query4(lut, p);
    for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(fast[ch], slow[ch], 1e-12 * std::max(1.0, std::abs(slow[ch])));
  }
}

TEST(Query, GeneralDimensionsMatchRecursiveOracle) {
  for (int n : {1, 2, 3, 5}) {
    Lut lut = Lut::real(6 - (n > 3), n, 2);
    std::mt19937_64 rng(100 + n);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    for (double& v : lut.values()) v = val(rng);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> p(n);
      for (double& x : p) x = u(rng);
      const auto fast = query(lut, p);
      const auto slow = testing::naive_query(lut, p);
      for (int ch = 0; ch < 2; ++ch) EXPECT_NEAR(fast[ch], slow[ch], 1e-12 * std::max(1.0, std::abs(slow[ch])));
    }
  }
}

TEST(Query, LipschitzWithinCells) {
  Lut lut = Lut::integer(4, 2, 1);
  std::mt19937_64 rng(3);
  for (double& v : lut.values()) v = static_cast<double>(rng() % 256);
  double max_diff = 0.0;
  for (int i = 0; i < lut.side(); ++i) {
    for (int j = 0; j < lut.side(); ++j) {
      const std::vector<int> c = {i, j};
      const double e = lut.value(lut.point_index(c), 0);
      if (i + 1 < lut.side()) {
        const std::vector<int> c2 = {i + 1, j};
        max_diff = std::max(max_diff, std::abs(e - lut.value(lut.point_index(c2), 0)));
      }
      if (j + 1 < lut.side()) {
        const std::vector<int> c2 = {i, j + 1};
        max_diff = std::max(max_diff, std::abs(e - lut.value(lut.point_index(c2), 0)));
      }
    }
  }
  const double lipschitz = max_diff / lut.cell_width();
  std::uniform_real_distribution<double> u(0.0, 254.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> p = {u(rng), u(rng)};
    std::vector<double> p2 = p;
    const double eps = 0.37;
    p2[t % 2] += eps;
    EXPECT_LE(std::abs(query(lut, p)[0] - query(lut, p2)[0]), eps * lipschitz + 1e-9);
  }
}

TEST(Query, RejectsDimensionMismatch) {
  const Lut lut = Lut::integer(4, 4, 1);
  const std::vector<double> p = {1, 2, 3};
  EXPECT_THROW(query(lut, p), ShapeError);
}

TEST(Bake, IdentityOracleClampsTopRow) {
  const Lut lut = bake([](std::span<const double> p, std::span<double> out) { out[0] = p[0]; }, 4, 4, 1);
  for (int i = 0; i < 17; ++i) {
    const std::vector<int> c = {i, 5, 16, 2};
    EXPECT_EQ(lut.value(lut.point_index(c), 0), std::min(16.0 * i, 255.0));
  }
}

TEST(Bake, ConstantOracle) {
  const Lut lut = bake([](std::span<const double>, std::span<double> out) { out[0] = 128.0; }, 4, 4, 1);
  for (double v : lut.values()) EXPECT_EQ(v, 128.0);
}

TEST(Bake, LatticeQueriesEqualQuantizedOracle) {
  auto g = [](std::span<const double> p, std::span<double> out) {
    out[0] = 0.3 * p[0] - 0.7 * p[1] + 0.01 * p[0] * p[1] - 20.5;
    out[1] = std::sin(p[0] / 40.0) * 100.0;
  };
  const Lut lut = bake(g, 5, 2, 2, /*is_signed=*/true);
  std::vector<double> out(2);
  for (int i = 0; i < lut.side(); ++i) {
    for (int j = 0; j < lut.side(); ++j) {
      std::vector<double> p = {i * 32.0, j * 32.0};
      g(p, out);
      std::vector<double> qp = {std::min(p[0], 255.0), std::min(p[1], 255.0)};
      if (p[0] > 255.0 || p[1] > 255.0) continue;  // the top row is only reachable through interpolation
      const auto got = query(lut, qp);
      EXPECT_EQ(got[0], std::clamp(std::round(out[0]), -128.0, 127.0));
      EXPECT_EQ(got[1], std::clamp(std::round(out[1]), -128.0, 127.0));
    }
  }
}

TEST(Bake, RoundsHalfAwayFromZero) {
  Lut lut = Lut::integer(7, 1, 1, 8, true);
  EXPECT_EQ(lut.representable(-3.4), -3.0);
  EXPECT_EQ(lut.representable(-2.5), -3.0);
  EXPECT_EQ(lut.representable(2.5), 3.0);
  EXPECT_EQ(lut.representable(-200.0), -128.0);
  EXPECT_EQ(lut.representable(200.0), 127.0);
  lut.values()[0] = -3.0;
  EXPECT_EQ(lut.code(0), 125u);
}

TEST(Bake, OracleFailureReportsCoordinate) {
  auto bad = [](std::span<const double> p, std::span<double> out) {
    if (p[0] == 32.0 && p[1] == 64.0) throw std::runtime_error("boom");
    out[0] = 0.0;
  };
  try {
    bake(bad, 5, 2, 1);
    FAIL() << "expected OracleError";
  } catch (const OracleError& e) {
    EXPECT_EQ(e.coords(), (std::vector<int>{1, 2}));
    EXPECT_NE(std::string(e.what()).find("(1,2)"), std::string::npos);
  }
}

}  // namespace
}  // namespace alut
