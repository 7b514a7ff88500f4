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

#include "alut/serialize.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

namespace alut {
namespace {

Lut random_lut(std::mt19937_64& rng, int q, int n, int m, int bits, bool is_signed, bool real) {
  Lut lut = real ? Lut::real(q, n, m) : Lut::integer(q, n, m, bits, is_signed);
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  for (double& v : lut.values()) v = lut.representable(real ? u(rng) : u(rng) * 100.0);
  return lut;
}

TEST(Serialize, RoundTripsRandomTables) {
  std::mt19937_64 rng(42);
  struct Case { int q, n, m, bits; bool is_signed, real; };
  for (const Case c : {Case{4, 4, 1, 8, false, false}, Case{5, 4, 4, 8, true, false}, Case{6, 2, 3, 16, true, false},
                       Case{6, 3, 2, 16, false, false}, Case{5, 2, 4, 64, false, true}}) {
    Lut lut = random_lut(rng, c.q, c.n, c.m, c.bits, c.is_signed, c.real);
    lut.set_k(c.m == 4 ? 4 : 0);
    const auto bytes = serialize(lut);
    EXPECT_EQ(bytes.size(), kLutHeaderBytes + storage_bytes(c.q, c.n, c.m, c.bits));
    EXPECT_EQ(deserialize(bytes), lut);
  }
}

TEST(Serialize, HeaderInspectionWithoutPayload) {
  Lut coeff = Lut::integer(5, 4, 4, 8, false, 4);
  const auto bytes = serialize(coeff);
  // Only the header is available to the reader.
  std::istringstream in(std::string(bytes.begin(), bytes.begin() + kLutHeaderBytes));
  const LutHeader h = read_header(in);
  EXPECT_EQ(h.q, 5);
  EXPECT_EQ(h.n, 4);
  EXPECT_EQ(h.m, 4u);
  EXPECT_EQ(h.k, 4u);
  EXPECT_EQ(h.bit_depth, 8);
  EXPECT_EQ(h.payload_bytes(), 26244u);
  EXPECT_FALSE(h.is_signed());
}

TEST(Serialize, FileSizeIsHeaderPlusStorage) {
  const Lut lut = Lut::integer(4, 4, 4, 8, true);
  const auto path = std::filesystem::temp_directory_path() / "alut_serialize_size.lut";
  save_lut(lut, path);
  EXPECT_EQ(std::filesystem::file_size(path), 32u + storage_bytes(4, 4, 4, 8));
  EXPECT_EQ(load_lut(path), lut);
  EXPECT_EQ(load_header(path).entry_count, lut.entry_count());
  std::filesystem::remove(path);
}

TEST(Serialize, LittleEndianHeaderFields) {
  Lut lut = Lut::integer(4, 2, 3, 16, true, 0);
  lut.values()[0] = -1.0;
  const auto b = serialize(lut);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "ALUT");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 0);
  EXPECT_EQ(b[6], 1);  // signed flag
  EXPECT_EQ(b[8], 4);
  EXPECT_EQ(b[9], 2);
  EXPECT_EQ(b[10], 16);
  EXPECT_EQ(b[12], 3);
  EXPECT_EQ(b[20], (17 * 17 * 3) & 0xFF);
  EXPECT_EQ(b[21], (17 * 17 * 3) >> 8);
  // First entry: -1 + 32768 = 0x7FFF, little-endian.
  EXPECT_EQ(b[32], 0xFF);
  EXPECT_EQ(b[33], 0x7F);
}

TEST(Serialize, DistinctErrorsForEachCorruption) {
  std::mt19937_64 rng(5);
  const auto good = serialize(random_lut(rng, 5, 2, 2, 8, false, false));

  auto magic = good;
  magic[0] = 'X';
  EXPECT_THROW(deserialize(magic), BadMagicError);

  auto version = good;
  version[4] = 2;
  EXPECT_THROW(deserialize(version), VersionError);

  auto short_header = std::vector<unsigned char>(good.begin(), good.begin() + 20);
  EXPECT_THROW(deserialize(short_header), TruncatedError);

  auto short_payload = std::vector<unsigned char>(good.begin(), good.end() - 1);
  EXPECT_THROW(deserialize(short_payload), TruncatedError);

  auto flipped = good;
  flipped[kLutHeaderBytes + 3] ^= 0x01;
  EXPECT_THROW(deserialize(flipped), ChecksumError);

  auto geometry = good;
  geometry[12] = 7;  // m no longer matches entry count
  EXPECT_THROW(deserialize(geometry), FormatError);
}

TEST(Serialize, MissingFileIsIoError) {
  EXPECT_THROW(load_lut("/nonexistent/dir/table.lut"), IoError);
}

}  // namespace
}  // namespace alut
