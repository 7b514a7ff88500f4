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

// Binary table container. Layout, all fields little-endian:
//
//   off  size  field
//     0     4  magic "ALUT"
//     4     2  format version (1)
//     6     2  flags: bit0 signed (bias 2^(B-1)), bit1 IEEE-754 f64 payload
//     8     1  q
//     9     1  n
//    10     1  bit depth B (8, 16, or 64 for real payloads)
//    11     1  reserved, zero
//    12     4  m
//    16     4  k (orientation count for coefficient tables, else 0)
//    20     8  entry count = (2^(8-q)+1)^n * m
//    28     4  CRC-32 (zlib polynomial) of the payload
//    32        payload: entry count values of B/8 bytes each
//
// Optimizer checkpoints reuse the container with k holding the Adam step.

#include <zlib.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "alut/error.hpp"
#include "alut/lut.hpp"

namespace alut {

inline constexpr std::array<char, 4> kLutMagic = {'A', 'L', 'U', 'T'};
inline constexpr std::uint16_t kLutVersion = 1;
inline constexpr std::size_t kLutHeaderBytes = 32;
inline constexpr std::uint16_t kFlagSigned = 1u << 0;
inline constexpr std::uint16_t kFlagReal = 1u << 1;

struct LutHeader {
  std::uint16_t version = kLutVersion;
  std::uint16_t flags = 0;
  int q = 0;
  int n = 0;
  int bit_depth = 0;
  std::uint32_t m = 0;
  std::uint32_t k = 0;
  std::uint64_t entry_count = 0;
  std::uint32_t crc = 0;

  bool is_signed() const { return flags & kFlagSigned; }
  bool is_real() const { return flags & kFlagReal; }
  std::uint64_t payload_bytes() const { return entry_count * static_cast<std::uint64_t>(bit_depth / 8); }
};

namespace detail {

template <typename T>
void put_le(std::vector<unsigned char>& buf, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

inline std::uint32_t crc32_of(const std::vector<unsigned char>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large payloads.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(chunk));
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

inline std::vector<unsigned char> encode_payload(const Lut& lut) {
  std::vector<unsigned char> payload;
  payload.reserve(static_cast<std::size_t>(lut.storage_bytes()));
  const auto vals = lut.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (lut.is_real()) {
      put_le<std::uint64_t>(payload, std::bit_cast<std::uint64_t>(vals[i]));
    } else if (lut.bit_depth() == 8) {
      put_le<std::uint8_t>(payload, static_cast<std::uint8_t>(lut.code(i)));
    } else {
      put_le<std::uint16_t>(payload, static_cast<std::uint16_t>(lut.code(i)));
    }
  }
  return payload;
}

inline LutHeader parse_header(const unsigned char* h) {
  if (std::memcmp(h, kLutMagic.data(), kLutMagic.size()) != 0) throw BadMagicError("not a table file (bad magic)");
  LutHeader hd;
  hd.version = get_le<std::uint16_t>(h + 4);
  if (hd.version != kLutVersion) {
    throw VersionError("unsupported table format version " + std::to_string(hd.version));
  }
  hd.flags = get_le<std::uint16_t>(h + 6);
  hd.q = h[8];
  hd.n = h[9];
  hd.bit_depth = h[10];
  hd.m = get_le<std::uint32_t>(h + 12);
  hd.k = get_le<std::uint32_t>(h + 16);
  hd.entry_count = get_le<std::uint64_t>(h + 20);
  hd.crc = get_le<std::uint32_t>(h + 28);
  if (hd.is_real() ? hd.bit_depth != 64 : (hd.bit_depth != 8 && hd.bit_depth != 16)) {
    throw FormatError("inconsistent bit depth " + std::to_string(hd.bit_depth) + " in header");
  }
  if (hd.is_real() && hd.is_signed()) throw FormatError("real payload cannot be flagged signed");
  if (hd.q < 1 || hd.q > 7 || hd.n < 1 || hd.n > kMaxInputs || hd.m < 1) {
    throw FormatError("table geometry out of range in header");
  }
  const std::uint64_t expect = storage_bytes(hd.q, hd.n, static_cast<int>(hd.m), 8);
  if (hd.entry_count != expect) throw FormatError("entry count does not match table geometry");
  return hd;
}

}  // namespace detail

inline std::vector<unsigned char> serialize(const Lut& lut) {
  std::vector<unsigned char> payload = detail::encode_payload(lut);
  std::vector<unsigned char> out;
  out.reserve(kLutHeaderBytes + payload.size());
  out.insert(out.end(), kLutMagic.begin(), kLutMagic.end());
  std::uint16_t flags = 0;
  if (lut.is_signed()) flags |= kFlagSigned;
  if (lut.is_real()) flags |= kFlagReal;
  detail::put_le<std::uint16_t>(out, kLutVersion);
  detail::put_le<std::uint16_t>(out, flags);
  out.push_back(static_cast<unsigned char>(lut.q()));
  out.push_back(static_cast<unsigned char>(lut.n()));
  out.push_back(static_cast<unsigned char>(lut.bit_depth()));
  out.push_back(0);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(lut.m()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(lut.k()));
  detail::put_le<std::uint64_t>(out, lut.entry_count());
  detail::put_le<std::uint32_t>(out, detail::crc32_of(payload));
  out.resize(kLutHeaderBytes, 0);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

// Reads only the fixed-size header.
inline LutHeader read_header(std::istream& in) {
  std::array<unsigned char, kLutHeaderBytes> h{};
  in.read(reinterpret_cast<char*>(h.data()), h.size());
  if (in.gcount() != static_cast<std::streamsize>(h.size())) throw TruncatedError("truncated table header");
  return detail::parse_header(h.data());
}

inline Lut deserialize(const unsigned char* data, std::size_t size) {
  if (size < kLutHeaderBytes) throw TruncatedError("truncated table header");
  const LutHeader hd = detail::parse_header(data);
  if (size - kLutHeaderBytes < hd.payload_bytes()) throw TruncatedError("truncated table payload");
  const unsigned char* p = data + kLutHeaderBytes;
  const std::vector<unsigned char> payload(p, p + hd.payload_bytes());
  if (detail::crc32_of(payload) != hd.crc) throw ChecksumError("table payload checksum mismatch");

  Lut lut = hd.is_real() ? Lut::real(hd.q, hd.n, static_cast<int>(hd.m), static_cast<int>(hd.k))
                         : Lut::integer(hd.q, hd.n, static_cast<int>(hd.m), hd.bit_depth, hd.is_signed(),
                                        static_cast<int>(hd.k));
  const std::size_t width = static_cast<std::size_t>(hd.bit_depth / 8);
  auto vals = lut.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const unsigned char* e = p + i * width;
    if (hd.is_real()) {
      vals[i] = std::bit_cast<double>(detail::get_le<std::uint64_t>(e));
    } else if (width == 1) {
      lut.set_code(i, e[0]);
    } else {
      lut.set_code(i, detail::get_le<std::uint16_t>(e));
    }
  }
  return lut;
}

inline Lut deserialize(const std::vector<unsigned char>& bytes) { return deserialize(bytes.data(), bytes.size()); }

inline void save_lut(const Lut& lut, const std::filesystem::path& path) {
  const auto bytes = serialize(lut);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline Lut load_lut(const std::filesystem::path& path) { return deserialize(read_file_bytes(path)); }

inline LutHeader load_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_header(in);
}

}  // namespace alut
