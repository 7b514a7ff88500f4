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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "alut/error.hpp"

namespace alut {

// Largest patch dimensionality a table may be indexed with (a full 3x3
// neighbourhood). Bounds the 2^n corner enumeration at 512.
inline constexpr int kMaxInputs = 9;

// Bytes occupied by the entries of a table with sampling interval 2^q, n
// inputs, m outputs per lattice point and `bit_depth` bits per output:
// (2^(8-q)+1)^n * m * bit_depth/8.
inline std::uint64_t storage_bytes(int q, int n, int m, int bit_depth) {
  if (bit_depth <= 0 || bit_depth % 8 != 0) {
    throw DomainError("bit depth must be a positive multiple of 8, got " + std::to_string(bit_depth));
  }
  if (q < 1 || q > 7) throw DomainError("sampling exponent q must be in [1,7]");
  if (n < 1) throw DomainError("input dimensionality must be >= 1");
  if (m < 1) throw DomainError("outputs per entry must be >= 1");
  const std::uint64_t side = (std::uint64_t{1} << (8 - q)) + 1;
  std::uint64_t points = 1;
  for (int d = 0; d < n; ++d) points *= side;
  return points * static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(bit_depth / 8);
}

// A query point split into its lattice cell and the position inside it.
struct LatticeQuery {
  int n = 0;
  std::array<int, kMaxInputs> base{};
  std::array<double, kMaxInputs> fractions{};
};

// Splits pixel intensities in [0,255] into lattice cells of width 2^q. Since
// the last lattice coordinate sits at 256, the value 255 lands in the top
// cell with fraction (2^q-1)/2^q and no extra cell is needed.
inline LatticeQuery decompose(std::span<const double> values, int q) {
  if (values.size() > static_cast<std::size_t>(kMaxInputs)) {
    throw ShapeError("patch has more than " + std::to_string(kMaxInputs) + " inputs");
  }
  const double width = static_cast<double>(1 << q);
  LatticeQuery lq;
  lq.n = static_cast<int>(values.size());
  for (int d = 0; d < lq.n; ++d) {
    const double v = values[d];
    if (!(v >= 0.0 && v <= 255.0)) {
      std::ostringstream msg;
      msg << "patch value " << v << " at input " << d << " outside [0,255]";
      throw DomainError(msg.str());
    }
    const double cell = std::floor(v / width);
    lq.base[d] = static_cast<int>(cell);
    lq.fractions[d] = (v - cell * width) / width;
  }
  return lq;
}

// How table entries are stored on disk. Integer tables keep decoded values
// (code minus bias for signed tables) in memory, so every query path works
// on reals regardless of the storage form.
enum class Encoding { kInteger, kReal };

class Lut {
 public:
  Lut() = default;

  // A zero-valued table stored as `bit_depth`-bit integers. Signed tables
  // use a bias of 2^(bit_depth-1), so code 128 means 0 for 8 bits.
  static Lut integer(int q, int n, int m, int bit_depth = 8, bool is_signed = false, int k = 0) {
    if (bit_depth != 8 && bit_depth != 16) {
      throw DomainError("integer tables support 8 or 16 bit entries, got " + std::to_string(bit_depth));
    }
    return Lut(q, n, m, bit_depth, is_signed, Encoding::kInteger, k);
  }

  // A zero-valued table of IEEE doubles, used for training and for
  // real-valued reference pipelines.
  static Lut real(int q, int n, int m, int k = 0) {
    return Lut(q, n, m, 64, false, Encoding::kReal, k);
  }

  int q() const { return q_; }
  int n() const { return n_; }
  int m() const { return m_; }
  int k() const { return k_; }
  void set_k(int k) { k_ = k; }
  int bit_depth() const { return bit_depth_; }
  bool is_signed() const { return signed_; }
  Encoding encoding() const { return encoding_; }
  bool is_real() const { return encoding_ == Encoding::kReal; }

  // Lattice coordinates per input dimension, 2^(8-q)+1.
  int side() const { return side_; }
  int cell_width() const { return 1 << q_; }
  std::size_t point_count() const { return values_.size() / static_cast<std::size_t>(m_); }
  std::size_t entry_count() const { return values_.size(); }
  std::uint64_t storage_bytes() const { return alut::storage_bytes(q_, n_, m_, bit_depth_); }
  std::size_t stride(int d) const { return strides_[d]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double value(std::size_t point, int channel) const {
    return values_[point * static_cast<std::size_t>(m_) + channel];
  }

  // Representable range of decoded values.
  double min_value() const {
    if (is_real()) return -HUGE_VAL;
    return signed_ ? -std::ldexp(1.0, bit_depth_ - 1) : 0.0;
  }
  double max_value() const {
    if (is_real()) return HUGE_VAL;
    return signed_ ? std::ldexp(1.0, bit_depth_ - 1) - 1.0 : std::ldexp(1.0, bit_depth_) - 1.0;
  }

  // The value a table of this encoding would store for v: round half away
  // from zero and clamp for integer tables, identity for real ones.
  double representable(double v) const {
    if (is_real()) return v;
    return std::clamp(std::round(v), min_value(), max_value());
  }

  std::int64_t bias() const { return signed_ ? (std::int64_t{1} << (bit_depth_ - 1)) : 0; }

  // Raw storage code of an integer entry.
  std::uint64_t code(std::size_t entry) const {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(values_[entry]) + bias());
  }
  void set_code(std::size_t entry, std::uint64_t code) {
    values_[entry] = static_cast<double>(static_cast<std::int64_t>(code) - bias());
  }

  // Row-major flat point index of lattice coordinates (first input most
  // significant).
  std::size_t point_index(std::span<const int> coords) const {
    std::size_t idx = 0;
    for (int d = 0; d < n_; ++d) idx += static_cast<std::size_t>(coords[d]) * strides_[d];
    return idx;
  }

  friend bool operator==(const Lut& a, const Lut& b) {
    return a.q_ == b.q_ && a.n_ == b.n_ && a.m_ == b.m_ && a.k_ == b.k_ &&
           a.bit_depth_ == b.bit_depth_ && a.signed_ == b.signed_ && a.encoding_ == b.encoding_ &&
           a.values_ == b.values_;
  }

 private:
  Lut(int q, int n, int m, int bit_depth, bool is_signed, Encoding enc, int k)
      : q_(q), n_(n), m_(m), k_(k), bit_depth_(bit_depth), signed_(is_signed), encoding_(enc) {
    if (n > kMaxInputs) throw DomainError("table input dimensionality exceeds " + std::to_string(kMaxInputs));
    const std::uint64_t bytes = alut::storage_bytes(q, n, m, bit_depth);
    side_ = (1 << (8 - q)) + 1;
    values_.assign(bytes / static_cast<std::uint64_t>(bit_depth / 8), 0.0);
    std::size_t s = 1;
    for (int d = n - 1; d >= 0; --d) {
      strides_[d] = s;
      s *= static_cast<std::size_t>(side_);
    }
  }

  int q_ = 4;
  int n_ = 0;
  int m_ = 0;
  int k_ = 0;
  int bit_depth_ = 8;
  bool signed_ = false;
  Encoding encoding_ = Encoding::kInteger;
  int side_ = 0;
  std::array<std::size_t, kMaxInputs> strides_{};
  std::vector<double> values_;
};

// Calls fn(point_index, weight) for each of the 2^n lattice corners that
// surround `patch` and carry a non-zero multilinear weight.
template <typename Fn>
void for_each_corner(const Lut& lut, std::span<const double> patch, Fn&& fn) {
  if (static_cast<int>(patch.size()) != lut.n()) {
    throw ShapeError("patch has " + std::to_string(patch.size()) + " inputs, table expects " +
                     std::to_string(lut.n()));
  }
  const LatticeQuery lq = decompose(patch, lut.q());
  const int n = lut.n();
  std::size_t base = 0;
  for (int d = 0; d < n; ++d) base += static_cast<std::size_t>(lq.base[d]) * lut.stride(d);
  const unsigned corners = 1u << n;
  for (unsigned c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t idx = base;
    for (int d = 0; d < n; ++d) {
      if (c & (1u << (n - 1 - d))) {
        w *= lq.fractions[d];
        idx += lut.stride(d);
      } else {
        w *= 1.0 - lq.fractions[d];
      }
    }
    if (w != 0.0) fn(idx, w);
  }
}

// Multilinear interpolation of the m outputs at `patch`. No clamping.
inline void query(const Lut& lut, std::span<const double> patch, std::span<double> out) {
  if (static_cast<int>(out.size()) != lut.m()) throw ShapeError("output span does not match table outputs");
  std::fill(out.begin(), out.end(), 0.0);
  const auto vals = lut.values();
  const std::size_t m = static_cast<std::size_t>(lut.m());
  for_each_corner(lut, patch, [&](std::size_t point, double w) {
    const double* e = vals.data() + point * m;
    for (std::size_t ch = 0; ch < m; ++ch) out[ch] += w * e[ch];
  });
}

inline std::vector<double> query(const Lut& lut, std::span<const double> patch) {
  std::vector<double> out(static_cast<std::size_t>(lut.m()));
  query(lut, patch, out);
  return out;
}

// Thrown when a bake oracle fails; carries the lattice point it failed on.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, std::vector<int> coords)
      : Error(what), coords_(std::move(coords)) {}
  const std::vector<int>& coords() const { return coords_; }

 private:
  std::vector<int> coords_;
};

// Fills `lut` by evaluating oracle(point, out) once per lattice point.
// `point` holds intensities (coordinate * 2^q, so the top row is 256); the
// table's encoding decides rounding and clamping of the results.
template <typename Oracle>
void bake_into(Lut& lut, Oracle&& oracle) {
  const int n = lut.n();
  const int m = lut.m();
  std::array<int, kMaxInputs> coords{};
  std::vector<double> point(static_cast<std::size_t>(n));
  std::vector<double> out(static_cast<std::size_t>(m));
  auto vals = lut.values();
  const std::size_t points = lut.point_count();
  auto coord_list = [&] { return std::vector<int>(coords.begin(), coords.begin() + n); };
  auto coord_text = [&] {
    std::string s = "(";
    for (int d = 0; d < n; ++d) s += (d ? "," : "") + std::to_string(coords[d]);
    return s + ")";
  };
  for (std::size_t p = 0; p < points; ++p) {
    for (int d = 0; d < n; ++d) point[d] = static_cast<double>(coords[d]) * lut.cell_width();
    try {
      oracle(std::span<const double>(point), std::span<double>(out));
    } catch (const std::exception& e) {
      throw OracleError("oracle failed at lattice point " + coord_text() + ": " + e.what(), coord_list());
    }
    for (int ch = 0; ch < m; ++ch) {
      if (!std::isfinite(out[ch])) {
        throw OracleError("oracle returned a non-finite value at lattice point " + coord_text(), coord_list());
      }
      vals[p * m + ch] = lut.representable(out[ch]);
    }
    for (int d = n - 1; d >= 0; --d) {
      if (++coords[d] < lut.side()) break;
      coords[d] = 0;
    }
  }
}

template <typename Oracle>
Lut bake(Oracle&& oracle, int q, int n, int m, bool is_signed = false, int bit_depth = 8) {
  Lut lut = Lut::integer(q, n, m, bit_depth, is_signed);
  bake_into(lut, std::forward<Oracle>(oracle));
  return lut;
}

template <typename Oracle>
Lut bake_real(Oracle&& oracle, int q, int n, int m) {
  Lut lut = Lut::real(q, n, m);
  bake_into(lut, std::forward<Oracle>(oracle));
  return lut;
}

}  // namespace alut
