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

#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <variant>
#include <vector>

#include "alut/error.hpp"
#include "alut/image.hpp"
#include "alut/metrics.hpp"

namespace alut {

// Binary PGM (P5) and PPM (P6) with maxval <= 255.
namespace detail {

inline std::string pnm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (in) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (tok.empty()) throw FormatError("truncated netpbm header");
  return tok;
}

inline int pnm_int(std::istream& in, const char* what) {
  const std::string tok = pnm_token(in);
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) throw FormatError(std::string("bad netpbm ") + what + " '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace detail

using PnmImage = std::variant<Image, RgbImage>;

inline PnmImage read_pnm(std::istream& in) {
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw BadMagicError("not a binary PGM/PPM file");
  }
  const int width = detail::pnm_int(in, "width");
  const int height = detail::pnm_int(in, "height");
  const int maxval = detail::pnm_int(in, "maxval");
  if (width < 1 || height < 1) throw FormatError("netpbm dimensions must be positive");
  if (maxval < 1 || maxval > 255) throw FormatError("only 8-bit netpbm files are supported");
  const int channels = magic[1] == '5' ? 1 : 3;
  std::vector<unsigned char> data(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size())) throw TruncatedError("netpbm pixel data is truncated");
  if (channels == 3) return RgbImage{width, height, std::move(data)};
  Image img(width, height);
  for (std::size_t i = 0; i < data.size(); ++i) img.pixels()[i] = data[i];
  return img;
}

inline PnmImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_pnm(in);
}

// Grayscale view of a file: PGM as-is, PPM reduced to 8-bit luma.
inline Image read_gray(const std::filesystem::path& path) {
  PnmImage img = read_pnm(path);
  if (auto* g = std::get_if<Image>(&img)) return std::move(*g);
  return quantize(rgb_to_y(std::get<RgbImage>(img)));
}

inline void write_pgm(const Image& img, std::ostream& out) {
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  const Image q = quantize(img);
  std::vector<char> bytes(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) bytes[i] = static_cast<char>(static_cast<unsigned char>(q.pixels()[i]));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void write_pgm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_pgm(img, out);
  if (!out) throw IoError("write failed for " + path.string());
}

inline void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace alut
