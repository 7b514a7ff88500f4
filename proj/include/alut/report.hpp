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

#include <chrono>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "alut/image.hpp"
#include "alut/metrics.hpp"
#include "alut/pipeline.hpp"

namespace alut {

struct EvalRow {
  std::string dataset;
  std::string image;
  MetricValues metrics;
};

// Arithmetic mean of the rows' metrics.
inline MetricValues mean_metrics(const std::vector<EvalRow>& rows) {
  MetricValues m{0.0, 0.0, 0.0};
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.psnr += r.metrics.psnr;
    m.ssim += r.metrics.ssim;
    m.psnr_b += r.metrics.psnr_b;
  }
  const double n = static_cast<double>(rows.size());
  return {m.psnr / n, m.ssim / n, m.psnr_b / n};
}

// One row per image, then a "mean" row.
inline void write_eval_csv(const std::vector<EvalRow>& rows, std::ostream& out) {
  out << "dataset,image,psnr,ssim,psnr_b\n" << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.image << ',' << r.metrics.psnr << ',' << r.metrics.ssim << ',' << r.metrics.psnr_b
        << '\n';
  }
  const MetricValues m = mean_metrics(rows);
  out << (rows.empty() ? std::string() : rows.front().dataset) << ",mean," << m.psnr << ',' << m.ssim << ','
      << m.psnr_b << '\n';
}

struct BenchRow {
  std::string image;
  int width = 0;
  int height = 0;
  double seconds = 0.0;
  std::uint64_t lut_queries = 0;
  std::uint64_t coeff_queries = 0;
  std::uint64_t expected_lut_queries = 0;
  std::uint64_t expected_coeff_queries = 0;
  std::uint64_t table_bytes = 0;

  bool verified() const { return lut_queries == expected_lut_queries && coeff_queries == expected_coeff_queries; }
};

// Restores one image with instrumentation and checks the counts against
// the cost model.
inline BenchRow bench_image(const std::string& name, const Image& input, const PipelineConfig& config,
                            std::uint64_t table_bytes, Image* output = nullptr) {
  QueryCounter counter;
  RunOptions opts;
  opts.counter = &counter;
  const auto t0 = std::chrono::steady_clock::now();
  Image out = cascade(input, config, opts);
  const auto t1 = std::chrono::steady_clock::now();
  BenchRow row;
  row.image = name;
  row.width = input.width();
  row.height = input.height();
  row.seconds = std::chrono::duration<double>(t1 - t0).count();
  row.lut_queries = counter.lut_queries;
  row.coeff_queries = counter.coeff_queries;
  const QueryCost cost = query_cost_model(config);
  const std::uint64_t pixels = static_cast<std::uint64_t>(input.width()) * input.height();
  row.expected_lut_queries = cost.lut_queries_per_pixel * pixels;
  row.expected_coeff_queries = cost.coeff_queries_per_pixel * pixels;
  row.table_bytes = table_bytes;
  if (output) *output = std::move(out);
  return row;
}

inline BenchRow bench_total(const std::vector<BenchRow>& rows) {
  BenchRow t;
  t.image = "total";
  for (const auto& r : rows) {
    t.seconds += r.seconds;
    t.lut_queries += r.lut_queries;
    t.coeff_queries += r.coeff_queries;
    t.expected_lut_queries += r.expected_lut_queries;
    t.expected_coeff_queries += r.expected_coeff_queries;
    t.table_bytes = std::max(t.table_bytes, r.table_bytes);
  }
  return t;
}

// Per-image rows, then a total row; input size is blank on the total.
inline void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "image,width,height,seconds,lut_queries,coeff_queries,expected_lut_queries,expected_coeff_queries,"
         "table_bytes,verified\n";
  auto put = [&](const BenchRow& r, bool total) {
    out << r.image << ',';
    if (!total) out << r.width << ',' << r.height;
    else out << ',';
    out << ',' << std::setprecision(6) << r.seconds << ',' << r.lut_queries << ',' << r.coeff_queries << ','
        << r.expected_lut_queries << ',' << r.expected_coeff_queries << ',' << r.table_bytes << ','
        << (r.verified() ? "yes" : "no") << '\n';
  };
  for (const auto& r : rows) put(r, false);
  put(bench_total(rows), true);
}

}  // namespace alut
