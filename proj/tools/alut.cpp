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

// Command-line front end: bake, train, finetune, restore, eval, bench,
// inspect, and synth (writes the seeded synthetic corpus + manifest).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "alut/bake_oracles.hpp"
#include "alut/config.hpp"
#include "alut/dataset.hpp"
#include "alut/netpbm.hpp"
#include "alut/report.hpp"
#include "alut/serialize.hpp"
#include "alut/synthetic.hpp"
#include "alut/training.hpp"

namespace fs = std::filesystem;
using namespace alut;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;

// Options shared by the commands that build a pipeline.
struct PipelineFlags {
  std::string config;
  std::vector<std::string> luts;
  std::string pooling;
  std::optional<double> tau;
  std::string coeff_lut;
  std::optional<int> scale;
  std::optional<std::uint64_t> seed;
  bool residual = false;
  std::string pattern;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "JSON run config");
    app->add_option("--lut", luts, "restoration table, repeat once per stage in order");
    app->add_option("--pooling", pooling, "avg, gmp or oap")->check(CLI::IsMember({"avg", "gmp", "oap"}));
    app->add_option("--tau", tau, "GMP temperature (pixel units)");
    app->add_option("--coeff-lut", coeff_lut, "OAP coefficient table");
    app->add_option("--scale", scale, "super-resolution factor")->check(CLI::IsMember({2, 3, 4}));
    app->add_option("--seed", seed, "random seed");
    app->add_flag("--residual", residual, "tables predict residuals over the bicubic/identity baseline");
    app->add_option("--pattern", pattern, "kernel pattern (S, D, Y) for --lut tables");
  }

  RunConfig resolve() const {
    RunConfig rc;
    if (!config.empty()) rc = load_run_config(config);
    if (!luts.empty()) {
      rc.stages.clear();
      for (const auto& l : luts) rc.stages.push_back({l});
    }
    if (!pattern.empty()) rc.patterns = {pattern};
    if (!pooling.empty()) rc.pooling = parse_pooling(pooling);
    if (tau) rc.tau = *tau;
    if (!coeff_lut.empty()) rc.coeff_lut = coeff_lut;
    if (scale) {
      rc.task = Task::kSuperResolution;
      rc.scale = *scale;
    }
    if (residual) rc.residual = true;
    if (seed) {
      rc.seed = *seed;
      rc.train.config.seed = *seed;
    }
    return rc;
  }
};

void print_header(const fs::path& path, std::ostream& out) {
  const LutHeader h = load_header(path);
  const Lut lut = load_lut(path);  // full read verifies the checksum
  out << "file: " << path.string() << '\n'
      << "version: " << h.version << '\n'
      << "q: " << h.q << '\n'
      << "n: " << h.n << '\n'
      << "m: " << h.m << '\n'
      << "k: " << h.k << '\n'
      << "bit_depth: " << h.bit_depth << '\n'
      << "encoding: " << (h.is_real() ? "real" : h.is_signed() ? "signed" : "unsigned") << '\n'
      << "side: " << lut.side() << '\n'
      << "entries: " << h.entry_count << '\n'
      << "payload_bytes: " << h.payload_bytes() << '\n'
      << "crc32: 0x" << std::hex << std::setw(8) << std::setfill('0') << h.crc << std::dec << '\n'
      << "range: [" << lut.min_value() << ", " << lut.max_value() << "]\n";
}

std::vector<NamedPair> load_named(const RunConfig& rc, const std::string& manifest, const std::string& split) {
  const fs::path path = manifest.empty() ? rc.manifest : fs::path(manifest);
  if (path.empty()) throw DomainError("no dataset manifest given (--manifest or config \"manifest\")");
  return load_split(load_manifest(path), split);
}

// Trained tables, log and a ready-to-run config written under `out`.
void write_trained(const TrainableModel& model, RunConfig rc, const std::vector<TrainLogRow>& log,
                   const fs::path& out, const std::vector<ImagePair>& val) {
  fs::create_directories(out);
  rc.stages.assign(1, {});
  double max_err = 0.0;
  std::size_t clamped = 0;
  for (std::size_t p = 0; p < model.luts.size(); ++p) {
    const std::string stem = model.luts.size() == 1 ? "stage1" : "stage1_" + model.patterns[p].name;
    auto rep = export_lut(model.luts[p].table, 8, model.residual);
    max_err = std::max(max_err, rep.max_abs_error);
    clamped += rep.clamped;
    save_lut(rep.table, out / (stem + ".alut"));
    save_checkpoint(model.luts[p], out / (stem + ".ckpt.alut"));
    rc.stages[0].push_back(out / (stem + ".alut"));
  }
  rc.pooling = model.pooling;
  rc.tau = model.tau();
  rc.norm = model.norm;
  rc.coeff_lut.clear();
  if (model.coeff) {
    save_lut(export_coefficients(model.coeff->table).table, out / "coeff.alut");
    save_checkpoint(*model.coeff, out / "coeff.ckpt.alut");
    rc.coeff_lut = out / "coeff.alut";
  }
  std::ofstream logf(out / "train_log.csv");
  write_train_log(log, logf);
  save_run_config(rc, out / "run.json");

  std::cout << "tables: " << (out / "run.json").string() << '\n'
            << "export max_abs_error: " << max_err << '\n'
            << "export clamped_entries: " << clamped << '\n';
  if (!val.empty()) {
    const int shave_border = model.task == Task::kSuperResolution ? model.scale : 0;
    const double real = validation_psnr(model.pipeline_config(), val, shave_border);
    const double exported = validation_psnr(build_pipeline(rc), val, shave_border);
    std::cout << std::fixed << std::setprecision(4) << "val_psnr real: " << real << '\n'
              << "val_psnr exported: " << exported << '\n'
              << "export psnr_delta: " << real - exported << '\n'
              << std::defaultfloat;
  }
}

std::function<void(const TrainLogRow&)> progress(int every) {
  return [every](const TrainLogRow& r) {
    if (every > 0 && (r.step % every == 0 || std::isfinite(r.val_psnr))) {
      std::cerr << "step " << r.step << " lr " << r.lr << " loss " << r.loss;
      if (std::isfinite(r.val_psnr)) std::cerr << " val_psnr " << r.val_psnr;
      std::cerr << '\n';
    }
  };
}

int run_train(const PipelineFlags& flags, const std::string& manifest, const fs::path& out, int verbose_every) {
  RunConfig rc = flags.resolve();
  const auto train_set = pairs_of(load_named(rc, manifest, "train"));
  const auto val_set = pairs_of(load_named(rc, manifest, "val"));
  if (train_set.empty()) throw DomainError("manifest has no train items");
  if (!manifest.empty()) rc.manifest = manifest;

  TrainableModel model =
      TrainableModel::create(rc.task, rc.scale, rc.train.q, resolve_patterns(rc.patterns), rc.residual);
  model.orientations.rotations = rc.rotations;
  model.coeff_pattern = pattern_by_name(rc.coeff_pattern);
  model.norm = rc.norm;
  std::vector<TrainLogRow> log;
  auto on_log = [&](const TrainLogRow& r) {
    log.push_back(r);
    progress(verbose_every)(r);
  };
  const auto res = train(model, train_set, val_set, rc.train.config, on_log);
  std::cout << "trained " << rc.train.config.iterations << " steps, val_psnr " << res.initial_val_psnr << " -> "
            << res.final_val_psnr << '\n';
  if (rc.pooling != PoolingKind::kAverage) {
    TrainConfig ft = rc.train.config;
    ft.iterations = rc.train.resolved_finetune_iterations();
    const auto fres = finetune(model, rc.pooling, train_set, val_set, ft, rc.train.coeff_q, on_log);
    std::cout << "finetuned " << ft.iterations << " steps (" << to_string(rc.pooling) << "), val_psnr "
              << fres.initial_val_psnr << " -> " << fres.final_val_psnr << '\n';
  }
  write_trained(model, rc, log, out, val_set);
  return kExitOk;
}

int run_finetune(const PipelineFlags& flags, const std::string& manifest, const fs::path& out, int verbose_every) {
  RunConfig rc = flags.resolve();
  if (rc.pooling == PoolingKind::kAverage) throw DomainError("finetune needs --pooling gmp or oap");
  if (rc.stages.size() != 1) throw DomainError("finetune trains exactly one stage (pass one --lut)");
  const auto train_set = pairs_of(load_named(rc, manifest, "train"));
  const auto val_set = pairs_of(load_named(rc, manifest, "val"));
  if (!manifest.empty()) rc.manifest = manifest;

  TrainableModel model;
  model.task = rc.task;
  model.scale = rc.task == Task::kSuperResolution ? rc.scale : 1;
  model.patterns = resolve_patterns(rc.patterns);
  model.orientations.rotations = rc.rotations;
  model.residual = rc.residual;
  model.coeff_pattern = pattern_by_name(rc.coeff_pattern);
  model.norm = rc.norm;
  for (const auto& f : rc.stages[0]) {
    // Prefer the real-valued checkpoint sitting next to an exported table.
    fs::path ckpt = f;
    ckpt.replace_extension(".ckpt.alut");
    model.luts.push_back(fs::exists(ckpt) ? load_checkpoint(ckpt) : TrainableLut(load_lut(f)));
  }
  if (model.luts.size() != model.patterns.size()) throw ShapeError("one table per kernel pattern is required");
  TrainConfig ft = rc.train.config;
  ft.iterations = rc.train.resolved_finetune_iterations();
  std::vector<TrainLogRow> log;
  const auto res = finetune(model, rc.pooling, train_set, val_set, ft, rc.train.coeff_q, [&](const TrainLogRow& r) {
    log.push_back(r);
    progress(verbose_every)(r);
  });
  std::cout << "finetuned " << ft.iterations << " steps (" << to_string(rc.pooling) << "), val_psnr "
            << res.initial_val_psnr << " -> " << res.final_val_psnr << " (best step " << res.best_step << ")\n";
  write_trained(model, rc, log, out, val_set);
  return kExitOk;
}

int run_restore(const PipelineFlags& flags, const std::vector<std::string>& inputs, const std::string& manifest,
                const std::string& split, const fs::path& out) {
  const RunConfig rc = flags.resolve();
  const PipelineConfig pipeline = build_pipeline(rc);
  fs::create_directories(out);
  std::vector<std::pair<std::string, Image>> work;
  for (const auto& in : inputs) work.emplace_back(fs::path(in).stem().string(), read_gray(in));
  if (!manifest.empty() || (inputs.empty() && !rc.manifest.empty())) {
    for (auto& p : load_named(rc, manifest, split)) work.emplace_back(p.name, std::move(p.pair.degraded));
  }
  if (work.empty()) throw DomainError("nothing to restore: pass images or a manifest");
  for (const auto& [name, img] : work) {
    const fs::path dst = out / (name + ".pgm");
    write_pgm(restore_image(img, pipeline), dst);
    std::cout << dst.string() << '\n';
  }
  return kExitOk;
}

int shave_for(const RunConfig& rc, int shave) {
  if (shave >= 0) return shave;
  return rc.task == Task::kSuperResolution ? rc.scale : 0;
}

void emit_csv(const std::string& report, const std::function<void(std::ostream&)>& write) {
  if (report.empty() || report == "-") {
    write(std::cout);
    return;
  }
  std::ofstream f(report);
  if (!f) throw IoError("cannot write " + report);
  write(f);
}

int run_eval(const std::vector<std::string>& refs, const std::vector<std::string>& tests, const std::string& manifest,
             const std::string& split, const std::string& outputs, const std::string& dataset, int shave,
             const std::string& report) {
  std::vector<EvalRow> rows;
  if (!manifest.empty()) {
    const auto m = load_manifest(manifest);
    if (outputs.empty()) throw DomainError("--manifest needs --outputs (directory of restored images)");
    for (const auto& item : m.split(split)) {
      const std::string name = item.clean.stem().string();
      rows.push_back({dataset.empty() ? m.name : dataset, name,
                      evaluate(read_gray(item.clean), read_gray(fs::path(outputs) / (name + ".pgm")), std::max(shave, 0))});
    }
  } else {
    if (refs.size() != tests.size() || refs.empty()) throw DomainError("need matching --ref and --test lists");
    for (std::size_t i = 0; i < refs.size(); ++i) {
      rows.push_back({dataset.empty() ? "images" : dataset, fs::path(tests[i]).stem().string(),
                      evaluate(read_gray(refs[i]), read_gray(tests[i]), std::max(shave, 0))});
    }
  }
  emit_csv(report, [&](std::ostream& o) { write_eval_csv(rows, o); });
  return kExitOk;
}

int run_bench(const PipelineFlags& flags, const std::string& manifest, const std::string& split, const fs::path& out,
              int shave, const std::string& report) {
  const RunConfig rc = flags.resolve();
  const PipelineConfig pipeline = build_pipeline(rc);
  const fs::path mpath = manifest.empty() ? rc.manifest : fs::path(manifest);
  if (mpath.empty()) throw DomainError("no dataset manifest given (--manifest or config \"manifest\")");
  const DatasetManifest dataset = load_manifest(mpath);
  const auto items = load_split(dataset, split);
  if (items.empty()) throw DomainError("manifest split '" + split + "' is empty");
  const std::uint64_t bytes = table_bytes(pipeline);
  std::vector<BenchRow> bench;
  std::vector<EvalRow> eval;
  const std::string& name = dataset.name;
  for (const auto& item : items) {
    Image restored;
    bench.push_back(bench_image(item.name, item.pair.degraded, pipeline, bytes, &restored));
    eval.push_back({name, item.name, evaluate(item.pair.clean, restored, shave_for(rc, shave))});
    if (!out.empty()) {
      fs::create_directories(out);
      write_pgm(restored, out / (item.name + ".pgm"));
    }
  }
  emit_csv(report, [&](std::ostream& o) { write_bench_csv(bench, o); });
  if (!out.empty()) {
    std::ofstream f(out / "eval.csv");
    write_eval_csv(eval, f);
  }
  const BenchRow total = bench_total(bench);
  const MetricValues mean = mean_metrics(eval);
  std::cerr << "images " << bench.size() << ", mean psnr " << mean.psnr << " ssim " << mean.ssim << " psnr_b "
            << mean.psnr_b << ", " << total.seconds << " s\n";
  if (!total.verified()) {
    std::cerr << "alut: error[validation]: query counts differ from the cost model\n";
    return kExitValidation;
  }
  return kExitOk;
}

int run_synth(int count, int size, std::uint64_t seed, int scale, int val_count, const fs::path& out) {
  if (val_count < 0 || val_count >= count) throw DomainError("--val must be in [0, count)");
  fs::create_directories(out);
  const auto imgs = synthetic_corpus(count, size, seed);
  std::ofstream m(out / "manifest.tsv");
  if (!m) throw IoError("cannot write manifest in " + out.string());
  m << "#name synthetic\n";
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img%03d.pgm", i);
    write_pgm(imgs[i], out / name);
    m << (i < count - val_count ? "train" : "val") << '\t' << name << "\tbicubic_down:" << scale << '\n';
  }
  std::cout << (out / "manifest.tsv").string() << '\n';
  return kExitOk;
}

int run_bake(const std::string& oracle, int q, int n, int m, int k, int bit_depth, bool is_signed, double value,
             int scale, const fs::path& out) {
  if (oracle == "planar-sr") {
    n = 4;
    m = scale * scale;
  }
  Lut lut = bake(oracle_by_name(oracle, scale, value), q, n, m, is_signed, bit_depth);
  lut.set_k(k);
  save_lut(lut, out);
  std::cout << out.string() << ": q=" << q << " n=" << n << " m=" << m << " " << lut.storage_bytes() << " bytes\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive LUT pooling: bake, train, restore and evaluate lattice lookup tables"};
  app.require_subcommand(1);
  int verbose_every = 0;

  // inspect
  auto* inspect = app.add_subcommand("inspect", "print a table file header");
  std::vector<std::string> inspect_files;
  inspect->add_option("files", inspect_files, "table files")->required();

  // bake
  auto* bake_cmd = app.add_subcommand("bake", "build a table from a closed-form oracle");
  std::string oracle = "identity";
  int bq = 4, bn = 4, bm = 1, bk = 0, bbits = 8, bscale = 2;
  bool bsigned = false;
  double bvalue = 0.0;
  std::string bout;
  bake_cmd->add_option("--oracle", oracle, "identity, constant, zero-residual, planar-sr");
  bake_cmd->add_option("--q", bq, "sampling interval exponent")->check(CLI::Range(0, 8));
  bake_cmd->add_option("--n", bn, "inputs per patch")->check(CLI::Range(1, kMaxInputs));
  bake_cmd->add_option("--m", bm, "outputs per entry")->check(CLI::PositiveNumber);
  bake_cmd->add_option("--k", bk, "orientation count stored in the header (coefficient tables)");
  bake_cmd->add_option("--bits", bbits, "bit depth")->check(CLI::IsMember({8, 16}));
  bake_cmd->add_flag("--signed", bsigned, "signed encoding");
  bake_cmd->add_option("--value", bvalue, "value for the constant oracle");
  bake_cmd->add_option("--scale", bscale, "factor for planar-sr")->check(CLI::IsMember({2, 3, 4}));
  bake_cmd->add_option("--out", bout, "output file")->required();

  // train / finetune
  PipelineFlags train_flags, finetune_flags, restore_flags, bench_flags;
  std::string train_manifest, train_out = "trained";
  auto* train_cmd = app.add_subcommand("train", "train a stage on a manifest (then fine-tune for gmp/oap)");
  train_flags.add_to(train_cmd);
  train_cmd->add_option("--manifest", train_manifest, "dataset manifest (train/val splits)");
  train_cmd->add_option("--out", train_out, "output directory");
  train_cmd->add_option("--progress", verbose_every, "log every N steps to stderr");

  std::string ft_manifest, ft_out = "finetuned";
  auto* ft_cmd = app.add_subcommand("finetune", "fine-tune trained tables with a new pooling rule");
  finetune_flags.add_to(ft_cmd);
  ft_cmd->add_option("--manifest", ft_manifest, "dataset manifest (train/val splits)");
  ft_cmd->add_option("--out", ft_out, "output directory");
  ft_cmd->add_option("--progress", verbose_every, "log every N steps to stderr");

  // restore
  std::vector<std::string> restore_inputs;
  std::string restore_manifest, restore_split = "test", restore_out = "restored";
  auto* restore_cmd = app.add_subcommand("restore", "run a pipeline over images");
  restore_flags.add_to(restore_cmd);
  restore_cmd->add_option("inputs", restore_inputs, "input PGM/PPM files");
  restore_cmd->add_option("--manifest", restore_manifest, "restore the degraded side of a manifest split");
  restore_cmd->add_option("--split", restore_split, "manifest split");
  restore_cmd->add_option("--out", restore_out, "output directory");

  // eval
  std::vector<std::string> eval_refs, eval_tests;
  std::string eval_manifest, eval_split = "test", eval_outputs, eval_dataset, eval_report;
  int eval_shave = 0;
  auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM/PSNR-B of outputs against references");
  eval_cmd->add_option("--ref", eval_refs, "reference images");
  eval_cmd->add_option("--test", eval_tests, "images to score, paired with --ref");
  eval_cmd->add_option("--manifest", eval_manifest, "score <outputs>/<clean stem>.pgm for a manifest split");
  eval_cmd->add_option("--split", eval_split, "manifest split");
  eval_cmd->add_option("--outputs", eval_outputs, "directory of restored images");
  eval_cmd->add_option("--dataset", eval_dataset, "dataset column value");
  eval_cmd->add_option("--shave", eval_shave, "border pixels excluded from metrics");
  eval_cmd->add_option("--report", eval_report, "CSV output (default stdout)");

  // bench
  std::string bench_manifest, bench_split = "test", bench_out, bench_report;
  int bench_shave = -1;
  auto* bench_cmd = app.add_subcommand("bench", "restore + eval with timing and query counts");
  bench_flags.add_to(bench_cmd);
  bench_cmd->add_option("--manifest", bench_manifest, "dataset manifest");
  bench_cmd->add_option("--split", bench_split, "manifest split");
  bench_cmd->add_option("--out", bench_out, "write restored images and eval.csv here");
  bench_cmd->add_option("--shave", bench_shave, "metric border crop (default: the scale)");
  bench_cmd->add_option("--report", bench_report, "bench CSV (default stdout)");

  // synth
  int s_count = 64, s_size = 96, s_scale = 2, s_val = 16;
  std::uint64_t s_seed = 2026;
  std::string s_out = "synthetic";
  auto* synth_cmd = app.add_subcommand("synth", "write the seeded synthetic stripe corpus and its manifest");
  synth_cmd->add_option("--count", s_count, "images")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--size", s_size, "side length of the clean images")->check(CLI::Range(8, 4096));
  synth_cmd->add_option("--scale", s_scale, "bicubic downscale factor in the manifest")->check(CLI::IsMember({2, 3, 4}));
  synth_cmd->add_option("--val", s_val, "images tagged val (the rest are train)");
  synth_cmd->add_option("--seed", s_seed, "corpus seed");
  synth_cmd->add_option("--out", s_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (inspect->parsed()) {
      for (std::size_t i = 0; i < inspect_files.size(); ++i) {
        if (i) std::cout << '\n';
        print_header(inspect_files[i], std::cout);
      }
      return kExitOk;
    }
    if (bake_cmd->parsed()) return run_bake(oracle, bq, bn, bm, bk, bbits, bsigned, bvalue, bscale, bout);
    if (train_cmd->parsed()) return run_train(train_flags, train_manifest, train_out, verbose_every);
    if (ft_cmd->parsed()) return run_finetune(finetune_flags, ft_manifest, ft_out, verbose_every);
    if (restore_cmd->parsed()) return run_restore(restore_flags, restore_inputs, restore_manifest, restore_split, restore_out);
    if (eval_cmd->parsed()) {
      return run_eval(eval_refs, eval_tests, eval_manifest, eval_split, eval_outputs, eval_dataset, eval_shave, eval_report);
    }
    if (bench_cmd->parsed()) return run_bench(bench_flags, bench_manifest, bench_split, bench_out, bench_shave, bench_report);
    if (synth_cmd->parsed()) return run_synth(s_count, s_size, s_seed, s_scale, s_val, s_out);
  } catch (const IoError& e) {
    std::cerr << "alut: error[io]: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "alut: error[format]: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "alut: error[io]: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "alut: error[validation]: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
