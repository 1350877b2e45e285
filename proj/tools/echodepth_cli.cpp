// Copyright 2026 The echodepth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: synth, sweep, compare, train, eval, report.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "echodepth/echodepth.hpp"

namespace fs = std::filesystem;
namespace ex = echodepth::experiments;
namespace ps = echodepth::persistence;

namespace {

struct Common {
  std::string config;
  std::string out = "runs/desk";
  std::vector<std::uint64_t> seeds;
  int epochs = 0;
};

ex::ProjectConfig load(const Common& c) {
  ex::ProjectConfig p = c.config.empty() ? ex::project_from(ps::json::object()) : ex::load_project(c.config);
  if (!c.seeds.empty()) p.train.seeds = p.sweep.seeds = p.comparison.seeds = c.seeds;
  if (c.epochs > 0) p.train.epochs = c.epochs;
  return p;
}

fs::path dataset_dir(const Common& c) { return fs::path(c.out) / "dataset"; }
fs::path results_dir(const Common& c) { return fs::path(c.out) / "results"; }

ex::RunOptions run_options(const ex::ProjectConfig& p, const Common& c) {
  ex::RunOptions o;
  o.train = p.train;
  o.network = p.network;
  o.checkpoint_dir = fs::path(c.out) / "checkpoints";
  o.on_cell = [](const ex::ResultRow& r) {
    std::fprintf(stderr, "%-10s %-16s %7.0f Hz seed %llu  test %.4f  train %.4f  %s\n", r.experiment.c_str(),
                 r.mode.c_str(), r.cutoff, static_cast<unsigned long long>(r.seed), r.test_rmse, r.train_rmse,
                 r.status.c_str());
  };
  return o;
}

int failed_cells(const std::vector<ex::ResultRow>& rows) {
  int n = 0;
  for (const auto& r : rows) n += r.ok() ? 0 : 1;
  if (n) std::fprintf(stderr, "%d cell(s) failed\n", n);
  return n;
}

void print_summary(const std::vector<ex::ResultRow>& rows) {
  const auto groups = ex::summarize(rows);
  std::cout << ex::summary_text(groups) << ex::trend_text(groups);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Echo-based depth estimation with band-limited chirps"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config, "Project config (JSON)")->check(CLI::ExistingFile);
  app.add_option("-o,--out", common.out, "Workspace directory")->capture_default_str();
  app.add_option("-s,--seeds", common.seeds, "Training seeds, overriding the config")->delimiter(',');
  app.add_option("--epochs", common.epochs, "Epochs, overriding the config");

  auto* synth = app.add_subcommand("synth", "Synthesize the dataset into <out>/dataset");

  std::vector<double> sweep_cutoffs;
  auto* sweep = app.add_subcommand("sweep", "Ultrasonic-only training at every sweep cutoff");
  sweep->add_option("--cutoffs", sweep_cutoffs, "Cutoffs in Hz, overriding the config")->delimiter(',');

  std::vector<double> compare_cutoffs;
  auto* compare = app.add_subcommand("compare", "Three-way comparison of training modes");
  compare->add_option("--cutoffs", compare_cutoffs, "Ultrasonic cutoffs in Hz, overriding the config")->delimiter(',');

  std::string mode_name = "proposed", checkpoint;
  double cutoff = 20000.0;
  std::optional<double> auxiliary;
  std::uint64_t seed = 0;
  auto* train = app.add_subcommand("train", "Train one cell and save its checkpoint");
  train->add_option("--mode", mode_name, "ultrasonic_only, augmented_only or proposed")->capture_default_str();
  train->add_option("--cutoff", cutoff, "Ultrasonic cutoff in Hz")->capture_default_str();
  train->add_option("--auxiliary", auxiliary, "Auxiliary cutoff in Hz (default: paired cutoff)");
  train->add_option("--seed", seed, "Training seed")->capture_default_str();
  train->add_option("--checkpoint", checkpoint, "Output path (default: <out>/checkpoints/<cell>.edck)");

  std::string split = "test";
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on ultrasonic features");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate")->required()->check(CLI::ExistingFile);
  eval->add_option("--cutoff", cutoff, "Ultrasonic cutoff in Hz")->capture_default_str();
  eval->add_option("--split", split, "train or test")->capture_default_str();

  auto* report = app.add_subcommand("report", "Summarize <out>/results into report tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const ex::ProjectConfig project = load(common);

    if (synth->parsed()) {
      const auto m = ps::build_dataset(project.generation, dataset_dir(common));
      ps::verify_manifest(m);
      std::printf("wrote %zu scenes x %zu cutoffs to %s\n", m.scenes.size(), project.generation.cutoffs.size(),
                  dataset_dir(common).string().c_str());
      return 0;
    }

    if (report->parsed()) {
      std::vector<ex::ResultRow> rows;
      for (const char* name : {"sweep", "comparison"}) {
        const fs::path path = results_dir(common) / (std::string(name) + ".csv");
        if (!fs::exists(path)) continue;
        const auto bytes = ps::read_file(path);
        const auto part = ex::parse_rows_csv(std::string(bytes.begin(), bytes.end()));
        rows.insert(rows.end(), part.begin(), part.end());
      }
      if (rows.empty()) throw echodepth::InvalidArgument("no result tables in " + results_dir(common).string());
      const auto files = ex::emit_report(rows, results_dir(common), "report");
      print_summary(rows);
      std::printf("report: %s\n", files.summary.string().c_str());
      return failed_cells(rows) ? 1 : 0;
    }

    const auto manifest = ps::load_manifest(dataset_dir(common));

    if (sweep->parsed()) {
      ex::SweepSpec spec = project.sweep;
      if (!sweep_cutoffs.empty()) spec.cutoffs = sweep_cutoffs;
      const auto rows = ex::run_sweep(manifest, spec, run_options(project, common));
      ex::emit_report(rows, results_dir(common), "sweep");
      print_summary(rows);
      return failed_cells(rows) ? 1 : 0;
    }

    if (compare->parsed()) {
      ex::ComparisonSpec spec = project.comparison;
      if (!compare_cutoffs.empty()) spec.ultrasonic_cutoffs = compare_cutoffs;
      const auto rows = ex::run_comparison(manifest, spec, run_options(project, common));
      ex::emit_report(rows, results_dir(common), "comparison");
      print_summary(rows);
      return failed_cells(rows) ? 1 : 0;
    }

    if (train->parsed()) {
      const auto mode = echodepth::training::parse_mode(mode_name);
      std::optional<double> aux;
      if (mode != echodepth::training::TrainMode::kUltrasonicOnly) {
        aux = auxiliary ? *auxiliary : echodepth::augment::pair_cutoffs(cutoff, project.comparison.pairs);
      }
      auto options = run_options(project, common);
      options.stop_on_error = true;
      if (!checkpoint.empty()) options.checkpoint_file = checkpoint;
      const auto row = ex::run_cell(manifest, "train", mode, cutoff, aux, seed, options);
      std::printf("test_rmse %s\n", ex::format_number(row.test_rmse).c_str());
      return 0;
    }

    if (eval->parsed()) {
      const auto net = ps::load_checkpoint(checkpoint);
      const ps::ManifestDataset data(manifest, split, cutoff);
      const auto result = echodepth::training::evaluate(net, data);
      std::printf("scene_id,rmse\n");
      for (const auto& r : result.rows) std::printf("%s,%s\n", r.scene_id.c_str(), ex::format_number(r.rmse).c_str());
      std::printf("mean,%s\n", ex::format_number(result.mean_rmse).c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
