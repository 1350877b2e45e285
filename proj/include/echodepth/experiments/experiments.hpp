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

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "echodepth/persistence/dataset.hpp"

namespace echodepth::experiments {

namespace fs = std::filesystem;
using training::TrainMode;

struct SweepSpec {
  std::vector<double> cutoffs = persistence::default_cutoffs();
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  void validate() const {
    require(!cutoffs.empty() && !seeds.empty(), "sweep needs cutoffs and seeds");
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
      require(cutoffs[i] < 22050.0, "sweep cutoffs must lie below 22050 Hz");
      require(i == 0 || cutoffs[i] > cutoffs[i - 1], "sweep cutoffs must be strictly increasing");
    }
  }
};

struct ComparisonSpec {
  std::vector<double> ultrasonic_cutoffs{20000.0, 21000.0, 22000.0};
  std::vector<TrainMode> modes{TrainMode::kUltrasonicOnly, TrainMode::kAugmentedOnly, TrainMode::kProposed};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  augment::CutoffTable pairs = augment::default_cutoff_pairs();

  void validate() const {
    require(!ultrasonic_cutoffs.empty() && !modes.empty() && !seeds.empty(), "comparison needs cutoffs, modes, seeds");
    for (double c : ultrasonic_cutoffs) augment::pair_cutoffs(c, pairs);
  }
};

/// One trained-and-evaluated cell. Failed cells keep their coordinates, a NaN
/// RMSE and the error text in `status`.
struct ResultRow {
  std::string experiment;
  std::string mode;
  double cutoff = 0.0;
  double auxiliary_cutoff = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  double test_rmse = std::numeric_limits<double>::quiet_NaN();
  double train_rmse = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct RunOptions {
  training::TrainConfig train;
  nn::NetworkConfig network;
  /// When set, each cell's trained parameters and loss trace are saved here.
  std::optional<fs::path> checkpoint_dir;
  /// Exact checkpoint path; takes precedence over checkpoint_dir.
  std::optional<fs::path> checkpoint_file;
  /// Called after every cell, e.g. for progress output.
  std::function<void(const ResultRow&)> on_cell;
  /// Rethrow instead of recording a failed row.
  bool stop_on_error = false;
};

inline std::string cell_name(const ResultRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_%s_%.0f_seed%llu", r.experiment.c_str(), r.mode.c_str(), r.cutoff,
                static_cast<unsigned long long>(r.seed));
  return buf;
}

/// Network config with the input shape taken from the stored features.
inline nn::NetworkConfig adapt_network(nn::NetworkConfig network, const augment::EchoSample& sample) {
  network.input_channels = sample.features.channels;
  network.input_bins = sample.features.bins;
  network.input_frames = sample.features.frames;
  network.validate();
  require(network.output_height == sample.depth.height && network.output_width == sample.depth.width,
          "network output shape does not match the stored depth maps");
  return network;
}

/// Trains one (mode, cutoff, seed) cell on the train split and evaluates it
/// on ultrasonic test features only.
inline ResultRow run_cell(const persistence::DatasetManifest& manifest, const std::string& experiment, TrainMode mode,
                          double cutoff, std::optional<double> auxiliary, std::uint64_t seed,
                          const RunOptions& options) {
  ResultRow row;
  row.experiment = experiment;
  row.mode = training::to_string(mode);
  row.cutoff = cutoff;
  if (auxiliary) row.auxiliary_cutoff = *auxiliary;
  row.seed = seed;
  try {
    const bool mixes = mode != TrainMode::kUltrasonicOnly;
    require(!mixes || auxiliary.has_value(), "mixing modes need an auxiliary cutoff");
    const persistence::ManifestDataset train_set(manifest, "train", cutoff,
                                                 mixes ? auxiliary : std::optional<double>());
    const persistence::ManifestDataset test_set(manifest, "test", cutoff);
    training::TrainConfig config = options.train;
    config.mode = mode;
    const auto network = adapt_network(options.network, train_set.ultrasonic(0));
    augment::MixPolicy policy;
    if (mixes) policy = {cutoff, *auxiliary, policy.max_band_gap};
    auto result = training::train(config, seed, train_set, policy, network);
    row.train_rmse = result.final_ultrasonic_rmse;
    row.test_rmse = training::evaluate(result.net, test_set).mean_rmse;
    if (test_set.auxiliary_reads() != 0) throw InvalidArgument("evaluation touched auxiliary features");
    std::optional<fs::path> checkpoint = options.checkpoint_file;
    if (!checkpoint && options.checkpoint_dir) checkpoint = *options.checkpoint_dir / (cell_name(row) + ".edck");
    if (checkpoint) {
      persistence::save_checkpoint(*checkpoint, result.net);
      persistence::write_file(fs::path(*checkpoint).replace_extension(".trace.csv"), training::trace_csv(result.trace));
    }
  } catch (const std::exception& e) {
    if (options.stop_on_error) throw;
    row.status = std::string("failed: ") + e.what();
    row.test_rmse = row.train_rmse = std::numeric_limits<double>::quiet_NaN();
  }
  if (options.on_cell) options.on_cell(row);
  return row;
}

/// One ultrasonic-only training per (cutoff, seed).
inline std::vector<ResultRow> run_sweep(const persistence::DatasetManifest& manifest, const SweepSpec& spec,
                                        const RunOptions& options) {
  spec.validate();
  std::vector<ResultRow> rows;
  for (double cutoff : spec.cutoffs) {
    for (std::uint64_t seed : spec.seeds) {
      rows.push_back(run_cell(manifest, "sweep", TrainMode::kUltrasonicOnly, cutoff, std::nullopt, seed, options));
    }
  }
  return rows;
}

/// Every mode at every ultrasonic cutoff, with the paired auxiliary cutoff.
inline std::vector<ResultRow> run_comparison(const persistence::DatasetManifest& manifest,
                                             const ComparisonSpec& spec, const RunOptions& options) {
  spec.validate();
  std::vector<ResultRow> rows;
  for (double cutoff : spec.ultrasonic_cutoffs) {
    const double auxiliary = augment::pair_cutoffs(cutoff, spec.pairs);
    for (TrainMode mode : spec.modes) {
      for (std::uint64_t seed : spec.seeds) {
        rows.push_back(run_cell(manifest, "comparison", mode, cutoff, auxiliary, seed, options));
      }
    }
  }
  return rows;
}

struct GroupSummary {
  std::string experiment;
  std::string mode;
  double cutoff = 0.0;
  double auxiliary_cutoff = std::numeric_limits<double>::quiet_NaN();
  std::size_t runs = 0;
  std::size_t failed = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();  // population
};

/// Mean and population standard deviation of successful cells per
/// (experiment, mode, cutoff), in order of first appearance.
inline std::vector<GroupSummary> summarize(const std::vector<ResultRow>& rows) {
  std::vector<GroupSummary> groups;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    std::size_t g = 0;
    while (g < groups.size() &&
           std::tie(groups[g].experiment, groups[g].mode, groups[g].cutoff) != std::tie(r.experiment, r.mode, r.cutoff)) {
      ++g;
    }
    if (g == groups.size()) {
      groups.push_back({r.experiment, r.mode, r.cutoff, r.auxiliary_cutoff});
      values.emplace_back();
    }
    if (r.ok()) {
      values[g].push_back(r.test_rmse);
    } else {
      ++groups[g].failed;
    }
    ++groups[g].runs;
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& v = values[g];
    if (v.empty()) continue;
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / double(v.size());
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    groups[g].mean = mean;
    groups[g].stddev = std::sqrt(sq / double(v.size()));
  }
  return groups;
}

inline const GroupSummary* find_group(const std::vector<GroupSummary>& groups, const std::string& experiment,
                                      const std::string& mode, double cutoff) {
  for (const auto& g : groups) {
    if (g.experiment == experiment && g.mode == mode && g.cutoff == cutoff) return &g;
  }
  return nullptr;
}

/// Shortest round-trip decimal text; "nan" for missing values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string rows_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "experiment,mode,cutoff_hz,auxiliary_cutoff_hz,seed,test_rmse,train_rmse,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (auto& c : status) {
      if (c == ',' || c == '\n' || c == '"') c = ';';
    }
    os << r.experiment << ',' << r.mode << ',' << format_number(r.cutoff) << ',' << format_number(r.auxiliary_cutoff)
       << ',' << r.seed << ',' << format_number(r.test_rmse) << ',' << format_number(r.train_rmse) << ',' << status
       << '\n';
  }
  return os.str();
}

inline std::string summary_csv(const std::vector<GroupSummary>& groups) {
  std::ostringstream os;
  os << "experiment,mode,cutoff_hz,auxiliary_cutoff_hz,runs,failed,mean_test_rmse,std_test_rmse\n";
  for (const auto& g : groups) {
    os << g.experiment << ',' << g.mode << ',' << format_number(g.cutoff) << ',' << format_number(g.auxiliary_cutoff)
       << ',' << g.runs << ',' << g.failed << ',' << format_number(g.mean) << ',' << format_number(g.stddev) << '\n';
  }
  return os.str();
}

inline std::string summary_text(const std::vector<GroupSummary>& groups) {
  std::ostringstream os;
  char line[200];
  for (const auto& g : groups) {
    std::snprintf(line, sizeof line, "%-10s %-16s %8.0f Hz  n=%zu  rmse %.4f +- %.4f%s\n", g.experiment.c_str(),
                  g.mode.c_str(), g.cutoff, g.runs - g.failed, g.mean, g.stddev,
                  g.failed ? "  (failed cells present)" : "");
    os << line;
  }
  return os.str();
}

/// Ordering checks on the summary: ultrasonic-only RMSE at 22000 Hz against
/// 19500 Hz in the sweep, and proposed against each baseline in the
/// comparison. Missing groups are skipped.
inline std::string trend_text(const std::vector<GroupSummary>& groups) {
  std::ostringstream os;
  char line[200];
  const auto* hi = find_group(groups, "sweep", "ultrasonic_only", 22000.0);
  const auto* lo = find_group(groups, "sweep", "ultrasonic_only", 19500.0);
  if (hi && lo) {
    std::snprintf(line, sizeof line, "sweep: rmse(22000) %.4f %s rmse(19500) %.4f\n", hi->mean,
                  hi->mean >= lo->mean ? ">=" : "<", lo->mean);
    os << line;
  }
  for (const auto& g : groups) {
    if (g.experiment != "comparison" || g.mode != "proposed") continue;
    for (const char* base : {"ultrasonic_only", "augmented_only"}) {
      const auto* b = find_group(groups, "comparison", base, g.cutoff);
      if (!b) continue;
      std::snprintf(line, sizeof line, "comparison %.0f Hz: proposed %.4f %s %s %.4f\n", g.cutoff, g.mean,
                    g.mean <= b->mean ? "<=" : ">", base, b->mean);
      os << line;
    }
  }
  return os.str();
}

struct ReportFiles {
  fs::path rows;
  fs::path summary;
  fs::path text;
};

/// Writes `<name>.csv`, `<name>_summary.csv` and `<name>_summary.txt`.
inline ReportFiles emit_report(const std::vector<ResultRow>& rows, const fs::path& out_dir, const std::string& name) {
  require(!rows.empty(), "cannot report an empty table");
  const auto groups = summarize(rows);
  ReportFiles files{out_dir / (name + ".csv"), out_dir / (name + "_summary.csv"), out_dir / (name + "_summary.txt")};
  persistence::write_file(files.rows, rows_csv(rows));
  persistence::write_file(files.summary, summary_csv(groups));
  persistence::write_file(files.text, summary_text(groups) + trend_text(groups));
  return files;
}

/// Everything one config file controls.
struct ProjectConfig {
  persistence::GenerationConfig generation;
  nn::NetworkConfig network;
  training::TrainConfig train;
  SweepSpec sweep;
  ComparisonSpec comparison;
};

inline ProjectConfig project_from(const persistence::json& j) {
  ProjectConfig p;
  try {
    if (j.contains("generation")) p.generation = persistence::generation_from(j["generation"]);
    if (j.contains("network")) p.network = persistence::network_from(j["network"]);
    if (j.contains("train")) p.train = persistence::train_config_from(j["train"]);
    p.sweep.seeds = p.comparison.seeds = p.train.seeds;
    if (j.contains("sweep")) {
      p.sweep.cutoffs = j["sweep"].value("cutoffs", p.sweep.cutoffs);
    }
    if (j.contains("comparison")) {
      const auto& c = j["comparison"];
      p.comparison.ultrasonic_cutoffs = c.value("ultrasonic_cutoffs", p.comparison.ultrasonic_cutoffs);
      if (c.contains("modes")) {
        p.comparison.modes.clear();
        for (const auto& m : c["modes"]) p.comparison.modes.push_back(training::parse_mode(m.get<std::string>()));
      }
    }
  } catch (const persistence::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  const bool explicit_output = j.contains("network") && (j["network"].contains("output_height") ||
                                                         j["network"].contains("output_width") ||
                                                         j["network"].contains("max_depth"));
  if (explicit_output) {
    require(p.network.output_height == p.generation.depth_height &&
                p.network.output_width == p.generation.depth_width && p.network.max_depth == p.generation.max_depth,
            "network output must match the generated depth maps");
  }
  p.network.output_height = p.generation.depth_height;
  p.network.output_width = p.generation.depth_width;
  p.network.max_depth = p.generation.max_depth;
  p.sweep.validate();
  p.comparison.validate();
  return p;
}

inline ProjectConfig load_project(const fs::path& path) {
  const auto bytes = persistence::read_file(path);
  try {
    return project_from(persistence::json::parse(bytes.begin(), bytes.end()));
  } catch (const persistence::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

/// Parses a table written by rows_csv.
inline std::vector<ResultRow> parse_rows_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("experiment,mode,", 0) != 0) throw FormatError("not a result table");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw FormatError("result row has " + std::to_string(f.size()) + " fields");
    auto num = [](const std::string& s) { return s == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s); };
    ResultRow r;
    r.experiment = f[0];
    r.mode = f[1];
    r.cutoff = num(f[2]);
    r.auxiliary_cutoff = num(f[3]);
    r.seed = std::stoull(f[4]);
    r.test_rmse = num(f[5]);
    r.train_rmse = num(f[6]);
    r.status = f[7];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace echodepth::experiments
