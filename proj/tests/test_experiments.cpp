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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include <unistd.h>

#include "echodepth/experiments/experiments.hpp"

namespace fs = std::filesystem;
namespace ex = echodepth::experiments;
namespace ps = echodepth::persistence;
using echodepth::training::TrainMode;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("echodepth_ex_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

const ps::DatasetManifest& shared_dataset() {
  static const ps::DatasetManifest m = [] {
    ps::GenerationConfig g;
    g.dataset_id = "unit";
    g.train_scenes = 3;
    g.test_scenes = 2;
    g.cutoffs = {19500.0, 20000.0};
    g.ranges.max_reflection_order = 2;
    g.filter_taps = 255;
    g.window_size = 128;
    g.hop = 128;
    return ps::build_dataset(g, fresh_dir("data"));
  }();
  return m;
}

ex::RunOptions quick_options() {
  ex::RunOptions o;
  o.train.epochs = 2;
  o.train.batch_size = 2;
  return o;
}

ex::ResultRow row(const std::string& experiment, const std::string& mode, double cutoff, std::uint64_t seed,
                  double rmse) {
  ex::ResultRow r;
  r.experiment = experiment;
  r.mode = mode;
  r.cutoff = cutoff;
  r.seed = seed;
  r.test_rmse = rmse;
  r.train_rmse = rmse / 2.0;
  return r;
}

std::vector<ex::ResultRow> random_table(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<ex::ResultRow> rows;
  for (double c : {15000.0, 19500.0, 22000.0})
    for (std::uint64_t s = 0; s < 5; ++s) rows.push_back(row("sweep", "ultrasonic_only", c, s, u(rng)));
  for (const char* m : {"ultrasonic_only", "augmented_only", "proposed"})
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto r = row("comparison", m, 20000.0, s, u(rng));
      r.auxiliary_cutoff = 19500.0;
      rows.push_back(r);
    }
  return rows;
}

std::string slurp(const fs::path& p) {
  const auto b = ps::read_file(p);
  return {b.begin(), b.end()};
}

}  // namespace

TEST(Summarize, GroupMeansMatchIndependentComputation) {
  const auto rows = random_table(1);
  std::map<std::pair<std::string, double>, std::vector<double>> buckets;
  for (const auto& r : rows) buckets[{r.experiment + "/" + r.mode, r.cutoff}].push_back(r.test_rmse);
  const auto groups = ex::summarize(rows);
  ASSERT_EQ(groups.size(), buckets.size());
  for (const auto& g : groups) {
    const auto& v = buckets.at({g.experiment + "/" + g.mode, g.cutoff});
    double mean = 0.0;
    for (double x : v) mean += x / double(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean) / double(v.size());
    EXPECT_EQ(g.runs, v.size());
    EXPECT_EQ(g.failed, 0u);
    EXPECT_NEAR(g.mean, mean, 1e-10);
    EXPECT_NEAR(g.stddev, std::sqrt(var), 1e-10);
  }
  EXPECT_EQ(groups.front().cutoff, 15000.0);
  EXPECT_EQ(groups.back().mode, "proposed");
}

TEST(Summarize, SingleRunHasZeroSpreadAndFailuresAreCounted) {
  const auto groups = ex::summarize({row("sweep", "ultrasonic_only", 19500.0, 0, 0.7)});
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].mean, 0.7);
  EXPECT_EQ(groups[0].stddev, 0.0);

  auto failed = row("sweep", "ultrasonic_only", 19500.0, 1, std::nan(""));
  failed.status = "failed: diverged";
  const auto mixed = ex::summarize({row("sweep", "ultrasonic_only", 19500.0, 0, 0.7), failed});
  EXPECT_EQ(mixed[0].runs, 2u);
  EXPECT_EQ(mixed[0].failed, 1u);
  EXPECT_EQ(mixed[0].mean, 0.7);
  const auto all_failed = ex::summarize({failed});
  EXPECT_TRUE(std::isnan(all_failed[0].mean));
}

TEST(Report, IdenticalTablesGiveIdenticalFiles) {
  const auto rows = random_table(2);
  const auto a = ex::emit_report(rows, fresh_dir("report_a"), "sweep");
  const auto b = ex::emit_report(rows, fresh_dir("report_b"), "sweep");
  EXPECT_EQ(slurp(a.rows), slurp(b.rows));
  EXPECT_EQ(slurp(a.summary), slurp(b.summary));
  EXPECT_EQ(slurp(a.text), slurp(b.text));
  EXPECT_NE(slurp(a.text).find("sweep: rmse(22000)"), std::string::npos);
  EXPECT_NE(slurp(a.text).find("comparison 20000 Hz: proposed"), std::string::npos);
  EXPECT_THROW(ex::emit_report({}, fresh_dir("report_c"), "x"), echodepth::InvalidArgument);
}

TEST(Report, CsvRoundTripIsExact) {
  auto rows = random_table(3);
  rows[4].status = "failed: bad, input";
  rows[4].test_rmse = rows[4].train_rmse = std::nan("");
  const auto back = ex::parse_rows_csv(ex::rows_csv(rows));
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].experiment, rows[i].experiment);
    EXPECT_EQ(back[i].mode, rows[i].mode);
    EXPECT_EQ(back[i].cutoff, rows[i].cutoff);
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(std::isnan(back[i].auxiliary_cutoff), std::isnan(rows[i].auxiliary_cutoff));
    if (rows[i].ok()) {
      EXPECT_EQ(back[i].test_rmse, rows[i].test_rmse);
      EXPECT_EQ(back[i].train_rmse, rows[i].train_rmse);
    }
  }
  EXPECT_EQ(back[4].status, "failed: bad; input");
  EXPECT_EQ(ex::rows_csv(back), ex::rows_csv(ex::parse_rows_csv(ex::rows_csv(back))));
  EXPECT_THROW(ex::parse_rows_csv("nope\n"), echodepth::FormatError);
  EXPECT_THROW(ex::parse_rows_csv("experiment,mode,x\nsweep,1\n"), echodepth::FormatError);
}

TEST(Specs, ValidateCutoffsAndPairs) {
  ex::SweepSpec s;
  s.seeds = {0};
  EXPECT_NO_THROW(s.validate());
  s.cutoffs = {20000.0, 19500.0};
  EXPECT_THROW(s.validate(), echodepth::InvalidArgument);
  s.cutoffs = {22050.0};
  EXPECT_THROW(s.validate(), echodepth::InvalidArgument);
  ex::ComparisonSpec c;
  c.seeds = {0};
  EXPECT_NO_THROW(c.validate());
  c.ultrasonic_cutoffs = {17000.0};
  EXPECT_THROW(c.validate(), echodepth::InvalidArgument);
}

TEST(Project, DeskConfigLoads) {
  const auto p = ex::load_project(fs::path(ECHODEPTH_SOURCE_DIR) / "configs" / "desk.json");
  EXPECT_EQ(p.sweep.cutoffs, ps::default_cutoffs());
  EXPECT_EQ(p.train.seeds.size(), 5u);
  EXPECT_EQ(p.comparison.modes.size(), 3u);
  EXPECT_EQ(p.network.output_height, p.generation.depth_height);
  auto j = ps::json::parse(slurp(fs::path(ECHODEPTH_SOURCE_DIR) / "configs" / "desk.json"));
  j["network"]["output_height"] = 16;
  EXPECT_THROW(ex::project_from(j), echodepth::InvalidArgument);
}

TEST(RunCell, SweepAndComparisonCardinality) {
  const auto& m = shared_dataset();
  ex::SweepSpec sweep{{19500.0, 20000.0}, {0, 1}};
  const auto rows = ex::run_sweep(m, sweep, quick_options());
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.ok()) << r.status;
    EXPECT_EQ(r.experiment, "sweep");
    EXPECT_EQ(r.mode, "ultrasonic_only");
    EXPECT_TRUE(std::isfinite(r.test_rmse));
    EXPECT_TRUE(std::isnan(r.auxiliary_cutoff));
  }
  ex::ComparisonSpec cmp;
  cmp.ultrasonic_cutoffs = {20000.0};
  cmp.seeds = {0, 1};
  const auto crow = ex::run_comparison(m, cmp, quick_options());
  ASSERT_EQ(crow.size(), 6u);
  for (const auto& r : crow) {
    EXPECT_TRUE(r.ok()) << r.status;
    EXPECT_EQ(r.auxiliary_cutoff, 19500.0);
  }
  EXPECT_EQ(ex::summarize(crow).size(), 3u);
  // The ultrasonic-only comparison cell is the same training as the sweep cell.
  EXPECT_EQ(crow[0].test_rmse, rows[2].test_rmse);
}

TEST(RunCell, RepeatedCellsAreBitIdentical) {
  const auto& m = shared_dataset();
  auto a = quick_options(), b = quick_options();
  a.checkpoint_dir = fresh_dir("ck_a");
  b.checkpoint_dir = fresh_dir("ck_b");
  const auto ra = ex::run_cell(m, "comparison", TrainMode::kProposed, 20000.0, 19500.0, 3, a);
  const auto rb = ex::run_cell(m, "comparison", TrainMode::kProposed, 20000.0, 19500.0, 3, b);
  ASSERT_TRUE(ra.ok()) << ra.status;
  EXPECT_EQ(ra.test_rmse, rb.test_rmse);
  EXPECT_EQ(ra.train_rmse, rb.train_rmse);
  const std::string name = ex::cell_name(ra);
  EXPECT_EQ(ps::read_file(*a.checkpoint_dir / (name + ".edck")), ps::read_file(*b.checkpoint_dir / (name + ".edck")));
  const auto trace = slurp(*a.checkpoint_dir / (name + ".trace.csv"));
  EXPECT_EQ(trace, slurp(*b.checkpoint_dir / (name + ".trace.csv")));
  EXPECT_EQ(trace.rfind("epoch,loss,ultrasonic_rmse,lambda\n0,", 0), 0u);

  const auto net = ps::load_checkpoint(*a.checkpoint_dir / (name + ".edck"));
  const ps::ManifestDataset test(m, "test", 20000.0);
  EXPECT_NEAR(echodepth::training::evaluate(net, test).mean_rmse, ra.test_rmse, 1e-12);
}

TEST(RunCell, CutoffOrderDoesNotChangeResults) {
  const auto& m = shared_dataset();
  const auto o = quick_options();
  const auto a1 = ex::run_cell(m, "sweep", TrainMode::kUltrasonicOnly, 19500.0, std::nullopt, 5, o);
  const auto a2 = ex::run_cell(m, "sweep", TrainMode::kUltrasonicOnly, 20000.0, std::nullopt, 5, o);
  const auto b2 = ex::run_cell(m, "sweep", TrainMode::kUltrasonicOnly, 20000.0, std::nullopt, 5, o);
  const auto b1 = ex::run_cell(m, "sweep", TrainMode::kUltrasonicOnly, 19500.0, std::nullopt, 5, o);
  EXPECT_EQ(a1.test_rmse, b1.test_rmse);
  EXPECT_EQ(a2.test_rmse, b2.test_rmse);
}

TEST(RunCell, FailuresAreRecordedOrRethrown) {
  const auto& m = shared_dataset();
  auto o = quick_options();
  const auto r = ex::run_cell(m, "comparison", TrainMode::kProposed, 20000.0, std::nullopt, 0, o);
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.status.rfind("failed: ", 0), 0u);
  EXPECT_TRUE(std::isnan(r.test_rmse));
  const auto missing = ex::run_cell(m, "sweep", TrainMode::kUltrasonicOnly, 15000.0, std::nullopt, 0, o);
  EXPECT_FALSE(missing.ok());
  o.stop_on_error = true;
  EXPECT_THROW(ex::run_cell(m, "sweep", TrainMode::kUltrasonicOnly, 15000.0, std::nullopt, 0, o),
               echodepth::InvalidArgument);
  int calls = 0;
  o.stop_on_error = false;
  o.on_cell = [&](const ex::ResultRow&) { ++calls; };
  ex::run_cell(m, "sweep", TrainMode::kUltrasonicOnly, 15000.0, std::nullopt, 0, o);
  EXPECT_EQ(calls, 1);
}
