// Copyright 2026 The qalloc developers
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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <random>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include "oracles.hpp"
#include "qalloc/pipeline.hpp"

using qalloc::allocate_with_escalation;
using qalloc::compare_forms;
using qalloc::EscalationError;
using qalloc::export_run;
using qalloc::make_instance;
using qalloc::ProblemInstance;
using qalloc::RunConfig;

namespace {

namespace fs = std::filesystem;

ProblemInstance small_instance(std::uint64_t seed = 1, int n_c = 3,
                               int n_p = 5) {
  std::mt19937_64 rng(seed);
  return make_instance(oracles::random_circuit(rng, n_c, 10, 25),
                       oracles::random_device(rng, n_p, 0.9, 0.995),
                       qalloc::SwapMode::round_trip);
}

RunConfig small_config() {
  RunConfig config;
  config.num_reads = 50;
  config.num_sweeps = 300;
  config.seed = 2026;
  config.num_threads = 2;
  return config;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() /
             ("qalloc_test_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("escalation terminates with every read valid") {
  const auto instance = small_instance();
  const auto result = allocate_with_escalation(small_config(), instance);
  CHECK(result.final_penalty_multiplier >= 1);
  CHECK(result.sample_reports.size() == 50);
  for (const auto& report : result.sample_reports) REQUIRE(report.valid);
  // best is the top-ranked report under the default metric (naive swaps).
  for (const auto& report : result.sample_reports)
    CHECK(result.best.naive_swaps <= report.naive_swaps);
  CHECK(result.penalties_used.phi == result.penalties_used.theta);
  CHECK(result.penalties_used.gamma == 0.0);
}

TEST_CASE("a single logical qubit terminates at multiplier 1") {
  std::mt19937_64 rng(3);
  const auto instance =
      make_instance(oracles::random_circuit(rng, 1, 20, 0),
                    oracles::path_device(3, 0.9, 0.8),
                    qalloc::SwapMode::round_trip);
  auto config = small_config();
  config.num_reads = 10;
  const auto result = allocate_with_escalation(config, instance);
  CHECK(result.final_penalty_multiplier == 1);
  CHECK(result.best.allocation.mapping.size() == 1);
  // The single logical qubit lands on the best single-qubit fidelity (all
  // equal here, so any column), with no SWAP cost.
  CHECK(result.best.naive_swaps == 0);
}

TEST_CASE("nonpositive multiplier cap is a configuration error") {
  auto config = small_config();
  config.penalty_multiplier_max = 0;
  CHECK_THROWS_AS(allocate_with_escalation(config, small_instance()),
                  qalloc::ConfigError);
}

TEST_CASE("starved schedules exhaust the escalation loop") {
  // One sweep cannot fix up a random start, so reads stay invalid and the
  // loop reports per-multiplier invalid fractions.
  const auto instance = small_instance(5, 4, 8);
  auto config = small_config();
  config.num_sweeps = 1;
  config.num_reads = 40;
  config.penalty_multiplier_max = 2;
  try {
    allocate_with_escalation(config, instance);
    FAIL("expected EscalationError");
  } catch (const EscalationError& err) {
    REQUIRE(err.invalid_fraction_per_multiplier.size() == 2);
    for (double f : err.invalid_fraction_per_multiplier) CHECK(f > 0.0);
  }
}

TEST_CASE("filter-invalid keeps the valid subset instead of re-running") {
  const auto instance = small_instance(5, 4, 8);
  auto config = small_config();
  config.num_sweeps = 60;  // starved enough to leave some invalid reads
  config.num_reads = 60;
  config.filter_invalid = true;
  const auto result = allocate_with_escalation(config, instance);
  CHECK(result.final_penalty_multiplier == 1);
  if (result.reads_filtered > 0)
    CHECK(result.sample_reports.size() ==
          60u - static_cast<unsigned>(result.reads_filtered));
  for (const auto& report : result.sample_reports) REQUIRE(report.valid);
}

TEST_CASE("identical configs reproduce samples.csv byte for byte") {
  const auto instance = small_instance();
  auto config = small_config();
  config.circuit_path = "in-memory";
  config.device_path = "in-memory";

  TempDir first("a"), second("b");
  export_run(allocate_with_escalation(config, instance), config,
             first.path.string());
  export_run(allocate_with_escalation(config, instance), config,
             second.path.string());
  CHECK(slurp(first.path / "samples.csv") == slurp(second.path / "samples.csv"));
  CHECK(slurp(first.path / "best_allocation.json") ==
        slurp(second.path / "best_allocation.json"));

  auto reseeded = config;
  reseeded.seed = config.seed + 1;
  TempDir third("c");
  export_run(allocate_with_escalation(reseeded, instance), reseeded,
             third.path.string());
  CHECK(slurp(first.path / "samples.csv") != slurp(third.path / "samples.csv"));
}

TEST_CASE("export writes the five run artifacts with valid schemas") {
  const auto instance = small_instance();
  auto config = small_config();
  config.circuit_path = "circuit.qasm";
  config.device_path = "device.json";
  const auto result = allocate_with_escalation(config, instance);

  TempDir dir("export");
  export_run(result, config, dir.path.string());
  for (const char* name :
       {"best_allocation.json", "samples.csv", "heatmap.csv", "histogram.csv",
        "run_meta.json"})
    REQUIRE(fs::exists(dir.path / name));

  const auto best = nlohmann::json::parse(slurp(dir.path / "best_allocation.json"));
  CHECK(best.at("mapping").size() == 3);
  CHECK(best.at("seed").get<std::uint64_t>() == 2026);
  CHECK(best.at("naive_swaps").get<std::int64_t>() == result.best.naive_swaps);

  const auto meta = nlohmann::json::parse(slurp(dir.path / "run_meta.json"));
  CHECK(meta.at("penalty_multiplier").get<int>() ==
        result.final_penalty_multiplier);
  CHECK(meta.contains("timings"));
  CHECK(meta.at("invalid_fraction_per_multiplier").size() ==
        result.invalid_fraction_per_multiplier.size());

  std::istringstream samples(slurp(dir.path / "samples.csv"));
  std::string line;
  std::getline(samples, line);
  CHECK(line.rfind("read_index,", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(samples, line)) ++rows;
  CHECK(rows == 50);

  std::istringstream histogram(slurp(dir.path / "histogram.csv"));
  std::getline(histogram, line);
  CHECK(line == "bin_lo,bin_hi,count");
  rows = 0;
  std::int64_t total = 0;
  while (std::getline(histogram, line)) {
    ++rows;
    total += std::stoll(line.substr(line.rfind(',') + 1));
  }
  CHECK(rows == 50);
  CHECK(total == 50);  // every read lands in exactly one bin

  std::istringstream heatmap(slurp(dir.path / "heatmap.csv"));
  std::getline(heatmap, line);
  CHECK(line == "qubit,low_freq,mid_freq,high_freq");
  rows = 0;
  while (std::getline(heatmap, line)) ++rows;
  CHECK(rows == 5);  // one per hardware qubit
}

TEST_CASE("energy histograms of converged runs skew toward low energies") {
  // Small instances converge on the best allocation for most reads, which
  // leaves the energy distribution with a long right tail: mean above
  // median.
  const auto device =
      qalloc::load_device(slurp(fs::path(QALLOC_DATA_DIR) /
                                "devices" / "melbourne.json"));
  std::mt19937_64 rng(7);
  const auto instance =
      make_instance(oracles::random_circuit(rng, 7, 100, 200), device,
                    qalloc::SwapMode::round_trip);
  auto config = small_config();
  config.num_reads = 200;
  config.num_sweeps = 500;
  const auto result = allocate_with_escalation(config, instance);
  std::vector<double> energies;
  for (const auto& report : result.sample_reports)
    energies.push_back(report.energy);
  std::sort(energies.begin(), energies.end());
  double mean = 0.0;
  for (double e : energies) mean += e;
  mean /= static_cast<double>(energies.size());
  const double median = energies[energies.size() / 2];
  CHECK(mean > median);
}

TEST_CASE("identical forms compare to exactly zero everywhere") {
  const auto instance = small_instance();
  auto base_config = small_config();
  std::vector<RunConfig> configs = {base_config, base_config};
  const auto comparison = compare_forms(configs, instance);
  REQUIRE(comparison.summaries.size() == 2);
  REQUIRE(comparison.differences.size() == 1);
  const auto& diff = comparison.differences.front();
  CHECK(diff.swaps_all_pct == 0.0);
  CHECK(diff.swaps_top1pct_pct == 0.0);
  CHECK(diff.success_pct == 0.0);
  CHECK(diff.baseline_swaps_all_pct == 0.0);
  CHECK(diff.baseline_swaps_top1pct_pct == 0.0);
}

TEST_CASE("form comparison rejects mismatched configs") {
  auto a = small_config();
  auto b = small_config();
  b.seed = a.seed + 1;
  CHECK_THROWS_AS(compare_forms({a, b}, small_instance()),
                  qalloc::ConfigError);
  auto c = small_config();
  c.num_reads = a.num_reads + 1;
  CHECK_THROWS_AS(compare_forms({a, c}, small_instance()),
                  qalloc::ConfigError);
  CHECK_THROWS_AS(compare_forms({a}, small_instance()), qalloc::ConfigError);
}

TEST_CASE("the top-1% mean uses the ceiling rule") {
  // 100 valid reads: the lowest-energy 1% is exactly one sample, so the two
  // statistics differ unless that single best dominates.
  const auto instance = small_instance();
  auto config = small_config();
  config.num_reads = 100;
  std::vector<RunConfig> configs = {config, config};
  configs[1].form.distance_exponent = 2;
  const auto comparison = compare_forms(configs, instance);
  for (const auto& summary : comparison.summaries) {
    CHECK(summary.valid_samples == 100);
    CHECK(summary.mean_swaps_top1pct >= 0.0);
    CHECK(summary.mean_swaps_all >= summary.mean_swaps_top1pct);
  }
}

TEST_CASE("distance-1 forms differ from distance-3 forms on a stretched device") {
  // A path device punishes long-range pairs heavily at exponent 3; the two
  // forms must at least produce complete, internally consistent tables.
  std::mt19937_64 rng(11);
  const auto instance =
      make_instance(oracles::random_circuit(rng, 4, 10, 40),
                    oracles::path_device(7, 0.94, 0.998),
                    qalloc::SwapMode::round_trip);
  auto config = small_config();
  std::vector<RunConfig> configs = {config, config};
  configs[0].form.distance_exponent = 1;
  configs[1].form.distance_exponent = 3;
  const auto comparison = compare_forms(configs, instance);
  REQUIRE(comparison.summaries.size() == 2);
  CHECK(comparison.summaries[0].form.distance_exponent == 1);
  CHECK(comparison.summaries[1].form.distance_exponent == 3);
  for (const auto& summary : comparison.summaries)
    CHECK(summary.valid_samples == 50);
}
