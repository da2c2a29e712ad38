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

#pragma once

// End-to-end orchestration: parse circuit and device, build the base
// coefficients once, escalate penalties (phi = theta = m * max base
// coefficient for m = 1, 2, ...) until every annealed read decodes to a
// valid allocation, then rank and export.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qalloc/analysis.hpp"
#include "qalloc/annealer.hpp"
#include "qalloc/circuit.hpp"
#include "qalloc/device.hpp"
#include "qalloc/error.hpp"
#include "qalloc/qasm.hpp"
#include "qalloc/qubo.hpp"
#include "qalloc/version.hpp"

namespace qalloc {

struct RunConfig {
  std::string circuit_path;
  std::string device_path;
  CoefficientForm form{};
  SwapMode swap_mode = SwapMode::round_trip;
  int num_reads = 0;   // 0: 1000 reads, or 100 when n_p > 16
  int num_sweeps = 1000;
  std::uint64_t seed = 0;
  double beta_hot = 0.0;   // 0: derived from the problem
  double beta_cold = 0.0;  // 0: derived from the problem
  int penalty_multiplier_max = 10;
  double gamma_multiplier = 0.0;  // gamma = this * phi; off by default
  RankMetric selection_metric = RankMetric::naive_swaps;
  bool filter_invalid = false;  // drop invalid reads instead of re-running
  int num_threads = 0;          // 0: hardware concurrency
  std::string output_dir;

  void validate() const {
    if (num_reads < 0) throw ConfigError("num_reads must be positive");
    if (num_sweeps < 1) throw ConfigError("num_sweeps must be >= 1");
    if (penalty_multiplier_max < 1)
      throw ConfigError("penalty multiplier cap must be >= 1");
    if (gamma_multiplier < 0.0)
      throw ConfigError("gamma multiplier must be nonnegative");
  }
};

struct PhaseTimings {
  double build_seconds = 0.0;
  double anneal_seconds = 0.0;
  double analyze_seconds = 0.0;
};

/// Everything a finished run carries. sample_reports are ranked by the
/// selection metric; with filter_invalid off the escalation contract
/// guarantees they are all valid.
struct RunResult {
  AllocationReport best;
  std::vector<AllocationReport> sample_reports;
  int n_c = 0;
  int n_p = 0;
  int final_penalty_multiplier = 0;
  PenaltyConfig penalties_used{};
  AnnealSchedule schedule{};
  SampleSet sample_set;
  PhaseTimings timings{};
  int reads_requested = 0;
  int reads_filtered = 0;  // only with filter_invalid
  std::vector<double> invalid_fraction_per_multiplier;
};

/// Loaded inputs plus their derived tables; build once, reuse across runs.
struct ProblemInstance {
  QuantumCircuit circuit;
  InteractionSummary summary;
  DeviceModel device;
  DistanceMatrix distances;
  PathFidelityTable fidelities;

  AnalysisContext context() const {
    return {circuit, summary, device, distances, fidelities};
  }
};

inline ProblemInstance make_instance(QuantumCircuit circuit,
                                     DeviceModel device, SwapMode swap_mode) {
  ProblemInstance instance;
  instance.circuit = std::move(circuit);
  instance.summary = interaction_summary(instance.circuit);
  instance.device = std::move(device);
  instance.distances = all_pairs_distance(instance.device);
  instance.fidelities =
      pairwise_success(instance.device, instance.distances, swap_mode);
  return instance;
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

inline int default_reads(int n_p) { return n_p > 16 ? 100 : 1000; }

}  // namespace detail

inline ProblemInstance load_instance(const RunConfig& config) {
  QuantumCircuit circuit =
      parse_qasm(detail::read_file(config.circuit_path),
                 std::filesystem::path(config.circuit_path).stem().string());
  DeviceModel device = load_device(detail::read_file(config.device_path));
  return make_instance(std::move(circuit), std::move(device),
                       config.swap_mode);
}

/// The escalation loop: base coefficients are built once; for multiplier
/// m = 1, 2, ..., phi = theta = m * base_penalty_magnitude, the full batch
/// of reads runs, and the loop stops at the first m where every read is
/// valid. With filter_invalid set, a single batch runs at m = 1 and the
/// invalid reads are dropped instead.
inline RunResult allocate_with_escalation(const RunConfig& config,
                                          const ProblemInstance& instance) {
  config.validate();
  const auto t_build = std::chrono::steady_clock::now();

  RunResult result;
  result.n_c = instance.summary.n_c();
  result.n_p = instance.device.n_p;
  const QuboProblem base =
      build_base_coefficients(instance.summary, instance.device,
                              instance.distances, instance.fidelities,
                              config.form);
  const double magnitude = base_penalty_magnitude(base);
  // The penalty shift hides small base linear terms from the schedule
  // heuristic, but those terms are the only thing separating a valid
  // allocation from an over-assigned one (the phi/theta contributions
  // cancel when an empty column absorbs the extra bit). Keep the cold end
  // cold enough to resolve the base scale.
  const double base_cold = default_beta_range(base).second;
  result.timings.build_seconds = detail::seconds_since(t_build);

  AnnealSchedule schedule;
  schedule.num_sweeps = config.num_sweeps;
  schedule.num_reads = config.num_reads > 0
                           ? config.num_reads
                           : detail::default_reads(instance.device.n_p);
  result.reads_requested = schedule.num_reads;

  const auto t_anneal = std::chrono::steady_clock::now();
  std::vector<AllocationReport> reports;
  bool all_valid = false;
  for (int multiplier = 1; multiplier <= config.penalty_multiplier_max;
       ++multiplier) {
    PenaltyConfig penalties;
    penalties.phi = multiplier * magnitude;
    penalties.theta = multiplier * magnitude;
    penalties.gamma = config.gamma_multiplier * penalties.phi;
    const QuboProblem problem = apply_penalties(base, penalties);

    if (config.beta_hot > 0.0 && config.beta_cold > 0.0) {
      schedule.beta_hot = config.beta_hot;
      schedule.beta_cold = config.beta_cold;
    } else {
      const auto [hot, cold] = default_beta_range(problem);
      schedule.beta_hot = hot;
      schedule.beta_cold = std::max(cold, base_cold);
    }

    result.sample_set =
        sample(problem, schedule, config.seed, config.num_threads);
    reports = build_reports(result.sample_set, instance.context());

    int invalid = 0;
    for (const auto& report : reports) invalid += report.valid ? 0 : 1;
    result.invalid_fraction_per_multiplier.push_back(
        static_cast<double>(invalid) / static_cast<double>(reports.size()));
    result.final_penalty_multiplier = multiplier;
    result.penalties_used = penalties;
    result.schedule = schedule;

    if (invalid == 0) {
      all_valid = true;
      break;
    }
    if (config.filter_invalid) {
      std::vector<AllocationReport> kept;
      for (auto& report : reports)
        if (report.valid) kept.push_back(std::move(report));
      result.reads_filtered = static_cast<int>(reports.size() - kept.size());
      if (kept.empty())
        throw EscalationError("no valid allocation in " +
                                  std::to_string(reports.size()) + " reads",
                              result.invalid_fraction_per_multiplier);
      reports = std::move(kept);
      all_valid = true;
      break;
    }
  }
  result.timings.anneal_seconds = detail::seconds_since(t_anneal);

  if (!all_valid) {
    std::string detail = "penalty escalation exhausted at multiplier " +
                         std::to_string(config.penalty_multiplier_max) +
                         "; invalid fraction per multiplier:";
    for (double f : result.invalid_fraction_per_multiplier)
      detail += " " + std::to_string(f);
    throw EscalationError(detail, result.invalid_fraction_per_multiplier);
  }

  const auto t_analyze = std::chrono::steady_clock::now();
  result.sample_reports =
      rank_reports(std::move(reports), config.selection_metric);
  result.best = result.sample_reports.front();
  result.timings.analyze_seconds = detail::seconds_since(t_analyze);
  return result;
}

inline RunResult allocate_with_escalation(const RunConfig& config) {
  const ProblemInstance instance = load_instance(config);
  return allocate_with_escalation(config, instance);
}

/// Per-form aggregates over a shared (circuit, device, seed) run.
struct FormSummary {
  CoefficientForm form;
  double mean_swaps_all = 0.0;
  double mean_swaps_top1pct = 0.0;  // lowest-energy 1% (ceil to >= 1 sample)
  double mean_success = 0.0;
  std::size_t valid_samples = 0;
};

struct FormDifference {
  std::size_t first = 0;   // indices into summaries
  std::size_t second = 0;
  // 100 * (second - first) / midpoint; negative favours the second form for
  // lower-is-better metrics. baseline_* uses the first form as denominator.
  double swaps_all_pct = 0.0;
  double swaps_top1pct_pct = 0.0;
  double success_pct = 0.0;
  double baseline_swaps_all_pct = 0.0;
  double baseline_swaps_top1pct_pct = 0.0;
};

struct FormComparison {
  std::vector<FormSummary> summaries;
  std::vector<FormDifference> differences;
};

namespace detail {

inline double symmetric_pct(double first, double second) {
  const double mid = 0.5 * (first + second);
  if (mid == 0.0) return 0.0;
  return 100.0 * (second - first) / mid;
}

inline double baseline_pct(double first, double second) {
  if (first == 0.0) return 0.0;
  return 100.0 * (second - first) / first;
}

}  // namespace detail

/// Runs each config (which must differ only in coefficient form) and
/// tabulates mean naive SWAPs over all valid samples, over the
/// lowest-energy 1%, and mean success probability, with pairwise
/// percentage differences in both the symmetric and baseline-relative
/// conventions.
inline FormComparison compare_forms(const std::vector<RunConfig>& configs,
                                    const ProblemInstance& instance) {
  if (configs.size() < 2)
    throw ConfigError("compare_forms needs at least two configurations");
  for (std::size_t c = 1; c < configs.size(); ++c) {
    const RunConfig& a = configs[0];
    const RunConfig& b = configs[c];
    if (a.circuit_path != b.circuit_path || a.device_path != b.device_path ||
        a.seed != b.seed || a.num_reads != b.num_reads ||
        a.num_sweeps != b.num_sweeps || a.swap_mode != b.swap_mode ||
        a.beta_hot != b.beta_hot || a.beta_cold != b.beta_cold ||
        a.penalty_multiplier_max != b.penalty_multiplier_max ||
        a.gamma_multiplier != b.gamma_multiplier ||
        a.filter_invalid != b.filter_invalid)
      throw ConfigError(
          "compare_forms configurations may differ only in coefficient form");
  }

  FormComparison comparison;
  for (const RunConfig& config : configs) {
    const RunResult result = allocate_with_escalation(config, instance);

    FormSummary summary;
    summary.form = config.form;
    summary.valid_samples = result.sample_reports.size();

    std::vector<const AllocationReport*> by_energy;
    for (const auto& report : result.sample_reports)
      by_energy.push_back(&report);
    std::stable_sort(by_energy.begin(), by_energy.end(),
                     [](const AllocationReport* a, const AllocationReport* b) {
                       return a->energy < b->energy;
                     });

    double swaps = 0.0, success = 0.0;
    for (const AllocationReport* report : by_energy) {
      swaps += static_cast<double>(report->naive_swaps);
      success += report->success_probability;
    }
    summary.mean_swaps_all = swaps / static_cast<double>(by_energy.size());
    summary.mean_success = success / static_cast<double>(by_energy.size());

    const std::size_t top = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(by_energy.size() / 100.0)));
    double top_swaps = 0.0;
    for (std::size_t r = 0; r < top; ++r)
      top_swaps += static_cast<double>(by_energy[r]->naive_swaps);
    summary.mean_swaps_top1pct = top_swaps / static_cast<double>(top);

    comparison.summaries.push_back(summary);
  }

  for (std::size_t a = 0; a < comparison.summaries.size(); ++a) {
    for (std::size_t b = a + 1; b < comparison.summaries.size(); ++b) {
      const FormSummary& first = comparison.summaries[a];
      const FormSummary& second = comparison.summaries[b];
      FormDifference diff;
      diff.first = a;
      diff.second = b;
      diff.swaps_all_pct =
          detail::symmetric_pct(first.mean_swaps_all, second.mean_swaps_all);
      diff.swaps_top1pct_pct = detail::symmetric_pct(
          first.mean_swaps_top1pct, second.mean_swaps_top1pct);
      diff.success_pct =
          detail::symmetric_pct(first.mean_success, second.mean_success);
      diff.baseline_swaps_all_pct =
          detail::baseline_pct(first.mean_swaps_all, second.mean_swaps_all);
      diff.baseline_swaps_top1pct_pct = detail::baseline_pct(
          first.mean_swaps_top1pct, second.mean_swaps_top1pct);
      comparison.differences.push_back(diff);
    }
  }
  return comparison;
}

inline FormComparison compare_forms(const std::vector<RunConfig>& configs) {
  if (configs.empty())
    throw ConfigError("compare_forms needs at least two configurations");
  const ProblemInstance instance = load_instance(configs.front());
  return compare_forms(configs, instance);
}

namespace detail {

inline nlohmann::json form_json(const CoefficientForm& form) {
  return {{"distance_exponent", form.distance_exponent},
          {"include_error", form.include_error},
          {"linear_enabled", form.linear_enabled}};
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out << content;
}

}  // namespace detail

/// Writes best_allocation.json, samples.csv, heatmap.csv, histogram.csv
/// (50 bins spanning the observed energy range) and run_meta.json into
/// output_dir (created if missing).
inline void export_run(const RunResult& result, const RunConfig& config,
                       const std::string& output_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir))
    throw Error("cannot create output directory: " + output_dir);

  {
    nlohmann::json best;
    best["circuit"] = config.circuit_path;
    best["device"] = config.device_path;
    best["seed"] = config.seed;
    best["selection_metric"] = to_string(config.selection_metric);
    best["config"] = {
        {"form", detail::form_json(config.form)},
        {"swap_mode", to_string(config.swap_mode)},
        {"num_reads", result.reads_requested},
        {"num_sweeps", config.num_sweeps},
        {"penalty_multiplier_max", config.penalty_multiplier_max},
        {"gamma_multiplier", config.gamma_multiplier},
        {"filter_invalid", config.filter_invalid},
    };
    best["mapping"] = result.best.allocation.mapping;
    best["energy"] = result.best.energy;
    best["naive_swaps"] = result.best.naive_swaps;
    best["success_probability"] = result.best.success_probability;
    best["log10_success_probability"] = result.best.log10_success_probability;
    detail::write_text_file(dir / "best_allocation.json", best.dump(2) + "\n");
  }

  {
    std::ostringstream csv;
    write_samples_csv(csv, result.sample_reports);
    detail::write_text_file(dir / "samples.csv", csv.str());
  }

  {
    std::ostringstream csv;
    if (result.sample_reports.size() >= 3) {
      write_heatmap_csv(csv, heatmap_bands(result.sample_reports, result.n_p));
    } else {
      csv << "qubit,low_freq,mid_freq,high_freq\n";  // too few samples to band
    }
    detail::write_text_file(dir / "heatmap.csv", csv.str());
  }

  {
    double lo = result.sample_set.samples.front().energy;
    double hi = lo;
    for (const Sample& s : result.sample_set.samples) {
      lo = std::min(lo, s.energy);
      hi = std::max(hi, s.energy);
    }
    constexpr int kBins = 50;
    std::vector<std::int64_t> counts(kBins, 0);
    const double width = (hi - lo) / kBins;
    for (const Sample& s : result.sample_set.samples) {
      int bin = width == 0.0
                    ? 0
                    : std::min(kBins - 1,
                               static_cast<int>((s.energy - lo) / width));
      ++counts[bin];
    }
    std::ostringstream csv;
    csv << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < kBins; ++b)
      csv << detail::format_double(lo + b * width) << ','
          << detail::format_double(b + 1 == kBins ? hi : lo + (b + 1) * width)
          << ',' << counts[b] << '\n';
    detail::write_text_file(dir / "histogram.csv", csv.str());
  }

  {
    nlohmann::json meta;
    meta["version"] = kVersion;
    meta["penalty_multiplier"] = result.final_penalty_multiplier;
    meta["phi"] = result.penalties_used.phi;
    meta["theta"] = result.penalties_used.theta;
    meta["gamma"] = result.penalties_used.gamma;
    meta["beta_hot"] = result.schedule.beta_hot;
    meta["beta_cold"] = result.schedule.beta_cold;
    meta["num_sweeps"] = result.schedule.num_sweeps;
    meta["num_reads"] = result.reads_requested;
    meta["reads_filtered"] = result.reads_filtered;
    meta["filter_invalid"] = config.filter_invalid;
    meta["invalid_fraction_per_multiplier"] =
        result.invalid_fraction_per_multiplier;
    meta["timings"] = {{"build_seconds", result.timings.build_seconds},
                       {"anneal_seconds", result.timings.anneal_seconds},
                       {"analyze_seconds", result.timings.analyze_seconds}};
    detail::write_text_file(dir / "run_meta.json", meta.dump(2) + "\n");
  }
}

}  // namespace qalloc
