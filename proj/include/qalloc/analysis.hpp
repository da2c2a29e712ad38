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

// Decodes annealed bitstrings into allocations, validates the bijectivity
// constraints, and computes the quality metrics: naive SWAP count and
// success probability under the shortest-path routing model. Also provides
// the distribution analyses (ranking, heatmap bands, rank correlation).

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qalloc/annealer.hpp"
#include "qalloc/circuit.hpp"
#include "qalloc/device.hpp"
#include "qalloc/error.hpp"
#include "qalloc/qubo.hpp"

namespace qalloc {

/// Injective logical-to-physical map: mapping[i] is the hardware qubit
/// assigned to logical qubit i.
struct Allocation {
  std::vector<int> mapping;
};

/// Result of decoding a bitstring. Invalidity is data, not an error: the
/// violation lists name the over- or under-assigned rows (logical qubits)
/// and over-assigned columns (hardware qubits).
struct DecodeResult {
  bool valid = false;
  Allocation allocation;
  std::vector<int> bad_rows;
  std::vector<int> bad_cols;
};

inline DecodeResult decode(std::span<const std::uint8_t> state, int n_c,
                           int n_p) {
  if (static_cast<int>(state.size()) != n_c * n_p)
    throw Error("state length does not match n_c * n_p");
  DecodeResult result;
  result.allocation.mapping.assign(n_c, -1);
  std::vector<int> column_load(n_p, 0);
  for (int i = 0; i < n_c; ++i) {
    int row_count = 0;
    for (int j = 0; j < n_p; ++j) {
      if (state[static_cast<std::size_t>(i) * n_p + j]) {
        ++row_count;
        result.allocation.mapping[i] = j;
        ++column_load[j];
      }
    }
    if (row_count != 1) result.bad_rows.push_back(i);
  }
  for (int j = 0; j < n_p; ++j)
    if (column_load[j] > 1) result.bad_cols.push_back(j);
  result.valid = result.bad_rows.empty() && result.bad_cols.empty();
  if (!result.valid) result.allocation.mapping.clear();
  return result;
}

/// Encodes a valid allocation back into a bitvector (inverse of decode).
inline std::vector<std::uint8_t> encode(const Allocation& allocation,
                                        int n_p) {
  std::vector<std::uint8_t> state(allocation.mapping.size() * n_p, 0);
  for (std::size_t i = 0; i < allocation.mapping.size(); ++i)
    state[i * n_p + allocation.mapping[i]] = 1;
  return state;
}

namespace detail {

inline void require_valid_allocation(const Allocation& allocation, int n_p) {
  std::set<int> seen;
  for (int j : allocation.mapping) {
    if (j < 0 || j >= n_p)
      throw Error("allocation maps outside the hardware graph");
    if (!seen.insert(j).second)
      throw Error("allocation is not injective (hardware qubit " +
                  std::to_string(j) + " reused)");
  }
}

}  // namespace detail

/// SWAPs required under the naive routing model: each two-qubit gate at
/// distance d costs d-1 SWAPs to bring the operands together, doubled in
/// round_trip mode by swapping back immediately afterwards.
inline std::int64_t naive_swap_count(const Allocation& allocation,
                                     const InteractionSummary& summary,
                                     const DistanceMatrix& distances,
                                     SwapMode swap_mode) {
  detail::require_valid_allocation(allocation, distances.size());
  const int per_gate_factor = swap_mode == SwapMode::round_trip ? 2 : 1;
  std::int64_t swaps = 0;
  const int n_c = summary.n_c();
  for (int i = 0; i < n_c; ++i) {
    for (int k = i + 1; k < n_c; ++k) {
      if (summary.g_pair[i][k] == 0) continue;
      const int d = distances(allocation.mapping[i], allocation.mapping[k]);
      swaps += summary.g_pair[i][k] *
               static_cast<std::int64_t>(per_gate_factor) * (d - 1);
    }
  }
  return swaps;
}

struct SuccessProbability {
  double value = 1.0;
  double log10_value = 0.0;
};

/// Product of per-gate success probabilities over the naively routed
/// circuit, accumulated in the log domain so deep circuits degrade to an
/// underflowed value of 0 while log10_value stays informative.
inline SuccessProbability allocation_success_probability(
    const Allocation& allocation, const QuantumCircuit& circuit,
    const DeviceModel& device, const PathFidelityTable& fidelities) {
  detail::require_valid_allocation(allocation, device.n_p);
  double log_p = 0.0;
  for (const auto& gate : circuit.gates) {
    if (gate.is_single_qubit()) {
      log_p += std::log(device.p_single[allocation.mapping[gate.operands[0]]]);
    } else {
      log_p += std::log(fidelities(allocation.mapping[gate.operands[0]],
                                   allocation.mapping[gate.operands[1]]));
    }
  }
  SuccessProbability result;
  result.value = std::exp(log_p);
  result.log10_value = log_p / std::numbers::ln10;
  return result;
}

enum class RankMetric { energy, naive_swaps, success_probability };

inline const char* to_string(RankMetric metric) {
  switch (metric) {
    case RankMetric::energy: return "energy";
    case RankMetric::naive_swaps: return "naive_swaps";
    default: return "success_probability";
  }
}

struct AllocationReport {
  int read_index = 0;
  bool valid = false;
  Allocation allocation;          // empty when invalid
  std::vector<int> bad_rows;      // violations, when invalid
  std::vector<int> bad_cols;
  double energy = 0.0;
  std::int64_t naive_swaps = 0;   // meaningful only when valid
  double success_probability = 0.0;
  double log10_success_probability = 0.0;
};

/// Read-only bundle of the artifacts a report needs.
struct AnalysisContext {
  const QuantumCircuit& circuit;
  const InteractionSummary& summary;
  const DeviceModel& device;
  const DistanceMatrix& distances;
  const PathFidelityTable& fidelities;
};

/// One report per sample, in read order. Invalid samples keep their energy
/// and violation lists but carry no metrics.
inline std::vector<AllocationReport> build_reports(
    const SampleSet& samples, const AnalysisContext& ctx) {
  std::vector<AllocationReport> reports;
  reports.reserve(samples.samples.size());
  for (std::size_t r = 0; r < samples.samples.size(); ++r) {
    const Sample& sample = samples.samples[r];
    AllocationReport report;
    report.read_index = static_cast<int>(r);
    report.energy = sample.energy;
    DecodeResult decoded =
        decode(sample.state, ctx.summary.n_c(), ctx.device.n_p);
    report.valid = decoded.valid;
    report.bad_rows = std::move(decoded.bad_rows);
    report.bad_cols = std::move(decoded.bad_cols);
    if (decoded.valid) {
      report.allocation = std::move(decoded.allocation);
      report.naive_swaps =
          naive_swap_count(report.allocation, ctx.summary, ctx.distances,
                           ctx.fidelities.swap_mode);
      const SuccessProbability p = allocation_success_probability(
          report.allocation, ctx.circuit, ctx.device, ctx.fidelities);
      report.success_probability = p.value;
      report.log10_success_probability = p.log10_value;
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

/// Sorts reports by the chosen metric: ascending for energy and
/// naive_swaps, descending for success_probability. Invalid samples sort
/// last; ties break by energy, then by first occurrence.
inline std::vector<AllocationReport> rank_reports(
    std::vector<AllocationReport> reports, RankMetric metric) {
  std::stable_sort(
      reports.begin(), reports.end(),
      [metric](const AllocationReport& a, const AllocationReport& b) {
        if (a.valid != b.valid) return a.valid;
        if (!a.valid) return false;  // invalid block keeps read order
        switch (metric) {
          case RankMetric::energy:
            return a.energy < b.energy;
          case RankMetric::naive_swaps:
            if (a.naive_swaps != b.naive_swaps)
              return a.naive_swaps < b.naive_swaps;
            return a.energy < b.energy;
          default:
            if (a.success_probability != b.success_probability)
              return a.success_probability > b.success_probability;
            return a.energy < b.energy;
        }
      });
  return reports;
}

inline std::vector<AllocationReport> rank_samples(const SampleSet& samples,
                                                  const AnalysisContext& ctx,
                                                  RankMetric metric) {
  return rank_reports(build_reports(samples, ctx), metric);
}

/// Per-qubit usage frequencies for three energy-percentile slices of the
/// valid samples: the lowest band_width percent, a band centred on the
/// median rank, and the highest band_width percent. Band sizes floor to at
/// least one sample.
struct HeatmapBands {
  std::vector<double> low;
  std::vector<double> mid;
  std::vector<double> high;
  double band_width = 5.0;
  std::size_t band_size = 0;
};

inline HeatmapBands heatmap_bands(const std::vector<AllocationReport>& reports,
                                  int n_p, double band_width = 5.0) {
  if (band_width <= 0.0 || band_width > 100.0)
    throw Error("band width must lie in (0, 100]");
  std::vector<const AllocationReport*> valid;
  for (const auto& report : reports)
    if (report.valid) valid.push_back(&report);
  if (valid.size() < 3)
    throw Error("heatmap bands need at least 3 valid samples, got " +
                std::to_string(valid.size()));
  std::stable_sort(valid.begin(), valid.end(),
                   [](const AllocationReport* a, const AllocationReport* b) {
                     return a->energy < b->energy;
                   });

  const std::size_t m = valid.size();
  const std::size_t band = std::max<std::size_t>(
      1, static_cast<std::size_t>(m * band_width / 100.0));

  const auto frequencies = [&](std::size_t begin, std::size_t count) {
    std::vector<double> freq(n_p, 0.0);
    for (std::size_t r = begin; r < begin + count; ++r)
      for (int q : valid[r]->allocation.mapping) freq[q] += 1.0;
    for (double& f : freq) f /= static_cast<double>(count);
    return freq;
  };

  HeatmapBands bands;
  bands.band_width = band_width;
  bands.band_size = band;
  bands.low = frequencies(0, band);
  bands.mid = frequencies((m - band) / 2, band);
  bands.high = frequencies(m - band, band);
  return bands;
}

/// Shannon entropy of a frequency vector, normalised to a distribution.
/// Used to quantify how concentrated a band's allocations are.
inline double frequency_entropy(const std::vector<double>& frequencies) {
  const double total =
      std::accumulate(frequencies.begin(), frequencies.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double f : frequencies) {
    if (f <= 0.0) continue;
    const double p = f / total;
    h -= p * std::log(p);
  }
  return h;
}

struct CorrelationStats {
  double spearman_rho = 0.0;
  std::size_t n = 0;
  bool degenerate = false;  // constant input, rho undefined and reported 0
};

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] < values[b];
                   });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

// Regularized incomplete beta via the Lentz continued fraction; standard
// machinery for the Student-t tail below.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kEpsilon = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEpsilon) break;
  }
  return h;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace detail

/// Spearman rank correlation with average-rank tie handling. Constant
/// inputs are degenerate: rho is reported as 0 with the flag set.
inline CorrelationStats spearman(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.size() != b.size())
    throw Error("spearman inputs must have equal length");
  if (a.size() < 3) throw Error("spearman needs at least 3 points");
  CorrelationStats stats;
  stats.n = a.size();

  const std::vector<double> ra = detail::average_ranks(a);
  const std::vector<double> rb = detail::average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    stats.degenerate = true;
    return stats;
  }
  stats.spearman_rho = cov / std::sqrt(var_a * var_b);
  return stats;
}

/// One-sided p-value for H1: rho > 0, via the t approximation
/// t = rho * sqrt((n-2) / (1 - rho^2)) with n-2 degrees of freedom.
inline double spearman_pvalue_greater(const CorrelationStats& stats) {
  if (stats.degenerate || stats.n < 3) return 1.0;
  const double rho = stats.spearman_rho;
  if (rho >= 1.0) return 0.0;
  if (rho <= -1.0) return 1.0;
  const double df = static_cast<double>(stats.n - 2);
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  const double tail =
      0.5 * detail::regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t >= 0.0 ? tail : 1.0 - tail;
}

namespace detail {

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

}  // namespace detail

/// CSV export, one row per sample in read order. Invalid rows leave the
/// metric and mapping fields empty.
inline void write_samples_csv(std::ostream& out,
                              const std::vector<AllocationReport>& reports) {
  std::vector<const AllocationReport*> by_read;
  by_read.reserve(reports.size());
  for (const auto& report : reports) by_read.push_back(&report);
  std::stable_sort(by_read.begin(), by_read.end(),
                   [](const AllocationReport* a, const AllocationReport* b) {
                     return a->read_index < b->read_index;
                   });

  out << "read_index,energy,valid,naive_swaps,success_probability,"
         "log10_success_probability,mapping\n";
  for (const AllocationReport* report : by_read) {
    out << report->read_index << ',' << detail::format_double(report->energy)
        << ',' << (report->valid ? 1 : 0) << ',';
    if (report->valid) {
      out << report->naive_swaps << ','
          << detail::format_double(report->success_probability) << ','
          << detail::format_double(report->log10_success_probability) << ',';
      for (std::size_t i = 0; i < report->allocation.mapping.size(); ++i) {
        if (i > 0) out << ' ';
        out << report->allocation.mapping[i];
      }
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

inline void write_heatmap_csv(std::ostream& out, const HeatmapBands& bands) {
  out << "qubit,low_freq,mid_freq,high_freq\n";
  for (std::size_t q = 0; q < bands.low.size(); ++q)
    out << q << ',' << detail::format_double(bands.low[q]) << ','
        << detail::format_double(bands.mid[q]) << ','
        << detail::format_double(bands.high[q]) << '\n';
}

}  // namespace qalloc
