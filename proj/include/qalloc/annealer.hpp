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

// Single-flip Metropolis simulated annealing over a QuboProblem with a
// geometric inverse-temperature schedule. Reads are independent
// trajectories seeded deterministically from (seed, read_index), so a
// sample set is bit-for-bit reproducible regardless of thread count or
// execution order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "qalloc/error.hpp"
#include "qalloc/qubo.hpp"

namespace qalloc {

struct AnnealSchedule {
  double beta_hot = 0.0;
  double beta_cold = 0.0;
  int num_sweeps = 1000;
  int num_reads = 1;

  void validate() const {
    if (!(beta_hot > 0.0) || !(beta_cold > 0.0) || !(beta_hot < beta_cold))
      throw ConfigError("schedule requires 0 < beta_hot < beta_cold");
    if (num_sweeps < 1) throw ConfigError("num_sweeps must be >= 1");
    if (num_reads < 1) throw ConfigError("num_reads must be >= 1");
  }
};

struct Sample {
  std::vector<std::uint8_t> state;
  double energy = 0.0;
};

struct SampleSet {
  std::vector<Sample> samples;
  std::uint64_t seed = 0;
  AnnealSchedule schedule;
};

namespace detail {

// splitmix64 finalizer; the per-read generator seed is element read_index
// of the splitmix64 stream started at the run seed.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t read_seed(std::uint64_t run_seed, int read_index) {
  return splitmix64(run_seed + static_cast<std::uint64_t>(read_index) *
                                   0x9e3779b97f4a7c15ull);
}

// Uniform double in [0, 1) from the top 53 bits. Hand-rolled (like the
// Fisher-Yates below) because the standard-library distributions are
// implementation-defined and would break cross-platform reproducibility.
inline double canonical(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline void fisher_yates(std::vector<std::uint32_t>& order,
                         std::mt19937_64& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
}

// Geometric interpolation between the endpoints, both inclusive. A single
// sweep stays at beta_hot.
inline std::vector<double> beta_schedule(const AnnealSchedule& schedule) {
  const int n = schedule.num_sweeps;
  std::vector<double> betas(n);
  if (n == 1) {
    betas[0] = schedule.beta_hot;
    return betas;
  }
  const double ratio = schedule.beta_cold / schedule.beta_hot;
  for (int s = 0; s < n; ++s)
    betas[s] = schedule.beta_hot *
               std::pow(ratio, static_cast<double>(s) / (n - 1));
  return betas;
}

}  // namespace detail

/// Energy change of flipping one bit, in O(degree) time:
/// (1 - 2 x_u) * (linear[u] + sum_v quad(u,v) x_v).
inline double delta_energy(const QuboProblem& problem,
                           std::span<const std::uint8_t> state,
                           int flip_index) {
  if (flip_index < 0 || flip_index >= problem.num_variables())
    throw Error("flip index " + std::to_string(flip_index) + " out of range");
  double field = problem.linear[flip_index];
  for (std::size_t k = problem.degree_begin(flip_index);
       k < problem.degree_end(flip_index); ++k)
    if (state[problem.neighbor_at(k)]) field += problem.coefficient_at(k);
  return (1.0 - 2.0 * state[flip_index]) * field;
}

/// Acceptance-probability-anchored default schedule endpoints:
/// the worst single-flip uphill move is accepted with probability 1/2 at
/// beta_hot, the smallest nonzero move with probability 1/100 at beta_cold.
/// Falls back to (0.1, 10.0) for an all-zero problem.
inline std::pair<double, double> default_beta_range(const QuboProblem& problem) {
  double max_flip = 0.0;   // max over u of |linear[u]| + sum |quad(u,.)|
  double min_coeff = 0.0;  // smallest nonzero |coefficient|
  const int n = problem.num_variables();
  for (int u = 0; u < n; ++u) {
    double incident = std::abs(problem.linear[u]);
    if (problem.linear[u] != 0.0 &&
        (min_coeff == 0.0 || incident < min_coeff))
      min_coeff = incident;
    for (std::size_t k = problem.degree_begin(u); k < problem.degree_end(u);
         ++k) {
      const double c = std::abs(problem.coefficient_at(k));
      incident += c;
      if (c != 0.0 && (min_coeff == 0.0 || c < min_coeff)) min_coeff = c;
    }
    max_flip = std::max(max_flip, incident);
  }
  if (max_flip == 0.0 || min_coeff == 0.0) return {0.1, 10.0};
  return {std::log(2.0) / max_flip, std::log(100.0) / min_coeff};
}

/// One annealing trajectory: uniformly random start, num_sweeps sweeps, a
/// freshly shuffled variable order per sweep, single-bit flips accepted
/// with probability min(1, exp(-beta_s * dE)). The returned energy is a
/// full evaluation of the final state.
inline Sample anneal_once(const QuboProblem& problem,
                          const AnnealSchedule& schedule,
                          std::mt19937_64& rng) {
  schedule.validate();
  const int n = problem.num_variables();
  const std::vector<double> betas = detail::beta_schedule(schedule);

  Sample sample;
  sample.state.resize(n);
  for (int u = 0; u < n; ++u)
    sample.state[u] = static_cast<std::uint8_t>(rng() & 1u);

  // Local fields: field[u] = linear[u] + sum_v quad(u,v) x_v, so a flip of
  // u costs (1 - 2 x_u) * field[u]. Kept incrementally below.
  std::vector<double> field(problem.linear.begin(), problem.linear.end());
  for (int u = 0; u < n; ++u) {
    if (!sample.state[u]) continue;
    for (std::size_t k = problem.degree_begin(u); k < problem.degree_end(u);
         ++k)
      field[problem.neighbor_at(k)] += problem.coefficient_at(k);
  }

  std::vector<std::uint32_t> order(n);
  for (int u = 0; u < n; ++u) order[u] = static_cast<std::uint32_t>(u);

  for (const double beta : betas) {
    detail::fisher_yates(order, rng);
    for (const std::uint32_t u : order) {
      const double d_e = (1.0 - 2.0 * sample.state[u]) * field[u];
      const double r = detail::canonical(rng);
      // exp underflows past any representable r well before beta*dE = 40.
      const bool accept =
          d_e <= 0.0 || (beta * d_e < 40.0 && r < std::exp(-beta * d_e));
      if (!accept) continue;
      const double delta = sample.state[u] ? -1.0 : 1.0;
      sample.state[u] ^= 1u;
      for (std::size_t k = problem.degree_begin(u); k < problem.degree_end(u);
           ++k)
        field[problem.neighbor_at(k)] += delta * problem.coefficient_at(k);
    }
  }

  sample.energy = energy(problem, sample.state);
  return sample;
}

/// num_reads independent trajectories, each seeded from (seed, read_index).
/// Identical (problem, schedule, seed) reproduce the identical SampleSet
/// regardless of num_threads; results are ordered by read index.
inline SampleSet sample(const QuboProblem& problem,
                        const AnnealSchedule& schedule, std::uint64_t seed,
                        int num_threads = 0) {
  schedule.validate();
  if (num_threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    num_threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  num_threads = std::min(num_threads, schedule.num_reads);

  SampleSet set;
  set.seed = seed;
  set.schedule = schedule;
  set.samples.resize(schedule.num_reads);

  std::atomic<int> next_read{0};
  const auto worker = [&]() {
    for (;;) {
      const int read = next_read.fetch_add(1);
      if (read >= schedule.num_reads) return;
      std::mt19937_64 rng(detail::read_seed(seed, read));
      set.samples[read] = anneal_once(problem, schedule, rng);
    }
  };

  if (num_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(num_threads);
    for (int t = 0; t < num_threads; ++t) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
  }
  return set;
}

}  // namespace qalloc
