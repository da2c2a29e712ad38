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

// Test-only reference implementations, kept independent of the library
// code paths they check: a direct map-based energy evaluator, a
// Floyd-Warshall distance oracle, the hand-expanded penalty terms, and
// deterministic random-instance generators.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "qalloc/circuit.hpp"
#include "qalloc/device.hpp"
#include "qalloc/qubo.hpp"

namespace oracles {

// Evaluates the QUBO objective straight off the coefficient maps, without
// touching the adjacency structure the library iterates.
inline double reference_energy(const qalloc::QuboProblem& problem,
                               const std::vector<std::uint8_t>& state) {
  double e = problem.offset;
  for (std::size_t u = 0; u < state.size(); ++u)
    if (state[u]) e += problem.linear[u];
  for (const auto& [key, coeff] : problem.quadratic) {
    const int u = static_cast<int>(key >> 32);
    const int v = static_cast<int>(key & 0xffffffffu);
    if (state[u] && state[v]) e += coeff;
  }
  return e;
}

// The squared penalty terms evaluated literally from row/column sums.
inline double reference_penalty(const std::vector<std::uint8_t>& state,
                                int n_c, int n_p, double phi, double theta,
                                double gamma = 0.0) {
  double penalty = 0.0;
  for (int j = 0; j < n_p; ++j) {
    double column = 0.0;
    for (int i = 0; i < n_c; ++i) column += state[i * n_p + j];
    penalty += phi * (column - 1.0) * (column - 1.0);
  }
  for (int i = 0; i < n_c; ++i) {
    double row = 0.0;
    for (int j = 0; j < n_p; ++j) row += state[i * n_p + j];
    penalty += theta * (row - 1.0) * (row - 1.0);
  }
  if (gamma != 0.0) {
    double total = 0.0;
    for (const auto bit : state) total += bit;
    penalty += gamma * (total - n_c) * (total - n_c);
  }
  return penalty;
}

// Exhaustive minimum over all 2^n states (n <= ~20).
inline double brute_force_minimum(const qalloc::QuboProblem& problem) {
  const int n = problem.num_variables();
  std::vector<std::uint8_t> state(n, 0);
  double best = reference_energy(problem, state);
  for (std::uint64_t bits = 1; bits < (1ull << n); ++bits) {
    for (int u = 0; u < n; ++u) state[u] = (bits >> u) & 1u;
    best = std::min(best, reference_energy(problem, state));
  }
  return best;
}

inline std::vector<std::vector<int>> floyd_warshall(
    const qalloc::DeviceModel& device) {
  const int n = device.n_p;
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int v = 0; v < n; ++v) d[v][v] = 0;
  for (const auto& [a, b] : device.edges) d[a][b] = d[b][a] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

// A connected random device: spanning tree plus extra edges, probabilities
// in the given range (1.0 means perfect hardware).
inline qalloc::DeviceModel random_device(std::mt19937_64& rng, int n_p,
                                         double p_lo = 0.9,
                                         double p_hi = 1.0) {
  qalloc::DeviceModel device;
  device.n_p = n_p;
  device.name = "random";
  std::uniform_real_distribution<double> prob(p_lo, p_hi);
  std::map<std::pair<int, int>, double> edges;
  for (int v = 1; v < n_p; ++v) {
    const int parent = static_cast<int>(rng() % v);
    edges[std::minmax(parent, v)] = prob(rng);
  }
  const int extra = n_p > 2 ? static_cast<int>(rng() % n_p) : 0;
  for (int e = 0; e < extra; ++e) {
    const int a = static_cast<int>(rng() % n_p);
    const int b = static_cast<int>(rng() % n_p);
    if (a != b) edges.emplace(std::minmax(a, b), prob(rng));
  }
  for (const auto& [edge, p] : edges) {
    device.edges.push_back(edge);
    device.p_cx[edge] = p;
  }
  device.p_single.resize(n_p);
  for (int v = 0; v < n_p; ++v) device.p_single[v] = prob(rng);
  device.adjacency.assign(n_p, {});
  for (const auto& [a, b] : device.edges) {
    device.adjacency[a].push_back(b);
    device.adjacency[b].push_back(a);
  }
  for (auto& nbrs : device.adjacency) std::sort(nbrs.begin(), nbrs.end());
  return device;
}

// A path device 0-1-...-(n-1) with uniform edge fidelity.
inline qalloc::DeviceModel path_device(int n_p, double p_cx = 1.0,
                                       double p_single = 1.0) {
  qalloc::DeviceModel device;
  device.n_p = n_p;
  device.name = "path";
  device.p_single.assign(n_p, p_single);
  device.adjacency.assign(n_p, {});
  for (int v = 0; v + 1 < n_p; ++v) {
    device.edges.emplace_back(v, v + 1);
    device.p_cx[{v, v + 1}] = p_cx;
    device.adjacency[v].push_back(v + 1);
    device.adjacency[v + 1].push_back(v);
  }
  return device;
}

// 4-cycle 0-1-2-3-0 with per-edge fidelities.
inline qalloc::DeviceModel cycle4_device(double p01, double p12, double p23,
                                         double p03) {
  qalloc::DeviceModel device;
  device.n_p = 4;
  device.name = "cycle4";
  device.p_single.assign(4, 1.0);
  device.edges = {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
  device.p_cx[{0, 1}] = p01;
  device.p_cx[{1, 2}] = p12;
  device.p_cx[{2, 3}] = p23;
  device.p_cx[{0, 3}] = p03;
  device.adjacency = {{1, 3}, {0, 2}, {1, 3}, {0, 2}};
  return device;
}

// Random circuit with the given gate mix.
inline qalloc::QuantumCircuit random_circuit(std::mt19937_64& rng, int n_c,
                                             int n_single, int n_two) {
  qalloc::QuantumCircuit circuit;
  circuit.n_c = n_c;
  circuit.name = "random";
  for (int g = 0; g < n_single; ++g)
    circuit.gates.push_back({"h", {static_cast<int>(rng() % n_c)}, {}});
  if (n_c < 2) return circuit;
  for (int g = 0; g < n_two; ++g) {
    const int i = static_cast<int>(rng() % n_c);
    int k = static_cast<int>(rng() % (n_c - 1));
    if (k >= i) ++k;
    circuit.gates.push_back({"cx", {i, k}, {}});
  }
  return circuit;
}

}  // namespace oracles
