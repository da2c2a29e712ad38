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

// Hardware graph with calibration data, plus the derived tables the QUBO
// and the quality metrics consume: all-pairs hop distances d_jl and
// pairwise success probabilities p_jl (SWAP chains folded in).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qalloc/error.hpp"

namespace qalloc {

/// Whether SWAP chains are counted one way only or there and back again.
/// round_trip matches the "swapped back immediately afterwards" accounting
/// and is the default everywhere; one_way reproduces the variant where
/// qubits are left in place after the gate.
enum class SwapMode { round_trip, one_way };

inline const char* to_string(SwapMode mode) {
  return mode == SwapMode::round_trip ? "roundtrip" : "oneway";
}

/// Probabilities below this floor are raised to it before any logarithm is
/// taken, so dead qubits stay finite but maximally unattractive.
inline constexpr double kProbabilityFloor = 1e-12;

/// Undirected coupling graph with per-qubit and per-edge gate success
/// probabilities. Immutable after construction; concurrent reads are safe.
struct DeviceModel {
  int n_p = 0;
  std::vector<std::pair<int, int>> edges;         // canonical (a < b), sorted
  std::vector<double> p_single;                   // length n_p, each in (0,1]
  std::map<std::pair<int, int>, double> p_cx;     // keyed by canonical edge
  std::string name;
  std::vector<std::vector<int>> adjacency;        // sorted neighbour lists

  bool has_edge(int a, int b) const {
    return p_cx.count(std::minmax(a, b)) > 0;
  }

  double edge_success(int a, int b) const {
    const auto it = p_cx.find(std::minmax(a, b));
    if (it == p_cx.end())
      throw DeviceError("no edge between qubits " + std::to_string(a) +
                        " and " + std::to_string(b));
    return it->second;
  }
};

/// Symmetric matrix of shortest-path hop counts.
struct DistanceMatrix {
  std::vector<std::vector<int>> d;

  int operator()(int j, int l) const { return d[j][l]; }
  int size() const { return static_cast<int>(d.size()); }
};

/// Pairwise success probability table. For each pair, path holds the chosen
/// best shortest path (stored for the low-index-to-high-index direction).
struct PathFidelityTable {
  std::vector<std::vector<double>> p_pair;
  std::map<std::pair<int, int>, std::vector<int>> path;
  SwapMode swap_mode = SwapMode::round_trip;

  double operator()(int j, int l) const { return p_pair[j][l]; }
};

namespace detail {

// Iterated multiplication keeps the SWAP-chain products bit-identical to
// their hand-multiplied definitions.
inline double ipow(double base, int exponent) {
  double value = 1.0;
  for (int i = 0; i < exponent; ++i) value *= base;
  return value;
}

inline int parse_int(const std::string& text, const std::string& what) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw DeviceError(what + ": '" + text + "' is not an integer");
  return value;
}

inline double clamp_probability(double p, const std::string& what) {
  if (std::isnan(p) || p < 0.0 || p > 1.0)
    throw DeviceError(what + " must lie in (0, 1], got " + std::to_string(p));
  return std::max(p, kProbabilityFloor);
}

inline std::vector<int> bfs_distances(const DeviceModel& device, int source) {
  std::vector<int> dist(device.n_p, -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : device.adjacency[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

// Among all shortest paths from `source`, the best path to each node
// maximizes the product of edge success probabilities; ties break to the
// lexicographically smallest vertex sequence. Nodes are processed in BFS
// layer order so every predecessor is settled first.
struct BestPaths {
  std::vector<double> log_product;       // sum of log p_cx along best path
  std::vector<std::vector<int>> vertices;  // best path, source first
};

inline BestPaths best_paths_from(const DeviceModel& device,
                                 const DistanceMatrix& distances, int source) {
  const int n = device.n_p;
  BestPaths best;
  best.log_product.assign(n, -std::numeric_limits<double>::infinity());
  best.vertices.assign(n, {});
  best.log_product[source] = 0.0;
  best.vertices[source] = {source};

  std::vector<int> order(n);
  for (int v = 0; v < n; ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return distances(source, a) < distances(source, b);
  });

  for (int v : order) {
    if (v == source) continue;
    const int dv = distances(source, v);
    for (int u : device.adjacency[v]) {
      if (distances(source, u) != dv - 1) continue;
      const double candidate =
          best.log_product[u] + std::log(device.edge_success(u, v));
      if (candidate > best.log_product[v]) {
        best.log_product[v] = candidate;
        best.vertices[v] = best.vertices[u];
        best.vertices[v].push_back(v);
      } else if (candidate == best.log_product[v]) {
        std::vector<int> seq = best.vertices[u];
        seq.push_back(v);
        if (seq < best.vertices[v]) best.vertices[v] = std::move(seq);
      }
    }
  }
  return best;
}

}  // namespace detail

/// Parses and validates the device JSON schema:
///   {"name": str, "n_qubits": int, "edges": [[i,j],...],
///    "single_qubit_success": {"<idx>": p, ...}?,
///    "cx_success": {"<i>-<j>": p, ...}?}
/// Missing calibration entries default to 1.0, which makes the
/// corresponding error terms vanish. When a calibration source provides
/// both directions of an edge, the geometric mean is stored.
inline DeviceModel load_device(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw DeviceError(std::string("malformed device JSON: ") + err.what());
  }

  DeviceModel device;
  try {
    device.name = doc.value("name", "device");
    device.n_p = doc.at("n_qubits").get<int>();
    if (device.n_p < 1) throw DeviceError("n_qubits must be >= 1");

    std::map<std::pair<int, int>, double> directed;  // raw values per direction
    for (const auto& edge : doc.at("edges")) {
      if (!edge.is_array() || edge.size() != 2)
        throw DeviceError("edges must be [i, j] pairs");
      const int a = edge[0].get<int>();
      const int b = edge[1].get<int>();
      if (a == b) throw DeviceError("self-loop edge on qubit " + std::to_string(a));
      if (a < 0 || b < 0 || a >= device.n_p || b >= device.n_p)
        throw DeviceError("edge endpoint out of range: [" + std::to_string(a) +
                          ", " + std::to_string(b) + "]");
      device.p_cx.emplace(std::minmax(a, b), 1.0);
    }
    if (device.p_cx.empty() && device.n_p > 1)
      throw DeviceError("device has no edges");

    device.p_single.assign(device.n_p, 1.0);
    if (doc.contains("single_qubit_success")) {
      for (const auto& [key, value] : doc["single_qubit_success"].items()) {
        const int q = detail::parse_int(key, "single_qubit_success key");
        if (q < 0 || q >= device.n_p)
          throw DeviceError("single_qubit_success qubit " + key +
                            " out of range");
        device.p_single[q] = detail::clamp_probability(
            value.get<double>(), "single_qubit_success[" + key + "]");
      }
    }

    if (doc.contains("cx_success")) {
      for (const auto& [key, value] : doc["cx_success"].items()) {
        const auto dash = key.find('-');
        if (dash == std::string::npos)
          throw DeviceError("cx_success key '" + key +
                            "' must have the form \"i-j\"");
        const int a = detail::parse_int(key.substr(0, dash), "cx_success key");
        const int b = detail::parse_int(key.substr(dash + 1), "cx_success key");
        const auto canonical = std::minmax(a, b);
        if (!device.p_cx.count(canonical))
          throw DeviceError("cx_success key '" + key +
                            "' does not match any declared edge");
        const double p = detail::clamp_probability(value.get<double>(),
                                                   "cx_success[" + key + "]");
        const auto [it, inserted] = directed.emplace(std::make_pair(a, b), p);
        if (!inserted)
          throw DeviceError("duplicate cx_success key '" + key + "'");
        const auto reverse = directed.find(std::make_pair(b, a));
        // Edges are undirected; two directed calibration values fold into
        // their geometric mean.
        device.p_cx[canonical] =
            reverse == directed.end() ? p : std::sqrt(p * reverse->second);
      }
    }
  } catch (const nlohmann::json::exception& err) {
    throw DeviceError(std::string("invalid device JSON: ") + err.what());
  }

  device.edges.reserve(device.p_cx.size());
  for (const auto& [edge, p] : device.p_cx) device.edges.push_back(edge);

  device.adjacency.assign(device.n_p, {});
  for (const auto& [a, b] : device.edges) {
    device.adjacency[a].push_back(b);
    device.adjacency[b].push_back(a);
  }
  for (auto& nbrs : device.adjacency) std::sort(nbrs.begin(), nbrs.end());

  // Connectivity is required so every d_jl is finite.
  const auto dist = detail::bfs_distances(device, 0);
  for (int v = 0; v < device.n_p; ++v)
    if (dist[v] < 0)
      throw DeviceError("device graph is disconnected (qubit " +
                        std::to_string(v) + " unreachable from qubit 0)");
  return device;
}

/// Exact unweighted shortest-path hop counts, breadth-first from each node.
inline DistanceMatrix all_pairs_distance(const DeviceModel& device) {
  DistanceMatrix distances;
  distances.d.reserve(device.n_p);
  for (int v = 0; v < device.n_p; ++v)
    distances.d.push_back(detail::bfs_distances(device, v));
  return distances;
}

/// Among all shortest paths j -> l, returns the one maximizing the product
/// of p_cx over its edges; ties break to the lexicographically smallest
/// vertex sequence. Requires j != l.
inline std::vector<int> best_shortest_path(const DeviceModel& device, int j,
                                           int l) {
  if (j == l) throw DeviceError("best_shortest_path requires distinct qubits");
  const DistanceMatrix distances = all_pairs_distance(device);
  return detail::best_paths_from(device, distances, j).vertices[l];
}

/// Builds the pairwise success table. For a pair at distance d with best
/// path edges e_1..e_d, the CX executes on e_d after d-1 SWAPs (3 CX each)
/// move one operand along the path; round_trip repeats the SWAPs to restore
/// the placement. Pairs are processed in the low-to-high index direction.
inline PathFidelityTable pairwise_success(const DeviceModel& device,
                                          const DistanceMatrix& distances,
                                          SwapMode swap_mode) {
  PathFidelityTable table;
  table.swap_mode = swap_mode;
  table.p_pair.assign(device.n_p, std::vector<double>(device.n_p, 1.0));
  const int swap_cx = swap_mode == SwapMode::round_trip ? 6 : 3;

  for (int j = 0; j < device.n_p; ++j) {
    const auto best = detail::best_paths_from(device, distances, j);
    for (int l = j + 1; l < device.n_p; ++l) {
      const auto& path = best.vertices[l];
      double p = 1.0;
      for (std::size_t m = 0; m + 1 < path.size(); ++m) {
        const double pe = device.edge_success(path[m], path[m + 1]);
        const bool last = m + 2 == path.size();
        p *= last ? pe : detail::ipow(pe, swap_cx);
      }
      table.p_pair[j][l] = p;
      table.p_pair[l][j] = p;
      table.path.emplace(std::make_pair(j, l), path);
    }
  }
  return table;
}

inline PathFidelityTable pairwise_success(const DeviceModel& device,
                                          SwapMode swap_mode) {
  return pairwise_success(device, all_pairs_distance(device), swap_mode);
}

}  // namespace qalloc
