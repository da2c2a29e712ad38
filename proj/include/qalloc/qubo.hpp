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

// Assembles the allocation QUBO. Binary variable x_ij (flat index
// i * n_p + j) decides whether logical qubit i sits on hardware qubit j.
// Base coefficients:
//
//   quadratic[(i,j),(k,l)] = f_err(p_jl) * g_ik * d_jl^exponent
//   linear[(i,j)]          = f_err(p_j)  * g_i
//
// with f_err(p) = -ln(p) when the error term is enabled and 1 otherwise.
// Bijectivity is enforced by penalty terms phi * (sum_i x_ij - 1)^2 per
// hardware qubit and theta * (sum_j x_ij - 1)^2 per logical qubit, plus an
// optional gamma * (sum x - n_c)^2 count penalty that is off by default.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qalloc/circuit.hpp"
#include "qalloc/device.hpp"
#include "qalloc/error.hpp"

namespace qalloc {

/// Shape of the base coefficients. distance_exponent 3 is the form that
/// performed best overall; 1 and 2 are the earlier candidates.
struct CoefficientForm {
  int distance_exponent = 3;
  bool include_error = true;
  bool linear_enabled = true;

  friend bool operator==(const CoefficientForm&, const CoefficientForm&) = default;
};

struct PenaltyConfig {
  double phi = 0.0;
  double theta = 0.0;
  double gamma = 0.0;  // count penalty, off by default
};

/// Flat-indexed QUBO with canonical upper-triangular quadratic storage and
/// an explicit constant offset from the penalty expansion. finalize()
/// builds the adjacency structure used for energy evaluation and
/// incremental flips; the problem is immutable afterwards.
class QuboProblem {
 public:
  int n_c = 0;
  int n_p = 0;
  std::vector<double> linear;
  std::unordered_map<std::uint64_t, double> quadratic;  // key pack(u,v), u < v
  double offset = 0.0;
  CoefficientForm form{};
  PenaltyConfig penalties{};

  int num_variables() const { return n_c * n_p; }

  int index(int logical, int physical) const { return logical * n_p + physical; }
  int logical_of(int u) const { return u / n_p; }
  int physical_of(int u) const { return u % n_p; }

  static std::uint64_t pack(int u, int v) {
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
  }

  void add_quadratic(int u, int v, double coefficient) {
    if (coefficient == 0.0) return;
    if (u > v) std::swap(u, v);
    quadratic[pack(u, v)] += coefficient;
  }

  /// Builds the sorted adjacency lists (both directions per stored pair).
  /// Must be called once after the coefficient maps stop changing.
  void finalize() {
    const int n = num_variables();
    std::vector<std::uint32_t> degree(n, 0);
    for (const auto& [key, coeff] : quadratic) {
      ++degree[static_cast<int>(key >> 32)];
      ++degree[static_cast<int>(key & 0xffffffffu)];
    }
    adj_offsets_.assign(n + 1, 0);
    for (int u = 0; u < n; ++u) adj_offsets_[u + 1] = adj_offsets_[u] + degree[u];
    adj_vars_.resize(adj_offsets_[n]);
    adj_coeffs_.resize(adj_offsets_[n]);
    std::vector<std::size_t> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
    for (const auto& [key, coeff] : quadratic) {
      const int u = static_cast<int>(key >> 32);
      const int v = static_cast<int>(key & 0xffffffffu);
      adj_vars_[cursor[u]] = static_cast<std::uint32_t>(v);
      adj_coeffs_[cursor[u]++] = coeff;
      adj_vars_[cursor[v]] = static_cast<std::uint32_t>(u);
      adj_coeffs_[cursor[v]++] = coeff;
    }
    // Sort each neighbour list so iteration order is independent of the
    // hash map's internals.
    for (int u = 0; u < n; ++u) {
      const std::size_t lo = adj_offsets_[u];
      const std::size_t hi = adj_offsets_[u + 1];
      std::vector<std::pair<std::uint32_t, double>> nbrs;
      nbrs.reserve(hi - lo);
      for (std::size_t e = lo; e < hi; ++e)
        nbrs.emplace_back(adj_vars_[e], adj_coeffs_[e]);
      std::sort(nbrs.begin(), nbrs.end());
      for (std::size_t e = lo; e < hi; ++e) {
        adj_vars_[e] = nbrs[e - lo].first;
        adj_coeffs_[e] = nbrs[e - lo].second;
      }
    }
    finalized_ = true;
  }

  bool finalized() const { return finalized_; }

  std::size_t degree_begin(int u) const { return adj_offsets_[u]; }
  std::size_t degree_end(int u) const { return adj_offsets_[u + 1]; }
  std::uint32_t neighbor_at(std::size_t e) const { return adj_vars_[e]; }
  double coefficient_at(std::size_t e) const { return adj_coeffs_[e]; }

  std::size_t num_quadratic_terms() const { return quadratic.size(); }

 private:
  bool finalized_ = false;
  std::vector<std::size_t> adj_offsets_;
  std::vector<std::uint32_t> adj_vars_;
  std::vector<double> adj_coeffs_;
};

/// QUBO objective of a bitvector: offset + sum_u linear[u] x_u +
/// sum_{u<v} quadratic[u,v] x_u x_v. Pairs are visited in sorted order so
/// the result is reproducible bit for bit.
inline double energy(const QuboProblem& problem,
                     std::span<const std::uint8_t> state) {
  if (static_cast<int>(state.size()) != problem.num_variables())
    throw Error("state length " + std::to_string(state.size()) +
                " does not match " + std::to_string(problem.num_variables()) +
                " variables");
  double e = problem.offset;
  const int n = problem.num_variables();
  for (int u = 0; u < n; ++u)
    if (state[u]) e += problem.linear[u];
  for (int u = 0; u < n; ++u) {
    if (!state[u]) continue;
    for (std::size_t k = problem.degree_begin(u); k < problem.degree_end(u);
         ++k) {
      const std::uint32_t v = problem.neighbor_at(k);
      if (v > static_cast<std::uint32_t>(u) && state[v])
        e += problem.coefficient_at(k);
    }
  }
  return e;
}

/// Builds the base (pre-penalty) coefficients for the given form. The two
/// symmetric orderings (ij,kl) and (kl,ij) of each variable pair are summed
/// into one canonical entry; zero-valued entries are omitted.
inline QuboProblem build_base_coefficients(const InteractionSummary& summary,
                                           const DeviceModel& device,
                                           const DistanceMatrix& distances,
                                           const PathFidelityTable& fidelities,
                                           const CoefficientForm& form) {
  const int n_c = summary.n_c();
  const int n_p = device.n_p;
  if (n_c > n_p)
    throw Error("infeasible instance: " + std::to_string(n_c) +
                " logical qubits exceed " + std::to_string(n_p) +
                " hardware qubits");
  if (form.distance_exponent < 1)
    throw Error("distance exponent must be >= 1");

  QuboProblem problem;
  problem.n_c = n_c;
  problem.n_p = n_p;
  problem.form = form;
  problem.linear.assign(n_c * n_p, 0.0);

  // -ln(p_jl) * d_jl^exp per physical pair, shared across logical pairs.
  std::vector<std::vector<double>> pair_weight(n_p, std::vector<double>(n_p, 0.0));
  for (int j = 0; j < n_p; ++j) {
    for (int l = 0; l < n_p; ++l) {
      if (j == l) continue;
      const double f_err =
          form.include_error ? -std::log(fidelities(j, l)) : 1.0;
      pair_weight[j][l] =
          f_err * detail::ipow(static_cast<double>(distances(j, l)),
                               form.distance_exponent);
    }
  }

  std::size_t interacting_pairs = 0;
  for (int i = 0; i < n_c; ++i)
    for (int k = i + 1; k < n_c; ++k)
      if (summary.g_pair[i][k] != 0) ++interacting_pairs;
  problem.quadratic.reserve(interacting_pairs * n_p * (n_p - 1));

  for (int i = 0; i < n_c; ++i) {
    for (int k = i + 1; k < n_c; ++k) {
      const double g = static_cast<double>(summary.g_pair[i][k]);
      if (g == 0.0) continue;
      for (int j = 0; j < n_p; ++j) {
        for (int l = 0; l < n_p; ++l) {
          if (j == l) continue;
          // Factor 2 folds the (ij,kl) and (kl,ij) orderings together.
          problem.add_quadratic(problem.index(i, j), problem.index(k, l),
                                2.0 * g * pair_weight[j][l]);
        }
      }
    }
  }

  if (form.linear_enabled) {
    for (int i = 0; i < n_c; ++i) {
      const double g = static_cast<double>(summary.g_single[i]);
      for (int j = 0; j < n_p; ++j) {
        const double f_err =
            form.include_error ? -std::log(device.p_single[j]) : 1.0;
        problem.linear[problem.index(i, j)] = f_err * g;
      }
    }
  }

  problem.finalize();
  return problem;
}

/// Maximum absolute base coefficient, the anchor for the penalty scale.
/// Returns 1.0 for an all-zero problem so penalties still bind.
inline double base_penalty_magnitude(const QuboProblem& base) {
  double magnitude = 0.0;
  for (double b : base.linear) magnitude = std::max(magnitude, std::abs(b));
  for (const auto& [key, coeff] : base.quadratic)
    magnitude = std::max(magnitude, std::abs(coeff));
  return magnitude == 0.0 ? 1.0 : magnitude;
}

/// Expands the squared penalty terms onto the base problem using x^2 = x:
/// +2*phi on same-column pairs, +2*theta on same-row pairs, -(phi+theta) on
/// every linear term, offset phi*n_p + theta*n_c. A positive gamma adds the
/// count penalty gamma * (sum x - n_c)^2 on top.
inline QuboProblem apply_penalties(const QuboProblem& base,
                                   const PenaltyConfig& penalties) {
  if (penalties.phi <= 0.0 || penalties.theta <= 0.0)
    throw Error("penalty coefficients phi and theta must be positive");
  if (penalties.gamma < 0.0) throw Error("gamma must be nonnegative");

  QuboProblem problem = base;
  problem.penalties = penalties;
  const int n_c = problem.n_c;
  const int n_p = problem.n_p;

  // phi * (sum_i x_ij - 1)^2 for each hardware qubit j.
  for (int j = 0; j < n_p; ++j)
    for (int i = 0; i < n_c; ++i)
      for (int k = i + 1; k < n_c; ++k)
        problem.add_quadratic(problem.index(i, j), problem.index(k, j),
                              2.0 * penalties.phi);
  // theta * (sum_j x_ij - 1)^2 for each logical qubit i.
  for (int i = 0; i < n_c; ++i)
    for (int j = 0; j < n_p; ++j)
      for (int l = j + 1; l < n_p; ++l)
        problem.add_quadratic(problem.index(i, j), problem.index(i, l),
                              2.0 * penalties.theta);
  for (double& b : problem.linear) b -= penalties.phi + penalties.theta;
  problem.offset += penalties.phi * n_p + penalties.theta * n_c;

  if (penalties.gamma > 0.0) {
    const int n = problem.num_variables();
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        problem.add_quadratic(u, v, 2.0 * penalties.gamma);
    for (double& b : problem.linear) b += penalties.gamma * (1.0 - 2.0 * n_c);
    problem.offset += penalties.gamma * static_cast<double>(n_c) * n_c;
  }

  problem.finalize();
  return problem;
}

/// Plain-text coefficient export for external QUBO solvers: an offset
/// header, then one `u v coefficient` triple per line with linear terms as
/// `u u coefficient`. Doubles are printed with round-trip precision.
inline std::string export_qubo(const QuboProblem& problem) {
  const auto fmt = [](double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
  };

  std::string out;
  out += "# qubo n_c=" + std::to_string(problem.n_c) +
         " n_p=" + std::to_string(problem.n_p) + "\n";
  out += "# offset " + fmt(problem.offset) + "\n";
  const int n = problem.num_variables();
  for (int u = 0; u < n; ++u)
    if (problem.linear[u] != 0.0)
      out += std::to_string(u) + " " + std::to_string(u) + " " +
             fmt(problem.linear[u]) + "\n";
  std::vector<std::uint64_t> keys;
  keys.reserve(problem.quadratic.size());
  for (const auto& [key, coeff] : problem.quadratic) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  for (const std::uint64_t key : keys) {
    const int u = static_cast<int>(key >> 32);
    const int v = static_cast<int>(key & 0xffffffffu);
    out += std::to_string(u) + " " + std::to_string(v) + " " +
           fmt(problem.quadratic.at(key)) + "\n";
  }
  return out;
}

}  // namespace qalloc
