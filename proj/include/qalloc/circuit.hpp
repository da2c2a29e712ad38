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

#include <cstdint>
#include <string>
#include <vector>

#include "qalloc/error.hpp"

namespace qalloc {

/// A single gate acting on one or two logical qubits. Parameters are kept
/// only for round-tripping; allocation ignores them.
struct Gate {
  std::string name;
  std::vector<int> operands;
  std::vector<double> parameters;

  bool is_single_qubit() const { return operands.size() == 1; }
  bool is_two_qubit() const { return operands.size() == 2; }

  friend bool operator==(const Gate&, const Gate&) = default;
};

/// An ordered gate list over n_c logical qubits. Gate order is preserved
/// exactly as parsed.
struct QuantumCircuit {
  int n_c = 0;
  std::vector<Gate> gates;
  std::string name;

  std::int64_t num_single_qubit_gates() const {
    std::int64_t n = 0;
    for (const auto& g : gates) n += g.is_single_qubit() ? 1 : 0;
    return n;
  }

  std::int64_t num_two_qubit_gates() const {
    std::int64_t n = 0;
    for (const auto& g : gates) n += g.is_two_qubit() ? 1 : 0;
    return n;
  }
};

/// Checks the structural invariants of a circuit: n_c >= 1, every gate has
/// one or two distinct operands, all operands within [0, n_c).
inline void validate(const QuantumCircuit& circuit) {
  if (circuit.n_c < 1) throw Error("circuit must have at least one qubit");
  for (const auto& gate : circuit.gates) {
    if (gate.operands.size() != 1 && gate.operands.size() != 2)
      throw Error("gate '" + gate.name + "' must act on one or two qubits");
    for (int q : gate.operands)
      if (q < 0 || q >= circuit.n_c)
        throw Error("gate '" + gate.name + "' operand " + std::to_string(q) +
                    " outside [0, " + std::to_string(circuit.n_c) + ")");
    if (gate.operands.size() == 2 && gate.operands[0] == gate.operands[1])
      throw Error("gate '" + gate.name + "' operands must be distinct");
  }
}

/// Gate-count statistics consumed by the QUBO coefficients: g_single[i] is
/// the number of single-qubit gates on logical qubit i, g_pair[i][k] the
/// number of two-qubit gates acting on logical qubits i and k.
struct InteractionSummary {
  std::vector<std::int64_t> g_single;
  std::vector<std::vector<std::int64_t>> g_pair;  // symmetric, zero diagonal

  int n_c() const { return static_cast<int>(g_single.size()); }

  std::int64_t total_single() const {
    std::int64_t n = 0;
    for (auto v : g_single) n += v;
    return n;
  }

  /// Sum of g_pair over i < k (each two-qubit gate counted once).
  std::int64_t total_pair() const {
    std::int64_t n = 0;
    for (std::size_t i = 0; i < g_pair.size(); ++i)
      for (std::size_t k = i + 1; k < g_pair.size(); ++k) n += g_pair[i][k];
    return n;
  }
};

inline InteractionSummary interaction_summary(const QuantumCircuit& circuit) {
  InteractionSummary summary;
  summary.g_single.assign(circuit.n_c, 0);
  summary.g_pair.assign(circuit.n_c, std::vector<std::int64_t>(circuit.n_c, 0));
  for (const auto& gate : circuit.gates) {
    if (gate.is_single_qubit()) {
      ++summary.g_single[gate.operands[0]];
    } else {
      const int i = gate.operands[0];
      const int k = gate.operands[1];
      ++summary.g_pair[i][k];
      ++summary.g_pair[k][i];
    }
  }
  return summary;
}

}  // namespace qalloc
