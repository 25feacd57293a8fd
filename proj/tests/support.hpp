#pragma once

// Shared test helpers: hand-rolled random generators and oracles that do
// not reuse the library's numerical code.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qfusion/circuit.hpp"
#include "qfusion/dag.hpp"
#include "qfusion/random.hpp"

namespace qtest {

using qfusion::Circuit;
using qfusion::GateInstance;
using qfusion::GateSetId;
using qfusion::Rng;
using cd = std::complex<double>;

inline const std::vector<GateSetId>& all_gatesets() {
  static const std::vector<GateSetId> ids{GateSetId::Custom22, GateSetId::HeronNp, GateSetId::HeronP};
  return ids;
}

/// Random circuit of `num_gates` gates drawn uniformly from the gates that
/// fit `num_qubits`. Parameters are bound unless `bind_params` is false.
inline Circuit random_circuit(GateSetId id, int num_qubits, int num_gates, Rng& rng, bool bind_params = true) {
  const auto& gs = qfusion::gate_set(id);
  std::vector<std::size_t> usable;
  for (std::size_t g = 0; g < gs.size(); ++g)
    if (gs[g].arity <= num_qubits) usable.push_back(g);
  Circuit c;
  c.num_qubits = num_qubits;
  c.gateset_id = id;
  for (int k = 0; k < num_gates; ++k) {
    GateInstance gi;
    gi.gate_index = usable[qfusion::uniform_index(rng, usable.size())];
    std::vector<int> wires(static_cast<std::size_t>(num_qubits));
    for (int i = 0; i < num_qubits; ++i) wires[i] = i;
    std::shuffle(wires.begin(), wires.end(), rng);
    wires.resize(static_cast<std::size_t>(gs[gi.gate_index].arity));
    gi.wires = wires;
    if (bind_params)
      for (int p = 0; p < gs[gi.gate_index].num_params; ++p)
        gi.params.push_back(2.0 * std::numbers::pi * qfusion::uniform01(rng));
    c.gates.push_back(std::move(gi));
  }
  return c;
}

// ---- textbook gate matrices -------------------------------------------------
// Two-qubit matrices use the local index bit(first wire) + 2 * bit(second wire).

inline Eigen::MatrixXcd mat2(cd a, cd b, cd c, cd d) {
  Eigen::MatrixXcd m(2, 2);
  m << a, b, c, d;
  return m;
}

/// Control on the first wire (local bit 0), target on the second (bit 1).
inline Eigen::MatrixXcd controlled_on_first(const Eigen::MatrixXcd& u) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  for (int tin = 0; tin < 2; ++tin)
    for (int tout = 0; tout < 2; ++tout) {
      m(0 + 2 * tout, 0 + 2 * tin) = (tin == tout) ? 1.0 : 0.0;
      m(1 + 2 * tout, 1 + 2 * tin) = u(tout, tin);
    }
  return m;
}

inline Eigen::MatrixXcd textbook_gate(const std::string& name, double theta = 0.0) {
  const double r = 1.0 / std::sqrt(2.0);
  const cd i(0, 1);
  const cd e4 = std::polar(1.0, std::numbers::pi / 4);
  if (name == "X") return mat2(0, 1, 1, 0);
  if (name == "Y") return mat2(0, -i, i, 0);
  if (name == "Z") return mat2(1, 0, 0, -1);
  if (name == "H") return mat2(r, r, r, -r);
  if (name == "S") return mat2(1, 0, 0, i);
  if (name == "SDG") return mat2(1, 0, 0, -i);
  if (name == "T") return mat2(1, 0, 0, e4);
  if (name == "TDG") return mat2(1, 0, 0, std::conj(e4));
  if (name == "ID") return mat2(1, 0, 0, 1);
  if (name == "SX") return mat2(cd(0.5, 0.5), cd(0.5, -0.5), cd(0.5, -0.5), cd(0.5, 0.5));
  if (name == "SXDG") return mat2(cd(0.5, -0.5), cd(0.5, 0.5), cd(0.5, 0.5), cd(0.5, -0.5));
  if (name == "RZ") return mat2(std::polar(1.0, -theta / 2), 0, 0, std::polar(1.0, theta / 2));
  if (name == "CX") return controlled_on_first(textbook_gate("X"));
  if (name == "CY") return controlled_on_first(textbook_gate("Y"));
  if (name == "CZ") return controlled_on_first(textbook_gate("Z"));
  if (name == "CH") return controlled_on_first(textbook_gate("H"));
  if (name == "CS") return controlled_on_first(textbook_gate("S"));
  if (name == "CSDG") return controlled_on_first(textbook_gate("SDG"));
  if (name == "CSX") return controlled_on_first(textbook_gate("SX"));
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  if (name == "SWAP") {
    m(0, 0) = m(3, 3) = m(1, 2) = m(2, 1) = 1.0;
    return m;
  }
  if (name == "ISWAP") {
    m(0, 0) = m(3, 3) = 1.0;
    m(1, 2) = m(2, 1) = i;
    return m;
  }
  if (name == "DCX") {
    // CX(first -> second) then CX(second -> first): |a,b> -> |a^b... > by truth table.
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        int b1 = b ^ a;      // first CX
        int a1 = a ^ b1;     // second CX
        m(a1 + 2 * b1, a + 2 * b) = 1.0;
      }
    return m;
  }
  if (name == "ECR") {
    // (I (x) X - X (x) Y) / sqrt(2), second wire as the left factor.
    auto kron = [](const Eigen::MatrixXcd& hi, const Eigen::MatrixXcd& lo) {
      Eigen::MatrixXcd k(4, 4);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) k(2 * a + c, 2 * b + d) = hi(a, b) * lo(c, d);
      return k;
    };
    return (kron(textbook_gate("ID"), textbook_gate("X")) - kron(textbook_gate("X"), textbook_gate("Y"))) * r;
  }
  throw std::runtime_error("no textbook matrix for " + name);
}

// ---- brute-force simulator oracle -------------------------------------------

/// Full 2^n unitary of one gate, built entry by entry from the basis action.
inline Eigen::MatrixXcd embed(const Eigen::MatrixXcd& local, const std::vector<int>& wires, int n) {
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t col = 0; col < dim; ++col) {
    int lc = 0;
    for (std::size_t k = 0; k < wires.size(); ++k) lc |= static_cast<int>((col >> wires[k]) & 1u) << k;
    for (int lr = 0; lr < (1 << wires.size()); ++lr) {
      std::size_t row = col;
      for (std::size_t k = 0; k < wires.size(); ++k) {
        row &= ~(std::size_t{1} << wires[k]);
        row |= static_cast<std::size_t>((lr >> k) & 1) << wires[k];
      }
      full(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += local(lr, lc);
    }
  }
  return full;
}

inline Eigen::MatrixXcd oracle_unitary(const Circuit& c) {
  const auto& gs = c.gateset();
  const Eigen::Index dim = Eigen::Index{1} << c.num_qubits;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& g : c.gates) {
    double theta = g.params.empty() ? 0.0 : g.params[0];
    u = embed(textbook_gate(gs[g.gate_index].name, theta), g.wires, c.num_qubits) * u;
  }
  return u;
}

inline Eigen::MatrixXcd oracle_density(const Circuit& c) {
  Eigen::VectorXcd psi = oracle_unitary(c).col(0);
  return psi * psi.adjoint();
}

// ---- wire-labelled DAG isomorphism (exhaustive backtracking) ----------------

/// True iff a node bijection exists that preserves kinds, gate types, wire
/// tuples, parameters (to 1e-6) and labelled edges. Layers are ignored.
inline bool dags_isomorphic(const qfusion::CircuitDAG& a, const qfusion::CircuitDAG& b) {
  if (a.num_qubits != b.num_qubits || a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size())
    return false;
  const std::size_t n = a.nodes.size();
  auto same_attr = [&](std::size_t i, std::size_t j) {
    const auto &x = a.nodes[i], &y = b.nodes[j];
    if (x.kind != y.kind) return false;
    if (x.kind != qfusion::NodeKind::Gate) return true;
    if (x.gate_index != y.gate_index || x.wires != y.wires || x.params.size() != y.params.size()) return false;
    for (std::size_t k = 0; k < x.params.size(); ++k)
      if (std::abs(x.params[k] - y.params[k]) > 1e-6) return false;
    return true;
  };
  std::multiset<std::tuple<std::size_t, std::size_t, int>> eb;
  for (const auto& e : b.edges) eb.insert({e.src, e.dst, e.wire});
  std::vector<std::size_t> map(n, n);
  std::vector<char> used(n, 0);
  std::function<bool(std::size_t)> go = [&](std::size_t i) -> bool {
    if (i == n) {
      std::multiset<std::tuple<std::size_t, std::size_t, int>> ea;
      for (const auto& e : a.edges) ea.insert({map[e.src], map[e.dst], e.wire});
      return ea == eb;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || !same_attr(i, j)) continue;
      // Prune: edges among already mapped nodes must exist in b.
      bool ok = true;
      for (const auto& e : a.edges) {
        if (e.src > i || e.dst > i || (e.src != i && e.dst != i)) continue;
        std::size_t s = e.src == i ? j : map[e.src];
        std::size_t d = e.dst == i ? j : map[e.dst];
        if (!eb.count({s, d, e.wire})) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      map[i] = j;
      used[j] = 1;
      if (go(i + 1)) return true;
      used[j] = 0;
    }
    map[i] = n;
    return false;
  };
  return go(0);
}

}  // namespace qtest
