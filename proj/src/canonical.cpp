#include "qfusion/canonical.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "qfusion/dag.hpp"

namespace qfusion {

std::string canonical_form(const Circuit& circuit) {
  const CircuitDAG dag = circuit_to_dag(circuit);
  const GateSet& gates = circuit.gateset();
  std::map<int, std::vector<std::string>> layers;
  for (const DagNode& node : dag.nodes) {
    if (node.kind != NodeKind::Gate) continue;
    std::string token = gates[node.gate_index].name + "(";
    for (std::size_t i = 0; i < node.wires.size(); ++i) {
      if (i > 0) token += ',';
      token += std::to_string(node.wires[i]);
    }
    token += ")";
    for (double p : node.params) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", p);
      std::string s = buf;
      if (s == "-0.000000") s = "0.000000";
      token += "[" + s + "]";
    }
    layers[node.layer].push_back(std::move(token));
  }
  std::string key = std::to_string(circuit.num_qubits);
  for (auto& [layer, tokens] : layers) {
    std::sort(tokens.begin(), tokens.end());
    key += '|';
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) key += ' ';
      key += tokens[i];
    }
  }
  return key;
}

}  // namespace qfusion
