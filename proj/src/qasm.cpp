#include "qfusion/qasm.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace qfusion {
namespace {

// Gates outside qelib1.inc, written in terms of qelib1 gates. The ecr body
// matches the standard gate up to a global phase.
const std::map<std::string, std::string>& extra_definitions() {
  static const std::map<std::string, std::string> defs{
      {"dcx", "gate dcx a,b { cx a,b; cx b,a; }"},
      {"iswap", "gate iswap a,b { s a; s b; h a; cx a,b; cx b,a; h b; }"},
      {"ecr", "gate ecr a,b { s a; sx b; cx a,b; x a; }"},
      {"cs", "gate cs a,b { t a; cx a,b; tdg b; cx a,b; t b; }"},
      {"csdg", "gate csdg a,b { tdg a; cx a,b; t b; cx a,b; tdg b; }"},
  };
  return defs;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

UnsupportedGateError::UnsupportedGateError(std::vector<std::string> names)
    : Error("gates not expressible in OpenQASM 2 without definitions: " + join(names)), names_(std::move(names)) {}

std::string export_qasm(const Circuit& circuit, const QasmOptions& options) {
  validate_circuit(circuit);
  const GateSet& gates = circuit.gateset();
  const auto& defs = extra_definitions();

  std::vector<std::string> needed;  // first-use order
  for (const GateInstance& g : circuit.gates) {
    const std::string& name = gates[g.gate_index].qasm_name;
    if (defs.count(name) && std::find(needed.begin(), needed.end(), name) == needed.end()) needed.push_back(name);
  }
  if (!options.emit_definitions && !needed.empty()) {
    std::vector<std::string> upper;
    for (const GateInstance& g : circuit.gates) {
      const auto& def = gates[g.gate_index];
      if (defs.count(def.qasm_name) && std::find(upper.begin(), upper.end(), def.name) == upper.end()) {
        upper.push_back(def.name);
      }
    }
    throw UnsupportedGateError(std::move(upper));
  }

  std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  for (const auto& name : needed) out += defs.at(name) + "\n";
  out += "qreg q[" + std::to_string(circuit.num_qubits) + "];\n";
  for (const GateInstance& g : circuit.gates) {
    out += gates[g.gate_index].qasm_name;
    if (!g.params.empty()) {
      out += '(';
      for (std::size_t i = 0; i < g.params.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", g.params[i]);
        out += (i > 0 ? "," : "") + std::string(buf);
      }
      out += ')';
    }
    out += ' ';
    for (std::size_t i = 0; i < g.wires.size(); ++i) {
      out += (i > 0 ? "," : "") + std::string("q[") + std::to_string(g.wires[i]) + "]";
    }
    out += ";\n";
  }
  return out;
}

}  // namespace qfusion
