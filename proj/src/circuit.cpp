#include "qfusion/circuit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "qfusion/error.hpp"

namespace qfusion {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw FormatError(0, "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

int default_max_qubits() {
  if (const char* env = std::getenv("QFUSION_MAX_QUBITS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 30) return static_cast<int>(v);
  }
  return kDefaultMaxQubits;
}

void validate_circuit(const Circuit& circuit, int max_qubits) {
  if (circuit.num_qubits < 1 || circuit.num_qubits > max_qubits) {
    throw InvalidCircuitError("num_qubits " + std::to_string(circuit.num_qubits) + " outside [1, " +
                              std::to_string(max_qubits) + "]");
  }
  const GateSet& gates = circuit.gateset();
  for (std::size_t k = 0; k < circuit.gates.size(); ++k) {
    const GateInstance& g = circuit.gates[k];
    const std::string where = "gate " + std::to_string(k) + ": ";
    if (g.gate_index >= gates.size()) throw InvalidCircuitError(where + "unknown gate index");
    const GateDefinition& def = gates[g.gate_index];
    if (static_cast<int>(g.wires.size()) != def.arity) {
      throw InvalidCircuitError(where + def.name + " expects " + std::to_string(def.arity) + " wires");
    }
    for (std::size_t i = 0; i < g.wires.size(); ++i) {
      if (g.wires[i] < 0 || g.wires[i] >= circuit.num_qubits) {
        throw InvalidCircuitError(where + "wire " + std::to_string(g.wires[i]) + " out of range");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (g.wires[i] == g.wires[j]) throw InvalidCircuitError(where + "repeated wire");
      }
    }
    if (!g.params.empty() && static_cast<int>(g.params.size()) != def.num_params) {
      throw InvalidCircuitError(where + def.name + " expects " + std::to_string(def.num_params) +
                                " parameters");
    }
  }
}

bool params_bound(const Circuit& circuit) {
  const GateSet& gates = circuit.gateset();
  return std::all_of(circuit.gates.begin(), circuit.gates.end(), [&](const GateInstance& g) {
    return static_cast<int>(g.params.size()) == gates[g.gate_index].num_params;
  });
}

std::vector<std::vector<GateInstance>> per_wire_sequences(const Circuit& circuit) {
  std::vector<std::vector<GateInstance>> seqs(static_cast<std::size_t>(circuit.num_qubits));
  for (const GateInstance& g : circuit.gates) {
    for (int w : g.wires) seqs[static_cast<std::size_t>(w)].push_back(g);
  }
  return seqs;
}

double round_param(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", value);
  return std::strtod(buf, nullptr);
}

std::string serialize_circuit(const Circuit& circuit) {
  const GateSet& gates = circuit.gateset();
  std::string out = std::to_string(circuit.num_qubits) + "|";
  for (std::size_t k = 0; k < circuit.gates.size(); ++k) {
    const GateInstance& g = circuit.gates[k];
    if (k > 0) out += ';';
    out += gates[g.gate_index].name;
    out += ':';
    for (std::size_t i = 0; i < g.wires.size(); ++i) {
      if (i > 0) out += ',';
      out += std::to_string(g.wires[i]);
    }
    out += ':';
    for (std::size_t i = 0; i < g.params.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9f", g.params[i]);
      if (i > 0) out += ',';
      out += buf;
    }
  }
  return out;
}

Circuit parse_circuit(std::string_view text, GateSetId gateset, int max_qubits) {
  const std::size_t bar = text.find('|');
  if (bar == std::string_view::npos) throw FormatError(0, "missing '|' after qubit count");
  Circuit circuit;
  circuit.gateset_id = gateset;
  circuit.num_qubits = parse_number<int>(text.substr(0, bar), "qubit count");
  const GateSet& gates = gate_set(gateset);
  const std::string_view body = text.substr(bar + 1);
  if (!body.empty()) {
    for (std::string_view item : split(body, ';')) {
      const auto fields = split(item, ':');
      if (fields.size() != 3) throw FormatError(0, "gate '" + std::string(item) + "' needs name:wires:params");
      const auto index = gates.index_of(fields[0]);
      if (!index) {
        throw FormatError(0, "gate '" + std::string(fields[0]) + "' not in gate set " +
                                 std::string(to_string(gateset)));
      }
      GateInstance g;
      g.gate_index = *index;
      if (!fields[1].empty()) {
        for (std::string_view w : split(fields[1], ',')) g.wires.push_back(parse_number<int>(w, "wire"));
      }
      if (!fields[2].empty()) {
        for (std::string_view p : split(fields[2], ',')) g.params.push_back(parse_number<double>(p, "parameter"));
      }
      circuit.gates.push_back(std::move(g));
    }
  }
  validate_circuit(circuit, max_qubits);
  return circuit;
}

}  // namespace qfusion
