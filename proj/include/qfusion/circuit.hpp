#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qfusion/gates.hpp"

namespace qfusion {

inline constexpr int kDefaultMaxQubits = 10;

/// Qubit cap used when none is given explicitly: QFUSION_MAX_QUBITS if set to
/// a positive integer, otherwise kDefaultMaxQubits.
int default_max_qubits();

struct GateInstance {
  std::size_t gate_index = 0;
  std::vector<int> wires;     // control precedes target
  std::vector<double> params; // empty means "not yet bound"

  bool operator==(const GateInstance&) const = default;
};

struct Circuit {
  int num_qubits = 1;
  std::vector<GateInstance> gates;
  GateSetId gateset_id = GateSetId::Custom22;

  const GateSet& gateset() const { return gate_set(gateset_id); }
  bool operator==(const Circuit&) const = default;
};

/// Throws InvalidCircuitError on unknown gates, wrong arity, repeated or
/// out-of-range wires, wrong parameter count, or num_qubits outside
/// [1, max_qubits]. Parameters may be left unbound (empty).
void validate_circuit(const Circuit& circuit, int max_qubits = default_max_qubits());

bool params_bound(const Circuit& circuit);

/// Gates touching each wire, in circuit order.
std::vector<std::vector<GateInstance>> per_wire_sequences(const Circuit& circuit);

/// `n|NAME:w0,w1:p0;NAME:w0:;...` with parameters in fixed point, 9 decimals.
std::string serialize_circuit(const Circuit& circuit);

/// Inverse of serialize_circuit. Throws FormatError (line 0) on malformed
/// text and InvalidCircuitError on structurally invalid circuits.
Circuit parse_circuit(std::string_view text, GateSetId gateset, int max_qubits = default_max_qubits());

/// Round to the 9-decimal grid the text format stores.
double round_param(double value);

}  // namespace qfusion
