#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qfusion/circuit.hpp"
#include "qfusion/error.hpp"

namespace qfusion {

enum class NodeKind { VStart, VEnd, Gate };

struct DagNode {
  NodeKind kind = NodeKind::Gate;
  std::size_t gate_index = 0;  // meaningful for Gate nodes only
  std::vector<int> wires;      // Gate nodes only
  std::vector<double> params;  // Gate nodes only, may be unbound
  int layer = 0;

  bool operator==(const DagNode&) const = default;
};

struct DagEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  int wire = 0;

  bool operator==(const DagEdge&) const = default;
};

/// Attributed DAG of a circuit. Node ids are indices into `nodes`.
/// A virtual start node fans out one edge per qubit and a virtual end node
/// collects one edge per qubit, so each qubit is a labelled path from start
/// to end.
struct CircuitDAG {
  int num_qubits = 1;
  GateSetId gateset_id = GateSetId::Custom22;
  std::vector<DagNode> nodes;
  std::vector<DagEdge> edges;

  bool operator==(const CircuitDAG&) const = default;
};

enum class Rule {
  EdgeEndpoint,  // edge references a missing node
  Cycle,
  VirtualNodes,  // start/end count or placement
  LayerOrder,
  WirePath,
  Arity,
  WireLabel,
};

std::string_view rule_name(Rule rule);

struct Violation {
  Rule rule;
  bool on_edge = false;
  std::size_t id = 0;  // node or edge id
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool is_valid() const { return violations.empty(); }
  bool has(Rule rule) const;
  std::string summary() const;
};

class ConversionError : public Error {
 public:
  explicit ConversionError(ValidationReport report)
      : Error("DAG is not a valid circuit: " + report.summary()), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// ASAP layering: a gate's layer is one more than the deepest predecessor.
/// Node 0 is the start node, gates follow in circuit order, the end node is
/// last. Throws InvalidCircuitError for malformed circuits.
CircuitDAG circuit_to_dag(const Circuit& circuit);

/// Gates in ascending layer, ties broken by node id. Throws ConversionError
/// when validate_dag reports any violation.
Circuit dag_to_circuit(const CircuitDAG& dag);

/// Never throws; accepts arbitrary node/edge lists.
ValidationReport validate_dag(const CircuitDAG& dag);

/// Line-safe text form: `n|node;node;...|src>dst:wire,...` where a node is
/// `S@layer`, `E@layer` or `NAME/w0,w1/p0@layer`.
std::string serialize_dag(const CircuitDAG& dag);
CircuitDAG parse_dag(std::string_view text, GateSetId gateset);

}  // namespace qfusion
