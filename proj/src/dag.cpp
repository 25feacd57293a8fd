#include "qfusion/dag.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>

namespace qfusion {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  if (text.empty()) return parts;
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
T number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw FormatError(0, "bad number '" + std::string(text) + "' in DAG text");
  }
  return value;
}

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<int> all_wires(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

class Validator {
 public:
  explicit Validator(const CircuitDAG& dag) : dag_(dag), n_(dag.nodes.size()) {}

  ValidationReport run() {
    check_endpoints();
    check_acyclic();
    check_virtual_nodes();
    check_layer_order();
    check_wire_paths();
    check_arity();
    check_wire_labels();
    return std::move(report_);
  }

 private:
  void add(Rule rule, bool on_edge, std::size_t id, std::string message) {
    report_.violations.push_back({rule, on_edge, id, std::move(message)});
  }

  bool usable(const DagEdge& e) const { return e.src < n_ && e.dst < n_; }

  void check_endpoints() {
    for (std::size_t i = 0; i < dag_.edges.size(); ++i) {
      if (!usable(dag_.edges[i])) add(Rule::EdgeEndpoint, true, i, "edge endpoint is not a node");
    }
  }

  void check_acyclic() {
    std::vector<std::size_t> indeg(n_, 0);
    std::vector<std::vector<std::size_t>> succ(n_);
    for (const DagEdge& e : dag_.edges) {
      if (!usable(e)) continue;
      ++indeg[e.dst];
      succ[e.src].push_back(e.dst);
    }
    std::vector<std::size_t> queue;
    for (std::size_t v = 0; v < n_; ++v) {
      if (indeg[v] == 0) queue.push_back(v);
    }
    std::size_t seen = 0;
    while (seen < queue.size()) {
      const std::size_t v = queue[seen++];
      for (std::size_t w : succ[v]) {
        if (--indeg[w] == 0) queue.push_back(w);
      }
    }
    if (seen != n_) {
      std::size_t witness = 0;
      while (indeg[witness] == 0) ++witness;
      add(Rule::Cycle, false, witness, "graph contains a cycle through node " + std::to_string(witness));
    }
  }

  void check_virtual_nodes() {
    std::vector<std::size_t> starts, ends;
    int max_other = -1;
    for (std::size_t v = 0; v < n_; ++v) {
      const DagNode& node = dag_.nodes[v];
      if (node.kind == NodeKind::VStart) starts.push_back(v);
      if (node.kind == NodeKind::VEnd) ends.push_back(v);
      if (node.kind != NodeKind::VEnd) max_other = std::max(max_other, node.layer);
      if (node.layer < 0) add(Rule::VirtualNodes, false, v, "negative layer index");
    }
    if (starts.size() != 1) {
      add(Rule::VirtualNodes, false, starts.empty() ? 0 : starts[1],
          "expected exactly one start node, found " + std::to_string(starts.size()));
    } else {
      start_ = starts[0];
      if (dag_.nodes[start_].layer != 0) add(Rule::VirtualNodes, false, start_, "start node not in layer 0");
    }
    if (ends.size() != 1) {
      add(Rule::VirtualNodes, false, ends.empty() ? 0 : ends[1],
          "expected exactly one end node, found " + std::to_string(ends.size()));
    } else {
      end_ = ends[0];
      if (dag_.nodes[end_].layer <= max_other) add(Rule::VirtualNodes, false, end_, "end node not in the final layer");
    }
  }

  void check_layer_order() {
    for (std::size_t i = 0; i < dag_.edges.size(); ++i) {
      const DagEdge& e = dag_.edges[i];
      if (!usable(e)) continue;
      if (dag_.nodes[e.dst].layer <= dag_.nodes[e.src].layer) {
        add(Rule::LayerOrder, true, i,
            "edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) + " does not increase the layer");
      }
    }
  }

  void check_wire_paths() {
    if (start_ == kNone || end_ == kNone) return;
    for (int w = 0; w < dag_.num_qubits; ++w) {
      std::vector<std::vector<std::size_t>> out(n_);
      std::size_t total = 0;
      for (std::size_t i = 0; i < dag_.edges.size(); ++i) {
        const DagEdge& e = dag_.edges[i];
        if (usable(e) && e.wire == w) {
          out[e.src].push_back(e.dst);
          ++total;
        }
      }
      std::vector<bool> visited(n_, false);
      std::size_t cur = start_, steps = 0;
      std::string problem;
      while (cur != end_) {
        visited[cur] = true;
        if (out[cur].size() != 1) {
          problem = "node " + std::to_string(cur) + " has " + std::to_string(out[cur].size()) + " outgoing edges";
          break;
        }
        cur = out[cur][0];
        ++steps;
        if (visited[cur]) {
          problem = "path revisits node " + std::to_string(cur);
          break;
        }
      }
      if (problem.empty() && steps != total) {
        problem = std::to_string(total - steps) + " edges off the start-to-end path";
      }
      if (!problem.empty()) {
        add(Rule::WirePath, false, cur, "wire " + std::to_string(w) + ": " + problem);
      }
    }
  }

  void degrees() {
    in_labels_.assign(n_, {});
    out_labels_.assign(n_, {});
    for (const DagEdge& e : dag_.edges) {
      if (!usable(e)) continue;
      out_labels_[e.src].push_back(e.wire);
      in_labels_[e.dst].push_back(e.wire);
    }
  }

  void check_arity() {
    degrees();
    const GateSet& gates = gate_set(dag_.gateset_id);
    const std::size_t n = static_cast<std::size_t>(dag_.num_qubits);
    for (std::size_t v = 0; v < n_; ++v) {
      const DagNode& node = dag_.nodes[v];
      const std::size_t in = in_labels_[v].size(), out = out_labels_[v].size();
      std::size_t want_in = 0, want_out = 0;
      if (node.kind == NodeKind::VStart) {
        want_out = n;
      } else if (node.kind == NodeKind::VEnd) {
        want_in = n;
      } else {
        if (node.gate_index >= gates.size()) {
          add(Rule::Arity, false, v, "unknown gate index " + std::to_string(node.gate_index));
          continue;
        }
        const auto arity = static_cast<std::size_t>(gates[node.gate_index].arity);
        const auto s = sorted(node.wires);
        const bool in_range = std::all_of(s.begin(), s.end(), [&](int w) { return w >= 0 && w < dag_.num_qubits; });
        if (node.wires.size() != arity || !in_range || std::adjacent_find(s.begin(), s.end()) != s.end()) {
          add(Rule::Arity, false, v, "wire tuple does not fit " + gates[node.gate_index].name);
        }
        want_in = want_out = arity;
      }
      if (in != want_in || out != want_out) {
        add(Rule::Arity, false, v,
            "arity mismatch: in-degree " + std::to_string(in) + ", out-degree " + std::to_string(out) +
                ", expected " + std::to_string(want_in) + "/" + std::to_string(want_out));
      }
    }
  }

  void check_wire_labels() {
    for (std::size_t i = 0; i < dag_.edges.size(); ++i) {
      const DagEdge& e = dag_.edges[i];
      if (e.wire < 0 || e.wire >= dag_.num_qubits) add(Rule::WireLabel, true, i, "wire label out of range");
    }
    const auto every = all_wires(dag_.num_qubits);
    for (std::size_t v = 0; v < n_; ++v) {
      const DagNode& node = dag_.nodes[v];
      if (node.kind == NodeKind::VStart) {
        if (sorted(out_labels_[v]) != every) add(Rule::WireLabel, false, v, "start node must emit each wire once");
      } else if (node.kind == NodeKind::VEnd) {
        if (sorted(in_labels_[v]) != every) add(Rule::WireLabel, false, v, "end node must receive each wire once");
      } else {
        const auto want = sorted(node.wires);
        if (sorted(in_labels_[v]) != want || sorted(out_labels_[v]) != want) {
          add(Rule::WireLabel, false, v, "edge labels do not match the gate's wires");
        }
      }
    }
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const CircuitDAG& dag_;
  std::size_t n_;
  std::size_t start_ = kNone;
  std::size_t end_ = kNone;
  std::vector<std::vector<int>> in_labels_, out_labels_;
  ValidationReport report_;
};

}  // namespace

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::EdgeEndpoint: return "dangling edge";
    case Rule::Cycle: return "cycle";
    case Rule::VirtualNodes: return "virtual nodes";
    case Rule::LayerOrder: return "layer order";
    case Rule::WirePath: return "wire path";
    case Rule::Arity: return "arity mismatch";
    case Rule::WireLabel: return "wire label";
  }
  return "unknown";
}

bool ValidationReport::has(Rule rule) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; });
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "valid";
  std::string out;
  for (const Violation& v : violations) {
    if (!out.empty()) out += "; ";
    out += std::string(rule_name(v.rule)) + " (" + (v.on_edge ? "edge " : "node ") + std::to_string(v.id) +
           "): " + v.message;
  }
  return out;
}

CircuitDAG circuit_to_dag(const Circuit& circuit) {
  validate_circuit(circuit);
  CircuitDAG dag;
  dag.num_qubits = circuit.num_qubits;
  dag.gateset_id = circuit.gateset_id;
  dag.nodes.push_back({NodeKind::VStart, 0, {}, {}, 0});
  std::vector<std::size_t> last(static_cast<std::size_t>(circuit.num_qubits), 0);
  int deepest = 0;
  for (const GateInstance& g : circuit.gates) {
    const std::size_t id = dag.nodes.size();
    int layer = 0;
    for (int w : g.wires) layer = std::max(layer, dag.nodes[last[static_cast<std::size_t>(w)]].layer);
    dag.nodes.push_back({NodeKind::Gate, g.gate_index, g.wires, g.params, layer + 1});
    deepest = std::max(deepest, layer + 1);
    for (int w : g.wires) {
      dag.edges.push_back({last[static_cast<std::size_t>(w)], id, w});
      last[static_cast<std::size_t>(w)] = id;
    }
  }
  const std::size_t end = dag.nodes.size();
  dag.nodes.push_back({NodeKind::VEnd, 0, {}, {}, deepest + 1});
  for (int w = 0; w < circuit.num_qubits; ++w) dag.edges.push_back({last[static_cast<std::size_t>(w)], end, w});
  return dag;
}

Circuit dag_to_circuit(const CircuitDAG& dag) {
  ValidationReport report = validate_dag(dag);
  if (!report.is_valid()) throw ConversionError(std::move(report));
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < dag.nodes.size(); ++v) {
    if (dag.nodes[v].kind == NodeKind::Gate) order.push_back(v);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dag.nodes[a].layer < dag.nodes[b].layer; });
  Circuit circuit;
  circuit.num_qubits = dag.num_qubits;
  circuit.gateset_id = dag.gateset_id;
  for (std::size_t v : order) {
    const DagNode& node = dag.nodes[v];
    circuit.gates.push_back({node.gate_index, node.wires, node.params});
  }
  return circuit;
}

ValidationReport validate_dag(const CircuitDAG& dag) { return Validator(dag).run(); }

std::string serialize_dag(const CircuitDAG& dag) {
  const GateSet& gates = gate_set(dag.gateset_id);
  std::string out = std::to_string(dag.num_qubits) + "|";
  for (std::size_t v = 0; v < dag.nodes.size(); ++v) {
    const DagNode& node = dag.nodes[v];
    if (v > 0) out += ';';
    if (node.kind == NodeKind::VStart) {
      out += 'S';
    } else if (node.kind == NodeKind::VEnd) {
      out += 'E';
    } else {
      out += node.gate_index < gates.size() ? gates[node.gate_index].name : "?";
      out += '/';
      for (std::size_t i = 0; i < node.wires.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(node.wires[i]);
      }
      out += '/';
      for (std::size_t i = 0; i < node.params.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9f", node.params[i]);
        if (i > 0) out += ',';
        out += buf;
      }
    }
    out += '@' + std::to_string(node.layer);
  }
  out += '|';
  for (std::size_t i = 0; i < dag.edges.size(); ++i) {
    const DagEdge& e = dag.edges[i];
    if (i > 0) out += ',';
    out += std::to_string(e.src) + '>' + std::to_string(e.dst) + ':' + std::to_string(e.wire);
  }
  return out;
}

CircuitDAG parse_dag(std::string_view text, GateSetId gateset) {
  const auto sections = split(text, '|');
  if (sections.size() != 3) throw FormatError(0, "DAG text needs 3 '|'-separated sections");
  CircuitDAG dag;
  dag.gateset_id = gateset;
  dag.num_qubits = number<int>(sections[0]);
  const GateSet& gates = gate_set(gateset);
  for (std::string_view item : split(sections[1], ';')) {
    const std::size_t at = item.rfind('@');
    if (at == std::string_view::npos) throw FormatError(0, "DAG node '" + std::string(item) + "' lacks '@layer'");
    DagNode node;
    node.layer = number<int>(item.substr(at + 1));
    const std::string_view head = item.substr(0, at);
    if (head == "S") {
      node.kind = NodeKind::VStart;
    } else if (head == "E") {
      node.kind = NodeKind::VEnd;
    } else {
      const auto fields = split(head, '/');
      if (fields.size() != 3) throw FormatError(0, "DAG node '" + std::string(item) + "' needs NAME/wires/params");
      const auto index = gates.index_of(fields[0]);
      if (!index) throw FormatError(0, "unknown gate '" + std::string(fields[0]) + "'");
      node.gate_index = *index;
      for (std::string_view w : split(fields[1], ',')) node.wires.push_back(number<int>(w));
      for (std::string_view p : split(fields[2], ',')) node.params.push_back(number<double>(p));
    }
    dag.nodes.push_back(std::move(node));
  }
  for (std::string_view item : split(sections[2], ',')) {
    const std::size_t gt = item.find('>'), colon = item.find(':');
    if (gt == std::string_view::npos || colon == std::string_view::npos || colon < gt) {
      throw FormatError(0, "DAG edge '" + std::string(item) + "' needs src>dst:wire");
    }
    dag.edges.push_back({number<std::size_t>(item.substr(0, gt)), number<std::size_t>(item.substr(gt + 1, colon - gt - 1)),
                         number<int>(item.substr(colon + 1))});
  }
  return dag;
}

}  // namespace qfusion
