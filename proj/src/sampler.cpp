#include "qfusion/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qfusion/error.hpp"

namespace qfusion {

std::string_view to_string(SamplingMode mode) { return mode == SamplingMode::WireFree ? "wire_free" : "wire_head"; }
std::string_view to_string(EdgeMode mode) { return mode == EdgeMode::Free ? "free" : "constrained"; }

std::optional<SamplingMode> parse_sampling_mode(std::string_view text) {
  if (text == "wire_free") return SamplingMode::WireFree;
  if (text == "wire_head") return SamplingMode::WireHead;
  return std::nullopt;
}

std::optional<EdgeMode> parse_edge_mode(std::string_view text) {
  if (text == "free") return EdgeMode::Free;
  if (text == "constrained") return EdgeMode::Constrained;
  return std::nullopt;
}

void validate_config(const SamplerConfig& c) {
  if (c.mode == SamplingMode::WireFree && c.edge_mode != EdgeMode::Constrained)
    throw Error("sampler config: wire_free mode requires constrained edges");
  if (c.max_layers < 1) throw Error("sampler config: max_layers must be >= 1");
  if (c.num_qubits < 0) throw Error("sampler config: num_qubits must be >= 0");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct NodeQuery {
  int slot, gate, wire;
};

struct EdgeQuery {
  int slot;
  std::size_t member;  // index into the prefix view
  int gate, wire, bit;
};

struct Answer {
  ad::Matrix size, gate, wire, edge;
};

std::vector<double> row_of(const ad::Matrix& m, std::size_t r) {
  auto s = m.row(r);
  return {s.begin(), s.end()};
}

bool any_finite(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return x != kNegInf; });
}

class Generator {
 public:
  Generator(const Checkpoint& ck, const SamplerConfig& cfg, Rng& rng)
      // Forward passes only read parameter values; nothing is written back.
      : model_(const_cast<Model&>(ck.model)),
        cfg_(cfg),
        rng_(rng),
        gates_(gate_set(ck.model.gateset())),
        T_(ck.model.schedule().total_steps()),
        G_(ck.model.num_gates()),
        W_(ck.model.wires().vocab_size()) {
    pick_label(ck);
    if (n_ > model_.max_qubits())
      throw Error("sampler: " + std::to_string(n_) + " qubits exceed the checkpoint capacity of " +
                  std::to_string(model_.max_qubits()));
    out_.dag.num_qubits = n_;
    out_.dag.gateset_id = model_.gateset();
    DagNode start;
    start.kind = NodeKind::VStart;
    out_.dag.nodes.push_back(start);
    if (cfg_.mode == SamplingMode::WireFree) {
      out_.permutation.resize(static_cast<std::size_t>(n_));
      for (int i = 0; i < n_; ++i) out_.permutation[i] = i;
      std::shuffle(out_.permutation.begin(), out_.permutation.end(), rng_);
    }
  }

  SampledDag run() {
    int step = 1;
    for (;; ++step) {
      if (step > cfg_.max_layers) {
        out_.truncated = true;
        break;
      }
      view_ = make_prefix_view(out_.dag, step);
      step_ = step;
      int size = sample_size();
      if (size == 0) break;
      std::vector<DagNode> layer = sample_nodes(size);
      if (layer.empty()) continue;  // nothing fit; the stop decision is asked again
      attach(layer);
    }
    finish(step);
    return std::move(out_);
  }

 private:
  void pick_label(const Checkpoint& ck) {
    if (cfg_.fixed_label) {
      out_.label = *cfg_.fixed_label;
      n_ = cfg_.num_qubits > 0 ? cfg_.num_qubits : model_.max_qubits();
      return;
    }
    std::vector<const TrainingLabel*> pool;
    for (const auto& l : ck.labels)
      if (cfg_.num_qubits == 0 || l.num_qubits == cfg_.num_qubits) pool.push_back(&l);
    if (pool.empty()) {
      if (ck.labels.empty()) throw Error("sampler: checkpoint has no training labels; pass a fixed label");
      throw Error("sampler: no training label with " + std::to_string(cfg_.num_qubits) + " qubits");
    }
    const TrainingLabel& l = *pool[uniform_index(rng_, pool.size())];
    out_.label = {l.re, l.im};
    n_ = l.num_qubits;
  }

  Answer query(bool size, int t_node, int t_edge, const std::vector<NodeQuery>& nodes,
               const std::vector<EdgeQuery>& edges, int layer_size) {
    BatchBuilder bb(model_);
    int off = bb.add_graph(out_.dag);
    int p = bb.add_prefix(off, out_.dag, view_, out_.label.re, out_.label.im, step_, t_node, t_edge);
    if (size) bb.add_size_row(p, -1);
    if (!nodes.empty()) {
      int g = bb.new_group();
      for (const auto& q : nodes) bb.add_node_row(p, q.slot, g, layer_size, q.gate, q.wire);
    }
    for (const auto& q : edges) {
      std::size_t u = view_.members[q.member];
      bb.add_edge_row(p, off + static_cast<int>(u), q.gate, q.wire, q.slot, view_.open_mask[q.member],
                      std::min(step_ - out_.dag.nodes[u].layer, kMaxGap), q.bit);
    }
    ModelBatch batch = bb.take();
    ad::Tape tape;
    ModelOutputs o = model_.forward(tape, batch);
    Answer a;
    if (o.has_size) a.size = tape.value(o.size_logits);
    if (o.has_nodes) {
      a.gate = tape.value(o.gate_logits);
      a.wire = tape.value(o.wire_logits);
    }
    if (o.has_edges) a.edge = tape.value(o.edge_logits);
    return a;
  }

  int sample_size() {
    Answer a = query(true, T_, T_, {}, {}, 0);
    std::vector<double> logits = row_of(a.size, 0);
    for (std::size_t k = static_cast<std::size_t>(n_) + 1; k < logits.size(); ++k) logits[k] = kNegInf;
    return sample_categorical(softmax(logits), rng_);
  }

  std::vector<double> gate_logits(const Answer& a, std::size_t i, int free_wires) const {
    std::vector<double> l = row_of(a.gate, i);
    for (int g = 0; g < G_; ++g)
      if (gates_[g].arity > std::min(n_, free_wires)) l[g] = kNegInf;
    return l;
  }

  std::vector<double> wire_logits(const Answer& a, std::size_t i, int arity, std::uint32_t used) const {
    std::vector<double> l = row_of(a.wire, i);
    for (int c = 0; c < W_; ++c) {
      bool ok = model_.wires().fits(c, n_) && (arity == 0 || model_.wires().arity(c) == arity);
      if (ok)
        for (int w : model_.wires().decode(c))
          if (used >> w & 1u) ok = false;
      if (!ok) l[c] = kNegInf;
    }
    return l;
  }

  std::vector<DagNode> sample_nodes(int size) {
    const bool head_wires = cfg_.mode == SamplingMode::WireHead;
    const auto& sched = model_.schedule();
    std::vector<NodeQuery> q(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) {
      q[i].slot = i;
      q[i].gate = static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(G_)));
      q[i].wire = static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(W_)));
    }
    for (int t = T_; t >= 2; --t) {
      Answer a = query(false, t, T_, q, {}, size);
      for (int i = 0; i < size; ++i) {
        q[i].gate = posterior_step(gate_logits(a, i, n_), {G_, q[i].gate}, t, sched, rng_).value;
        if (head_wires) q[i].wire = posterior_step(wire_logits(a, i, 0, 0), {W_, q[i].wire}, t, sched, rng_).value;
      }
    }

    // Final step: clean categories, sampled slot by slot so the layer stays a
    // set of disjoint, arity-consistent gates.
    Answer a = query(false, 1, T_, q, {}, size);
    std::vector<DagNode> layer;
    std::uint32_t used = 0;
    int taken = 0;
    for (int i = 0; i < size; ++i) {
      int free_wires = n_ - taken;
      std::vector<double> gl = gate_logits(a, i, free_wires);
      if (!any_finite(gl)) continue;
      DagNode node;
      node.gate_index = static_cast<std::size_t>(sample_categorical(softmax(gl), rng_));
      node.layer = step_;
      int arity = gates_[node.gate_index].arity;
      if (head_wires) {
        std::vector<double> wl = wire_logits(a, i, arity, used);
        if (!any_finite(wl)) continue;
        node.wires = model_.wires().decode(sample_categorical(softmax(wl), rng_));
        for (int w : node.wires) used |= 1u << w;
      } else {
        node.wires.assign(static_cast<std::size_t>(arity), -1);
      }
      taken += arity;
      layer.push_back(std::move(node));
    }
    if (!head_wires) choose_wires(layer);
    return layer;
  }

  // Wire-free: each node takes open frontier wires weighted by the edge
  // head's probability of connecting to the wire's frontier node.
  void choose_wires(std::vector<DagNode>& layer) {
    std::vector<EdgeQuery> eq;
    for (std::size_t s = 0; s < layer.size(); ++s)
      for (std::size_t m = 0; m < view_.members.size(); ++m)
        eq.push_back({static_cast<int>(s), m, static_cast<int>(layer[s].gate_index), W_,
                      static_cast<int>(uniform_index(rng_, 2))});
    Answer a = query(false, T_, T_, {}, eq, static_cast<int>(layer.size()));
    std::vector<int> member_of(out_.dag.nodes.size(), -1);
    for (std::size_t m = 0; m < view_.members.size(); ++m) member_of[view_.members[m]] = static_cast<int>(m);

    std::uint32_t used = 0;
    for (std::size_t s = 0; s < layer.size(); ++s) {
      for (auto& wire : layer[s].wires) {
        std::vector<double> score(static_cast<std::size_t>(n_), 0.0);
        double total = 0.0;
        for (int w = 0; w < n_; ++w) {
          if (used >> w & 1u) continue;
          std::size_t row = s * view_.members.size() + static_cast<std::size_t>(member_of[view_.frontier[w]]);
          std::vector<double> p = softmax(row_of(a.edge, row));
          score[w] = p[1];
          total += p[1];
        }
        if (total <= 0.0)
          for (int w = 0; w < n_; ++w) score[w] = (used >> w & 1u) ? 0.0 : 1.0;
        wire = sample_categorical(score, rng_);
        used |= 1u << wire;
      }
    }
  }

  void attach(std::vector<DagNode>& layer) {
    auto& dag = out_.dag;
    if (cfg_.edge_mode == EdgeMode::Constrained) {
      std::vector<int> frontier = view_.frontier;
      for (auto& node : layer) {
        std::size_t id = dag.nodes.size();
        for (int w : node.wires) {
          dag.edges.push_back({static_cast<std::size_t>(frontier[w]), id, w});
          frontier[w] = static_cast<int>(id);
        }
        dag.nodes.push_back(std::move(node));
      }
      return;
    }

    // Free edges: denoise one bit per (new node, prior node) pair.
    const auto& sched = model_.schedule();
    std::vector<EdgeQuery> eq;
    for (std::size_t s = 0; s < layer.size(); ++s)
      for (std::size_t m = 0; m < view_.members.size(); ++m)
        eq.push_back({static_cast<int>(s), m, static_cast<int>(layer[s].gate_index),
                      model_.wires().encode(layer[s].wires), static_cast<int>(uniform_index(rng_, 2))});
    const int layer_size = static_cast<int>(layer.size());
    for (int t = T_; t >= 1; --t) {
      Answer a = query(false, T_, t, {}, eq, layer_size);
      for (std::size_t r = 0; r < eq.size(); ++r)
        eq[r].bit = posterior_step(row_of(a.edge, r), {2, eq[r].bit}, t, sched, rng_).value;
    }
    std::size_t first = dag.nodes.size();
    for (std::size_t r = 0; r < eq.size(); ++r) {
      if (eq[r].bit != 1) continue;
      const auto& node = layer[static_cast<std::size_t>(eq[r].slot)];
      std::size_t u = view_.members[eq[r].member];
      std::uint32_t open = view_.open_mask[eq[r].member];
      std::size_t before = dag.edges.size();
      for (int w : node.wires)
        if (open >> w & 1u) dag.edges.push_back({u, first + static_cast<std::size_t>(eq[r].slot), w});
      if (dag.edges.size() == before)
        dag.edges.push_back({u, first + static_cast<std::size_t>(eq[r].slot), node.wires[0]});
    }
    for (auto& node : layer) dag.nodes.push_back(std::move(node));
  }

  void finish(int step) {
    auto& dag = out_.dag;
    DagNode end;
    end.kind = NodeKind::VEnd;
    end.layer = step;
    std::size_t end_id = dag.nodes.size();
    dag.nodes.push_back(end);
    std::vector<std::uint32_t> closed(end_id, 0);
    for (const auto& e : dag.edges)
      if (e.wire >= 0 && e.wire < 32) closed[e.src] |= 1u << e.wire;
    for (std::size_t k = 0; k < end_id; ++k) {
      std::vector<int> wires;
      if (dag.nodes[k].kind == NodeKind::VStart)
        for (int w = 0; w < n_; ++w) wires.push_back(w);
      else
        wires = dag.nodes[k].wires;
      for (int w : wires)
        if (!(closed[k] >> w & 1u)) dag.edges.push_back({k, end_id, w});
    }
    if (cfg_.mode == SamplingMode::WireFree) {
      const auto& perm = out_.permutation;
      for (auto& node : dag.nodes)
        for (int& w : node.wires) w = perm[static_cast<std::size_t>(w)];
      for (auto& e : dag.edges) e.wire = perm[static_cast<std::size_t>(e.wire)];
    }
  }

  Model& model_;
  const SamplerConfig& cfg_;
  Rng& rng_;
  const GateSet& gates_;
  int T_, G_, W_;
  int n_ = 1;
  int step_ = 1;
  PrefixView view_;
  SampledDag out_;
};

}  // namespace

SampledDag sample_dag(const Checkpoint& checkpoint, const SamplerConfig& config, Rng& rng) {
  validate_config(config);
  return Generator(checkpoint, config, rng).run();
}

std::vector<SampleItem> sample_circuits(const Checkpoint& checkpoint, const SamplerConfig& config,
                                        std::size_t count) {
  validate_config(config);
  std::vector<SampleItem> items(count);
  std::exception_ptr failure;
  const auto& gates = gate_set(checkpoint.model.gateset());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    try {
      Rng rng = derive_rng(config.seed, static_cast<std::uint64_t>(i));
      SampleItem& item = items[static_cast<std::size_t>(i)];
      item.index = static_cast<std::size_t>(i);
      item.sample = sample_dag(checkpoint, config, rng);
      item.report = validate_dag(item.sample.dag);
      if (item.report.is_valid()) {
        Circuit c = dag_to_circuit(item.sample.dag);
        for (auto& g : c.gates) {
          int np = gates[g.gate_index].num_params;
          g.params.clear();
          for (int k = 0; k < np; ++k) g.params.push_back(round_param(2.0 * std::numbers::pi * uniform01(rng)));
        }
        item.circuit = std::move(c);
      }
    } catch (...) {
#pragma omp critical(qfusion_sample_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return items;
}

void write_samples(const std::vector<SampleItem>& items, GateSetId gateset, const SamplerConfig& config,
                   std::ostream& out) {
  out << "QFSAMPLES v1 gateset=" << to_string(gateset) << " seed=" << config.seed << " mode=" << to_string(config.mode)
      << " edge_mode=" << to_string(config.edge_mode) << '\n';
  for (const auto& item : items) {
    out << item.index << ' ' << (item.report.is_valid() ? "valid" : "invalid") << ' '
        << (item.sample.truncated ? 1 : 0) << ' ' << serialize_dag(item.sample.dag) << ' '
        << (item.circuit ? serialize_circuit(*item.circuit) : std::string("-")) << '\n';
  }
  if (!out) throw Error("samples: write failed");
}

void save_samples(const std::vector<SampleItem>& items, GateSetId gateset, const SamplerConfig& config,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("samples: cannot open " + path + " for writing");
  write_samples(items, gateset, config, out);
}

SampleFile read_samples(std::istream& in) {
  SampleFile file;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(1, "samples: missing header");
  {
    std::istringstream hs(line);
    std::string magic, version, field;
    hs >> magic >> version;
    if (magic != "QFSAMPLES" || version != "v1") throw FormatError(1, "samples: bad header");
    bool have_gateset = false;
    while (hs >> field) {
      auto eq = field.find('=');
      if (eq == std::string::npos) throw FormatError(1, "samples: bad header field " + field);
      std::string key = field.substr(0, eq), value = field.substr(eq + 1);
      if (key == "gateset") {
        auto id = parse_gateset_id(value);
        if (!id) throw FormatError(1, "samples: unknown gate set " + value);
        file.gateset = *id;
        have_gateset = true;
      } else if (key == "seed") {
        try {
          file.seed = std::stoull(value);
        } catch (const std::exception&) {
          throw FormatError(1, "samples: bad seed");
        }
      } else if (key == "mode") {
        if (!parse_sampling_mode(value)) throw FormatError(1, "samples: unknown mode " + value);
      } else if (key == "edge_mode") {
        if (!parse_edge_mode(value)) throw FormatError(1, "samples: unknown edge mode " + value);
      } else {
        throw FormatError(1, "samples: unknown header field " + key);
      }
    }
    if (!have_gateset) throw FormatError(1, "samples: header lacks gateset");
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string index, status, truncated, dag_text, circuit_text, extra;
    if (!(ls >> index >> status >> truncated >> dag_text >> circuit_text) || (ls >> extra))
      throw FormatError(lineno, "samples: expected 5 fields");
    SampleItem item;
    try {
      item.index = std::stoull(index);
      item.sample.dag = parse_dag(dag_text, file.gateset);
      if (circuit_text != "-") item.circuit = parse_circuit(circuit_text, file.gateset);
    } catch (const std::exception& e) {
      throw FormatError(lineno, std::string("samples: ") + e.what());
    }
    if (truncated != "0" && truncated != "1") throw FormatError(lineno, "samples: truncated flag must be 0 or 1");
    item.sample.truncated = truncated == "1";
    item.report = validate_dag(item.sample.dag);
    bool valid = item.report.is_valid();
    if ((status == "valid") != valid || (status != "valid" && status != "invalid"))
      throw FormatError(lineno, "samples: validity column disagrees with the DAG");
    if (valid != item.circuit.has_value())
      throw FormatError(lineno, "samples: circuit column must be present exactly for valid DAGs");
    file.items.push_back(std::move(item));
  }
  return file;
}

SampleFile load_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("samples: cannot open " + path);
  return read_samples(in);
}

}  // namespace qfusion
