#include "qfusion/model.hpp"

#include <algorithm>
#include <cmath>

#include "qfusion/error.hpp"
#include "qfusion/random.hpp"

namespace qfusion {

using ad::Matrix;
using ad::Parameter;
using ad::Tape;
using ad::Var;

void validate_config(const EncoderConfig& c) {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw Error(std::string("encoder config: ") + what + " must be positive");
  };
  positive(c.node_embed_dim, "node_embed_dim");
  positive(c.wire_embed_dim, "wire_embed_dim");
  positive(c.hidden_dim, "hidden_dim");
  positive(c.timestep_embed_dim, "timestep_embed_dim");
  positive(c.label_embed_dim, "label_embed_dim");
  if (c.message_rounds < 0) throw Error("encoder config: message_rounds must be >= 0");
  if (c.node_embed_dim % 2 != 0 || c.timestep_embed_dim % 2 != 0)
    throw Error("encoder config: node_embed_dim and timestep_embed_dim must be even");
}

WireCodec::WireCodec(int max_qubits) : n_(max_qubits) {
  if (max_qubits < 1 || max_qubits > 30) throw Error("wire codec: max_qubits out of range");
}

int WireCodec::encode(std::span<const int> wires) const {
  if (wires.size() == 1 && wires[0] >= 0 && wires[0] < n_) return wires[0];
  if (wires.size() == 2) {
    int a = wires[0], b = wires[1];
    if (a >= 0 && a < n_ && b >= 0 && b < n_ && a != b) return n_ + a * (n_ - 1) + (b > a ? b - 1 : b);
  }
  throw Error("wire codec: cannot encode wire tuple");
}

std::vector<int> WireCodec::decode(int code) const {
  if (code < 0 || code >= vocab_size()) throw Error("wire codec: code out of range");
  if (code < n_) return {code};
  int k = code - n_;
  int a = k / (n_ - 1);
  int r = k % (n_ - 1);
  return {a, r >= a ? r + 1 : r};
}

bool WireCodec::fits(int code, int num_qubits) const {
  for (int w : decode(code))
    if (w >= num_qubits) return false;
  return true;
}

std::vector<double> sinusoidal(double value, int dim) {
  std::vector<double> out(static_cast<std::size_t>(dim));
  int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    double freq = std::pow(10000.0, -static_cast<double>(i) / std::max(half, 1));
    out[2 * i] = std::sin(value * freq);
    out[2 * i + 1] = std::cos(value * freq);
  }
  return out;
}

namespace {

Matrix sinusoidal_rows(const std::vector<int>& values, int dim) {
  Matrix m(values.size(), static_cast<std::size_t>(dim));
  for (std::size_t r = 0; r < values.size(); ++r) {
    auto row = sinusoidal(values[r], dim);
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

std::uint32_t wire_bits(const DagNode& node, int num_qubits) {
  if (node.kind == NodeKind::VStart) return num_qubits >= 32 ? ~0u : ((1u << num_qubits) - 1u);
  std::uint32_t bits = 0;
  for (int w : node.wires)
    if (w >= 0 && w < 32) bits |= 1u << w;
  return bits;
}

}  // namespace

PrefixView make_prefix_view(const CircuitDAG& dag, int step) {
  PrefixView view;
  std::vector<int> member_slot(dag.nodes.size(), -1);
  for (std::size_t k = 0; k < dag.nodes.size(); ++k) {
    const auto& node = dag.nodes[k];
    if (node.kind == NodeKind::VEnd || node.layer >= step) continue;
    if (node.kind == NodeKind::VStart && !view.members.empty())
      view.members.insert(view.members.begin(), k);
    else
      view.members.push_back(k);
    if (node.kind == NodeKind::Gate) ++view.gate_count;
  }
  if (view.members.empty() || dag.nodes[view.members[0]].kind != NodeKind::VStart)
    throw Error("prefix view: graph has no start node below the step");
  for (std::size_t i = 0; i < view.members.size(); ++i) member_slot[view.members[i]] = static_cast<int>(i);

  view.frontier.assign(static_cast<std::size_t>(dag.num_qubits), -1);
  view.gap.assign(static_cast<std::size_t>(dag.num_qubits), -1);
  for (std::size_t k : view.members) {
    std::uint32_t bits = wire_bits(dag.nodes[k], dag.num_qubits);
    for (int w = 0; w < dag.num_qubits; ++w) {
      if (!(bits >> w & 1u)) continue;
      int cur = view.frontier[w];
      if (cur < 0 || dag.nodes[k].layer >= dag.nodes[cur].layer) view.frontier[w] = static_cast<int>(k);
    }
  }
  for (int w = 0; w < dag.num_qubits; ++w)
    view.gap[w] = std::min(step - dag.nodes[view.frontier[w]].layer, kMaxGap);

  view.open_mask.resize(view.members.size());
  for (std::size_t i = 0; i < view.members.size(); ++i)
    view.open_mask[i] = wire_bits(dag.nodes[view.members[i]], dag.num_qubits);
  for (const auto& e : dag.edges) {
    if (e.src >= dag.nodes.size() || e.dst >= dag.nodes.size()) continue;
    int s = member_slot[e.src];
    if (s < 0 || member_slot[e.dst] < 0 || e.wire < 0 || e.wire >= 32) continue;
    view.open_mask[s] &= ~(1u << e.wire);
  }
  return view;
}

BatchBuilder::BatchBuilder(const Model& model) : model_(model) {}

int BatchBuilder::add_graph(const CircuitDAG& dag) {
  if (dag.num_qubits > model_.max_qubits()) throw Error("batch: circuit exceeds the model's qubit capacity");
  int offset = static_cast<int>(batch_.gate_token.size());
  std::size_t count = dag.nodes.size();
  for (std::size_t k = 0; k < dag.nodes.size(); ++k) {
    if (dag.nodes[k].kind != NodeKind::VEnd) continue;
    if (k + 1 != dag.nodes.size()) throw Error("batch: end node must be the last node");
    count = k;
  }
  int wire_vocab = model_.wires().vocab_size();
  for (std::size_t k = 0; k < count; ++k) {
    const auto& node = dag.nodes[k];
    if (node.kind == NodeKind::VStart) {
      batch_.gate_token.push_back(model_.num_gates());
      batch_.wire_token.push_back(wire_vocab);
    } else {
      batch_.gate_token.push_back(static_cast<int>(node.gate_index));
      batch_.wire_token.push_back(model_.wires().encode(node.wires));
    }
    batch_.layer.push_back(node.layer);
  }
  for (const auto& e : dag.edges) {
    if (e.src >= count || e.dst >= count) continue;
    batch_.edge_src.push_back(offset + static_cast<int>(e.src));
    batch_.edge_dst.push_back(offset + static_cast<int>(e.dst));
    batch_.edge_wire.push_back(e.wire);
  }
  return offset;
}

int BatchBuilder::add_prefix(int graph_offset, const CircuitDAG& dag, const PrefixView& view, double label_re,
                             double label_im, int step, int t_node, int t_edge) {
  int p = static_cast<int>(batch_.member_count.size());
  for (std::size_t k : view.members) {
    batch_.member_node.push_back(graph_offset + static_cast<int>(k));
    batch_.member_prefix.push_back(p);
  }
  batch_.member_count.push_back(static_cast<int>(view.members.size()));
  for (int w = 0; w < model_.max_qubits(); ++w) {
    bool present = w < dag.num_qubits;
    batch_.frontier_node.push_back(present ? graph_offset + view.frontier[w] : -1);
    batch_.frontier_gap.push_back(present ? view.gap[w] : -1);
  }
  batch_.label_re.push_back(label_re);
  batch_.label_im.push_back(label_im);
  batch_.num_qubits.push_back(dag.num_qubits);
  batch_.step.push_back(step);
  batch_.gate_count.push_back(view.gate_count);
  batch_.t_node.push_back(t_node);
  batch_.t_edge.push_back(t_edge);
  return p;
}

void BatchBuilder::add_size_row(int prefix, int target) {
  batch_.size_prefix.push_back(prefix);
  batch_.size_target.push_back(target);
}

int BatchBuilder::new_group() { return batch_.num_groups++; }

void BatchBuilder::add_node_row(int prefix, int slot, int group, int layer_size, int noisy_gate, int noisy_wire,
                                int target_gate, int target_wire) {
  batch_.node_prefix.push_back(prefix);
  batch_.node_slot.push_back(std::min(slot, model_.max_qubits() - 1));
  batch_.node_group.push_back(group);
  batch_.node_layer_size.push_back(std::min(layer_size, model_.max_qubits()));
  batch_.node_noisy_gate.push_back(noisy_gate);
  batch_.node_noisy_wire.push_back(noisy_wire);
  batch_.node_target_gate.push_back(target_gate);
  batch_.node_target_wire.push_back(target_wire);
}

void BatchBuilder::add_edge_row(int prefix, int prior_row, int new_gate, int new_wire, int slot,
                                std::uint32_t open_mask, int gap, int noisy_bit, int target) {
  batch_.edge_prefix.push_back(prefix);
  batch_.edge_prior.push_back(prior_row);
  batch_.edge_new_gate.push_back(new_gate);
  batch_.edge_new_wire.push_back(new_wire);
  batch_.edge_slot.push_back(std::min(slot, model_.max_qubits() - 1));
  batch_.edge_open_mask.push_back(static_cast<int>(open_mask));
  batch_.edge_gap.push_back(std::clamp(gap, 0, kMaxGap));
  batch_.edge_noisy_bit.push_back(noisy_bit);
  batch_.edge_target.push_back(target);
}

Model::Model(GateSetId gateset, int max_qubits, EncoderConfig config, int diffusion_steps, std::uint64_t seed)
    : gateset_(gateset),
      max_qubits_(max_qubits),
      config_(config),
      schedule_(diffusion_steps),
      codec_(max_qubits),
      num_gates_(static_cast<int>(gate_set(gateset).size())) {
  validate_config(config_);
  Rng rng(seed);
  auto init = [&](Parameter& p, double scale) {
    for (double& x : p.value.data) x = scale * (2.0 * uniform01(rng) - 1.0);
  };
  auto glorot = [](std::size_t in, std::size_t out) { return std::sqrt(6.0 / static_cast<double>(in + out)); };

  const std::size_t d = config_.node_embed_dim, dw = config_.wire_embed_dim, h = config_.hidden_dim;
  const std::size_t te = config_.timestep_embed_dim, le = config_.label_embed_dim;
  const std::size_t n = max_qubits_, G = num_gates_, W = codec_.vocab_size();
  const std::size_t ctx = d + n * d + 2 * le + 2 * te;
  const std::size_t ctx_t = ctx + te;
  const double emb = 0.3;

  init(add(encoder_, "enc.gate_embed", G + 1, d), emb);
  init(add(encoder_, "enc.wire_embed", W + 1, dw), emb);
  init(add(encoder_, "enc.in_w", d + dw, d), glorot(d + dw, d));
  add(encoder_, "enc.in_b", 1, d);
  for (int r = 0; r < config_.message_rounds; ++r) {
    std::string s = std::to_string(r);
    init(add(encoder_, "enc.self_w" + s, d, d), glorot(d, d));
    init(add(encoder_, "enc.msg_w" + s, d, d), glorot(d, d));
    init(add(encoder_, "enc.edge_embed" + s, n, d), emb);
    add(encoder_, "enc.b" + s, 1, d);
  }
  init(add(encoder_, "enc.gap_embed", kMaxGap + 1, d), emb);
  init(add(encoder_, "enc.label_w", 2, le), glorot(2, le));
  add(encoder_, "enc.label_b", 1, le);
  init(add(encoder_, "enc.qubit_embed", n + 1, le), emb);

  init(add(size_, "size.w1", ctx_t, h), glorot(ctx_t, h));
  add(size_, "size.b1", 1, h);
  init(add(size_, "size.w2", h, h), glorot(h, h));
  add(size_, "size.b2", 1, h);
  add(size_, "size.out_w", h, n + 1);
  add(size_, "size.out_b", 1, n + 1);

  init(add(node_, "node.ctx_w", ctx_t, h), glorot(ctx_t, h));
  init(add(node_, "node.gate_embed", G, h), emb);
  init(add(node_, "node.wire_embed", W, h), emb);
  init(add(node_, "node.other_gate", G, h), emb);
  init(add(node_, "node.other_wire", W, h), emb);
  init(add(node_, "node.slot_embed", n, h), emb);
  init(add(node_, "node.size_embed", n + 1, h), emb);
  add(node_, "node.b1", 1, h);
  init(add(node_, "node.w2", h, h), glorot(h, h));
  add(node_, "node.b2", 1, h);
  add(node_, "node.gate_out_w", h, G);
  add(node_, "node.gate_out_b", 1, G);
  add(node_, "node.wire_out_w", h, W);
  add(node_, "node.wire_out_b", 1, W);

  init(add(edge_, "edge.ctx_w", ctx_t, h), glorot(ctx_t, h));
  init(add(edge_, "edge.prior_w", d, h), glorot(d, h));
  init(add(edge_, "edge.open_w", n, h), emb);
  init(add(edge_, "edge.gap_embed", kMaxGap + 1, h), emb);
  init(add(edge_, "edge.gate_embed", G, h), emb);
  init(add(edge_, "edge.wire_embed", W + 1, h), emb);
  init(add(edge_, "edge.bit_embed", 2, h), emb);
  init(add(edge_, "edge.slot_embed", n, h), emb);
  add(edge_, "edge.b1", 1, h);
  init(add(edge_, "edge.w2", h, h), glorot(h, h));
  add(edge_, "edge.b2", 1, h);
  add(edge_, "edge.out_w", h, 2);
  add(edge_, "edge.out_b", 1, 2);
}

Parameter& Model::add(std::vector<Parameter>& group, const std::string& name, std::size_t rows,
                      std::size_t cols) {
  group.emplace_back(name, Matrix(rows, cols));
  return group.back();
}

namespace {
std::vector<Parameter*> pointers(std::vector<Parameter>& group) {
  std::vector<Parameter*> out;
  for (auto& p : group) out.push_back(&p);
  return out;
}
}  // namespace

std::vector<Parameter*> Model::encoder_params() { return pointers(encoder_); }
std::vector<Parameter*> Model::size_params() { return pointers(size_); }
std::vector<Parameter*> Model::node_params() { return pointers(node_); }
std::vector<Parameter*> Model::edge_params() { return pointers(edge_); }

std::vector<Parameter*> Model::all_params() {
  std::vector<Parameter*> out;
  for (auto* group : {&encoder_, &size_, &node_, &edge_})
    for (auto& p : *group) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> Model::all_params() const {
  std::vector<const Parameter*> out;
  for (auto* group : {&encoder_, &size_, &node_, &edge_})
    for (auto& p : *group) out.push_back(&p);
  return out;
}

Parameter* Model::find(const std::string& name) {
  for (auto* p : all_params())
    if (p->name == name) return p;
  return nullptr;
}

Var Model::encode_nodes(Tape& tape, const ModelBatch& b) {
  auto P = [&](const char* name) { return tape.parameter(*find(name)); };
  const std::size_t N = b.num_nodes();
  const int d = config_.node_embed_dim;
  Var xg = tape.add(tape.gather_rows(P("enc.gate_embed"), b.gate_token), tape.constant(sinusoidal_rows(b.layer, d)));
  Var xw = tape.gather_rows(P("enc.wire_embed"), b.wire_token);
  Var h = tape.tanh(tape.add_row(tape.matmul(tape.concat_cols({xg, xw}), P("enc.in_w")), P("enc.in_b")));
  for (int r = 0; r < config_.message_rounds; ++r) {
    std::string s = std::to_string(r);
    Var msg = tape.scatter_add_rows(tape.gather_rows(h, b.edge_src), b.edge_dst, N);
    Var lab = tape.scatter_add_rows(tape.gather_rows(tape.parameter(*find("enc.edge_embed" + s)), b.edge_wire),
                                    b.edge_dst, N);
    Var pre = tape.add(tape.add(tape.matmul(h, tape.parameter(*find("enc.self_w" + s))),
                                tape.matmul(msg, tape.parameter(*find("enc.msg_w" + s)))),
                       lab);
    h = tape.tanh(tape.add_row(pre, tape.parameter(*find("enc.b" + s))));
  }
  return h;
}

Var Model::context(Tape& tape, const ModelBatch& b, Var nodes) {
  auto P = [&](const char* name) { return tape.parameter(*find(name)); };
  const std::size_t rows = b.num_prefixes();
  const int te = config_.timestep_embed_dim;

  std::vector<double> inv(rows);
  for (std::size_t p = 0; p < rows; ++p) inv[p] = 1.0 / std::max(b.member_count[p], 1);
  Var mean = tape.scale_rows(tape.scatter_add_rows(tape.gather_rows(nodes, b.member_node), b.member_prefix, rows),
                             std::move(inv));

  std::vector<Var> parts{mean};
  Var gap_table = P("enc.gap_embed");
  const std::size_t n = max_qubits_;
  for (std::size_t w = 0; w < n; ++w) {
    std::vector<int> node_idx(rows), gap_idx(rows);
    for (std::size_t p = 0; p < rows; ++p) {
      node_idx[p] = b.frontier_node[p * n + w];
      gap_idx[p] = b.frontier_gap[p * n + w];
    }
    parts.push_back(tape.add(tape.gather_rows(nodes, std::move(node_idx)), tape.gather_rows(gap_table, std::move(gap_idx))));
  }

  Matrix labels(rows, 2);
  for (std::size_t p = 0; p < rows; ++p) {
    labels(p, 0) = b.label_re[p];
    labels(p, 1) = b.label_im[p];
  }
  parts.push_back(tape.add_row(tape.matmul(tape.constant(std::move(labels)), P("enc.label_w")), P("enc.label_b")));
  parts.push_back(tape.gather_rows(P("enc.qubit_embed"), b.num_qubits));
  parts.push_back(tape.constant(sinusoidal_rows(b.step, te)));
  parts.push_back(tape.constant(sinusoidal_rows(b.gate_count, te)));
  return tape.concat_cols(parts);
}

Var Model::with_time(Tape& tape, Var ctx, const std::vector<int>& t) {
  return tape.concat_cols({ctx, tape.constant(sinusoidal_rows(t, config_.timestep_embed_dim))});
}

ModelOutputs Model::forward(Tape& tape, const ModelBatch& b) {
  auto P = [&](const char* name) { return tape.parameter(*find(name)); };
  ModelOutputs out;
  if (b.num_prefixes() == 0) return out;
  Var nodes = encode_nodes(tape, b);
  Var ctx = context(tape, b, nodes);
  const std::size_t rows = b.num_prefixes();

  if (!b.size_prefix.empty()) {
    Var c = tape.gather_rows(with_time(tape, ctx, std::vector<int>(rows)), b.size_prefix);
    Var h1 = tape.tanh(tape.add_row(tape.matmul(c, P("size.w1")), P("size.b1")));
    Var h2 = tape.tanh(tape.add_row(tape.matmul(h1, P("size.w2")), P("size.b2")));
    out.size_logits = tape.add_row(tape.matmul(h2, P("size.out_w")), P("size.out_b"));
    out.has_size = true;
  }

  if (!b.node_prefix.empty()) {
    Var proj = tape.matmul(with_time(tape, ctx, b.t_node), P("node.ctx_w"));
    Var self = tape.add(tape.gather_rows(P("node.other_gate"), b.node_noisy_gate),
                        tape.gather_rows(P("node.other_wire"), b.node_noisy_wire));
    Var group_sum = tape.scatter_add_rows(self, b.node_group, static_cast<std::size_t>(b.num_groups));
    Var others = tape.sub(tape.gather_rows(group_sum, b.node_group), self);
    Var pre = tape.gather_rows(proj, b.node_prefix);
    pre = tape.add(pre, tape.gather_rows(P("node.gate_embed"), b.node_noisy_gate));
    pre = tape.add(pre, tape.gather_rows(P("node.wire_embed"), b.node_noisy_wire));
    pre = tape.add(pre, tape.gather_rows(P("node.slot_embed"), b.node_slot));
    pre = tape.add(pre, tape.gather_rows(P("node.size_embed"), b.node_layer_size));
    pre = tape.add(pre, others);
    Var h1 = tape.tanh(tape.add_row(pre, P("node.b1")));
    Var h2 = tape.tanh(tape.add_row(tape.matmul(h1, P("node.w2")), P("node.b2")));
    out.gate_logits = tape.add_row(tape.matmul(h2, P("node.gate_out_w")), P("node.gate_out_b"));
    out.wire_logits = tape.add_row(tape.matmul(h2, P("node.wire_out_w")), P("node.wire_out_b"));
    out.has_nodes = true;
  }

  if (!b.edge_prefix.empty()) {
    const std::size_t n = max_qubits_;
    Matrix open(b.edge_prefix.size(), n);
    for (std::size_t r = 0; r < b.edge_prefix.size(); ++r)
      for (std::size_t w = 0; w < n; ++w) open(r, w) = (static_cast<std::uint32_t>(b.edge_open_mask[r]) >> w) & 1u;
    Var proj = tape.matmul(with_time(tape, ctx, b.t_edge), P("edge.ctx_w"));
    Var prior = tape.matmul(nodes, P("edge.prior_w"));
    Var pre = tape.gather_rows(proj, b.edge_prefix);
    pre = tape.add(pre, tape.gather_rows(prior, b.edge_prior));
    pre = tape.add(pre, tape.matmul(tape.constant(std::move(open)), P("edge.open_w")));
    pre = tape.add(pre, tape.gather_rows(P("edge.gap_embed"), b.edge_gap));
    pre = tape.add(pre, tape.gather_rows(P("edge.gate_embed"), b.edge_new_gate));
    pre = tape.add(pre, tape.gather_rows(P("edge.wire_embed"), b.edge_new_wire));
    pre = tape.add(pre, tape.gather_rows(P("edge.bit_embed"), b.edge_noisy_bit));
    pre = tape.add(pre, tape.gather_rows(P("edge.slot_embed"), b.edge_slot));
    Var h1 = tape.tanh(tape.add_row(pre, P("edge.b1")));
    Var h2 = tape.tanh(tape.add_row(tape.matmul(h1, P("edge.w2")), P("edge.b2")));
    out.edge_logits = tape.add_row(tape.matmul(h2, P("edge.out_w")), P("edge.out_b"));
    out.has_edges = true;
  }
  return out;
}

LossTerms Model::loss(Tape& tape, const ModelBatch& b, const ModelOutputs& out) const {
  LossTerms terms;
  auto zero = [&] { return tape.constant(Matrix(1, 1)); };
  terms.size = out.has_size ? tape.cross_entropy(out.size_logits, b.size_target) : zero();
  terms.gate = out.has_nodes ? tape.cross_entropy(out.gate_logits, b.node_target_gate) : zero();
  terms.wire = out.has_nodes ? tape.cross_entropy(out.wire_logits, b.node_target_wire) : zero();
  terms.edge = out.has_edges ? tape.cross_entropy(out.edge_logits, b.edge_target) : zero();
  terms.total = tape.add(tape.add(terms.size, terms.gate), tape.add(terms.wire, terms.edge));
  return terms;
}

}  // namespace qfusion
