#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qfusion/autodiff.hpp"
#include "qfusion/dag.hpp"
#include "qfusion/diffusion.hpp"
#include "qfusion/gates.hpp"

namespace qfusion {

struct EncoderConfig {
  int node_embed_dim = 64;
  int wire_embed_dim = 16;
  int message_rounds = 2;
  int hidden_dim = 128;
  int timestep_embed_dim = 16;
  int label_embed_dim = 16;

  bool operator==(const EncoderConfig&) const = default;
};

void validate_config(const EncoderConfig& config);

/// Wire assignments as one categorical: the n single wires first, then the
/// n(n-1) ordered distinct pairs (a, b) at n + a*(n-1) + (b > a ? b-1 : b).
class WireCodec {
 public:
  explicit WireCodec(int max_qubits);

  int max_qubits() const { return n_; }
  int vocab_size() const { return n_ + n_ * (n_ - 1); }
  int encode(std::span<const int> wires) const;
  std::vector<int> decode(int code) const;
  int arity(int code) const { return code < n_ ? 1 : 2; }
  /// Every wire of `code` is below num_qubits.
  bool fits(int code, int num_qubits) const;

 private:
  int n_;
};

/// Layer-prefix gap buckets: 1 .. kMaxGap, larger gaps share the last bucket.
inline constexpr int kMaxGap = 8;

/// Inputs for one forward pass. Several graphs may be packed; each prefix
/// row names the nodes visible to one prediction step.
struct ModelBatch {
  // Encoder graph. Gate token == num_gates marks the start node; wire token
  // == wire vocab marks "all wires".
  std::vector<int> gate_token, wire_token, layer;
  std::vector<int> edge_src, edge_dst, edge_wire;

  // Prefix rows.
  std::vector<int> member_node, member_prefix;
  std::vector<int> member_count;
  std::vector<int> frontier_node;  // max_qubits per row, -1 for absent wires
  std::vector<int> frontier_gap;   // max_qubits per row, -1 for absent wires
  std::vector<double> label_re, label_im;
  std::vector<int> num_qubits, step, gate_count, t_node, t_edge;

  // Layer-size rows.
  std::vector<int> size_prefix, size_target;

  // New-node rows. `group` ties nodes of the same new layer together.
  std::vector<int> node_prefix, node_slot, node_group, node_layer_size;
  std::vector<int> node_noisy_gate, node_noisy_wire, node_target_gate, node_target_wire;
  int num_groups = 0;

  // Candidate-edge rows: prior node -> new node.
  std::vector<int> edge_prefix, edge_prior, edge_new_gate, edge_new_wire, edge_slot;
  std::vector<int> edge_open_mask, edge_gap, edge_noisy_bit, edge_target;

  std::size_t num_nodes() const { return gate_token.size(); }
  std::size_t num_prefixes() const { return member_count.size(); }
};

/// Visible state of a graph under construction (or a prefix of a full DAG):
/// the nodes with layer < step and the edges between them.
struct PrefixView {
  std::vector<std::size_t> members;          // dag node ids, start node first
  std::vector<int> frontier;                 // per wire: dag node id
  std::vector<int> gap;                      // per wire: min(step - layer, kMaxGap)
  std::vector<std::uint32_t> open_mask;      // per member: wires without an outgoing edge
  int gate_count = 0;
};

PrefixView make_prefix_view(const CircuitDAG& dag, int step);

class Model;

/// Appends graphs and prediction rows to a ModelBatch.
class BatchBuilder {
 public:
  explicit BatchBuilder(const Model& model);

  /// Adds every non-end node of `dag` to the encoder graph. Returns the row
  /// offset; dag node id k maps to row offset + k for k below the end node.
  int add_graph(const CircuitDAG& dag);
  int add_prefix(int graph_offset, const CircuitDAG& dag, const PrefixView& view, double label_re, double label_im,
                 int step, int t_node, int t_edge);
  void add_size_row(int prefix, int target);
  int new_group();
  void add_node_row(int prefix, int slot, int group, int layer_size, int noisy_gate, int noisy_wire,
                    int target_gate = -1, int target_wire = -1);
  void add_edge_row(int prefix, int prior_row, int new_gate, int new_wire, int slot, std::uint32_t open_mask,
                    int gap, int noisy_bit, int target = -1);

  ModelBatch& batch() { return batch_; }
  ModelBatch take() { return std::move(batch_); }

 private:
  const Model& model_;
  ModelBatch batch_;
};

struct ModelOutputs {
  ad::Var size_logits, gate_logits, wire_logits, edge_logits;
  bool has_size = false, has_nodes = false, has_edges = false;
};

struct LossTerms {
  ad::Var total;
  ad::Var size, gate, wire, edge;
};

/// Shared DAG encoder plus three independently parameterised heads:
/// layer size, node gate+wire, and candidate edge bits.
class Model {
 public:
  Model(GateSetId gateset, int max_qubits, EncoderConfig config, int diffusion_steps, std::uint64_t seed);

  GateSetId gateset() const { return gateset_; }
  int max_qubits() const { return max_qubits_; }
  const EncoderConfig& config() const { return config_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  void set_schedule(NoiseSchedule schedule) { schedule_ = std::move(schedule); }
  const WireCodec& wires() const { return codec_; }
  int num_gates() const { return num_gates_; }
  int size_classes() const { return max_qubits_ + 1; }

  std::vector<ad::Parameter*> encoder_params();
  std::vector<ad::Parameter*> size_params();
  std::vector<ad::Parameter*> node_params();
  std::vector<ad::Parameter*> edge_params();
  std::vector<ad::Parameter*> all_params();
  std::vector<const ad::Parameter*> all_params() const;
  ad::Parameter* find(const std::string& name);

  ModelOutputs forward(ad::Tape& tape, const ModelBatch& batch);
  LossTerms loss(ad::Tape& tape, const ModelBatch& batch, const ModelOutputs& out) const;

 private:
  ad::Parameter& add(std::vector<ad::Parameter>& group, const std::string& name, std::size_t rows,
                     std::size_t cols);
  ad::Var encode_nodes(ad::Tape& tape, const ModelBatch& batch);
  ad::Var context(ad::Tape& tape, const ModelBatch& batch, ad::Var nodes);
  ad::Var with_time(ad::Tape& tape, ad::Var ctx, const std::vector<int>& t);

  GateSetId gateset_;
  int max_qubits_;
  EncoderConfig config_;
  NoiseSchedule schedule_;
  WireCodec codec_;
  int num_gates_;

  std::vector<ad::Parameter> encoder_, size_, node_, edge_;
};

/// Sinusoidal features of `value`, `dim` wide.
std::vector<double> sinusoidal(double value, int dim);

}  // namespace qfusion
