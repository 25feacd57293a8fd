#include "qfusion/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qfusion/dag.hpp"
#include "qfusion/error.hpp"

namespace qfusion {

void validate_config(const TrainConfig& c) {
  if (c.epochs < 0) throw Error("train config: epochs must be >= 0");
  if (c.batch_size < 1) throw Error("train config: batch_size must be >= 1");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate))
    throw Error("train config: learning rate must be positive");
  if (c.diffusion_steps < 1) throw Error("train config: diffusion steps must be >= 1");
  if (c.max_qubits < 0 || c.max_qubits > 30) throw Error("train config: max_qubits out of range");
  if (!(c.unknown_wire_rate >= 0.0 && c.unknown_wire_rate <= 1.0))
    throw Error("train config: unknown_wire_rate must lie in [0, 1]");
  validate_config(c.encoder);
}

ModelBatch build_training_batch(const Model& model, std::span<const DatasetRecord* const> records, Rng& rng,
                                double unknown_wire_rate) {
  BatchBuilder builder(model);
  const int T = model.schedule().total_steps();
  const int G = model.num_gates();
  const int W = model.wires().vocab_size();
  const auto& sched = model.schedule();
  auto draw_t = [&] { return 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(T))); };

  for (const DatasetRecord* rec : records) {
    CircuitDAG dag = circuit_to_dag(rec->circuit);
    int offset = builder.add_graph(dag);
    int depth = 0;
    for (const auto& node : dag.nodes)
      if (node.kind == NodeKind::Gate) depth = std::max(depth, node.layer);
    std::vector<char> has_edge(dag.nodes.size() * dag.nodes.size(), 0);
    for (const auto& e : dag.edges) has_edge[e.src * dag.nodes.size() + e.dst] = 1;

    for (int step = 1; step <= depth + 1; ++step) {
      PrefixView view = make_prefix_view(dag, step);
      int t_node = draw_t();
      int t_edge = draw_t();
      int p = builder.add_prefix(offset, dag, view, rec->label.re, rec->label.im, step, t_node, t_edge);

      std::vector<std::size_t> layer_nodes;
      for (std::size_t k = 0; k < dag.nodes.size(); ++k)
        if (dag.nodes[k].kind == NodeKind::Gate && dag.nodes[k].layer == step) layer_nodes.push_back(k);
      std::stable_sort(layer_nodes.begin(), layer_nodes.end(), [&](std::size_t a, std::size_t b) {
        return *std::min_element(dag.nodes[a].wires.begin(), dag.nodes[a].wires.end()) <
               *std::min_element(dag.nodes[b].wires.begin(), dag.nodes[b].wires.end());
      });
      builder.add_size_row(p, static_cast<int>(layer_nodes.size()));
      if (layer_nodes.empty()) continue;

      int group = builder.new_group();
      int layer_size = static_cast<int>(layer_nodes.size());
      for (int slot = 0; slot < layer_size; ++slot) {
        const auto& node = dag.nodes[layer_nodes[slot]];
        int gate = static_cast<int>(node.gate_index);
        int wire = model.wires().encode(node.wires);
        int noisy_gate = q_sample({G, gate}, t_node, sched, rng).value;
        int noisy_wire = q_sample({W, wire}, t_node, sched, rng).value;
        builder.add_node_row(p, slot, group, layer_size, noisy_gate, noisy_wire, gate, wire);
      }
      for (int slot = 0; slot < layer_size; ++slot) {
        std::size_t v = layer_nodes[slot];
        const auto& node = dag.nodes[v];
        int gate = static_cast<int>(node.gate_index);
        int wire = model.wires().encode(node.wires);
        for (std::size_t i = 0; i < view.members.size(); ++i) {
          std::size_t u = view.members[i];
          int target = has_edge[u * dag.nodes.size() + v];
          int noisy = q_sample({2, target}, t_edge, sched, rng).value;
          int wire_token = uniform01(rng) < unknown_wire_rate ? W : wire;
          builder.add_edge_row(p, offset + static_cast<int>(u), gate, wire_token, slot, view.open_mask[i],
                               std::min(step - dag.nodes[u].layer, kMaxGap), noisy, target);
        }
      }
    }
  }
  return builder.take();
}

namespace {

BatchLoss run(Model& model, const ModelBatch& batch, bool backward, bool include_edge_loss) {
  ad::Tape tape;
  ModelOutputs out = model.forward(tape, batch);
  LossTerms terms = model.loss(tape, batch, out);
  BatchLoss loss{tape.scalar(terms.total), tape.scalar(terms.size), tape.scalar(terms.gate) + tape.scalar(terms.wire),
                 tape.scalar(terms.edge)};
  if (backward) {
    ad::Var root = terms.total;
    if (!include_edge_loss) root = tape.add(tape.add(terms.size, terms.gate), terms.wire);
    tape.backward(root);
  }
  return loss;
}

}  // namespace

BatchLoss accumulate_gradients(Model& model, const ModelBatch& batch, bool include_edge_loss) {
  return run(model, batch, true, include_edge_loss);
}

BatchLoss evaluate_loss(Model& model, const ModelBatch& batch) { return run(model, batch, false, true); }

Checkpoint train(const Dataset& dataset, const TrainConfig& config) {
  validate_config(config);
  if (dataset.records.empty()) throw Error("train: dataset is empty");
  int widest = 1;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& c = dataset.records[i].circuit;
    if (c.gateset_id != dataset.gateset) {
      std::ostringstream msg;
      msg << "train: record " << i << " uses gate set " << to_string(c.gateset_id) << " but the dataset declares "
          << to_string(dataset.gateset);
      throw Error(msg.str());
    }
    widest = std::max(widest, c.num_qubits);
  }
  int capacity = config.max_qubits > 0 ? config.max_qubits : widest;
  if (capacity < widest) throw Error("train: max_qubits is smaller than the widest training circuit");

  Checkpoint ck{Model(dataset.gateset, capacity, config.encoder, config.diffusion_steps, config.seed), config.seed,
                {}, {}};
  for (const auto& rec : dataset.records) ck.labels.push_back({rec.circuit.num_qubits, rec.label.re, rec.label.im});

  ad::AdamConfig adam_cfg;
  adam_cfg.learning_rate = config.learning_rate;
  ad::Adam opt_encoder(ck.model.encoder_params(), adam_cfg);
  ad::Adam opt_size(ck.model.size_params(), adam_cfg);
  ad::Adam opt_node(ck.model.node_params(), adam_cfg);
  ad::Adam opt_edge(ck.model.edge_params(), adam_cfg);
  ad::Adam* opts[] = {&opt_encoder, &opt_size, &opt_node, &opt_edge};

  Rng rng = derive_rng(config.seed, 0x7261696eULL);
  std::vector<std::size_t> order(dataset.records.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    stats.epoch = epoch;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<const DatasetRecord*> recs;
      for (std::size_t i = start; i < stop; ++i) recs.push_back(&dataset.records[order[i]]);
      ModelBatch batch = build_training_batch(ck.model, recs, rng, config.unknown_wire_rate);
      for (auto* o : opts) o->zero_grad();
      BatchLoss loss = accumulate_gradients(ck.model, batch);
      if (!std::isfinite(loss.total)) {
        std::ostringstream msg;
        msg << "train: non-finite loss at epoch " << epoch << " batch " << start / config.batch_size
            << " (size=" << loss.size << " node=" << loss.node << " edge=" << loss.edge << ")";
        throw Error(msg.str());
      }
      for (auto* o : opts) o->step();
      double w = static_cast<double>(recs.size());
      stats.total += loss.total * w;
      stats.size += loss.size * w;
      stats.node += loss.node * w;
      stats.edge += loss.edge * w;
      seen += recs.size();
    }
    double inv = 1.0 / static_cast<double>(seen);
    stats.total *= inv;
    stats.size *= inv;
    stats.node *= inv;
    stats.edge *= inv;
    ck.history.push_back(stats);
    if (config.on_epoch) config.on_epoch(stats);
  }
  return ck;
}

}  // namespace qfusion
