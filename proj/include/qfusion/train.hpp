#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qfusion/checkpoint.hpp"
#include "qfusion/dataset.hpp"

namespace qfusion {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int diffusion_steps = 32;
  /// Qubit capacity of the model; 0 takes the widest training circuit.
  int max_qubits = 0;
  /// Fraction of edge rows whose new-node wire token is hidden.
  double unknown_wire_rate = 0.25;
  EncoderConfig encoder;
  std::function<void(const EpochStats&)> on_epoch;
};

void validate_config(const TrainConfig& config);

/// One training row per layer of every record plus a terminating row, with
/// all corruption noise drawn from `rng` up front.
ModelBatch build_training_batch(const Model& model, std::span<const DatasetRecord* const> records, Rng& rng,
                                double unknown_wire_rate);

struct BatchLoss {
  double total = 0.0, size = 0.0, node = 0.0, edge = 0.0;
};

/// Forward + backward on `batch`; gradients are accumulated into the model
/// parameters (callers zero them first).
BatchLoss accumulate_gradients(Model& model, const ModelBatch& batch, bool include_edge_loss = true);

/// Loss only.
BatchLoss evaluate_loss(Model& model, const ModelBatch& batch);

/// Deterministic for a fixed dataset and config. Throws Error when the loss
/// becomes non-finite.
Checkpoint train(const Dataset& dataset, const TrainConfig& config);

}  // namespace qfusion
