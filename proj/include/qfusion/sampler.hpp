#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qfusion/checkpoint.hpp"
#include "qfusion/dag.hpp"
#include "qfusion/simulator.hpp"

namespace qfusion {

/// WireHead: wires come from the node head. WireFree: wire predictions are
/// ignored; start-node wires carry a random qubit permutation and each new
/// node picks open frontier wires using the edge head.
enum class SamplingMode { WireFree, WireHead };

/// Constrained: a new node consumes the frontier edge of each of its wires.
/// Free: edge bits are denoised per candidate pair and accepted as-is.
enum class EdgeMode { Free, Constrained };

std::string_view to_string(SamplingMode mode);
std::string_view to_string(EdgeMode mode);
std::optional<SamplingMode> parse_sampling_mode(std::string_view text);
std::optional<EdgeMode> parse_edge_mode(std::string_view text);

struct SamplerConfig {
  SamplingMode mode = SamplingMode::WireHead;
  EdgeMode edge_mode = EdgeMode::Constrained;
  int max_layers = 64;
  /// 0 draws the width together with the conditioning label.
  int num_qubits = 0;
  /// Unset: draw (width, label) uniformly from the training labels.
  std::optional<CircuitLabel> fixed_label;
  std::uint64_t seed = 0;
};

/// Throws Error for WireFree with Free edges, or max_layers < 1.
void validate_config(const SamplerConfig& config);

struct SampledDag {
  CircuitDAG dag;
  bool truncated = false;
  CircuitLabel label;
  /// WireFree only: qubit assigned to each start-node slot.
  std::vector<int> permutation;
};

/// Throws Error when the config does not fit the checkpoint (width above the
/// model capacity, no training label of the requested width).
SampledDag sample_dag(const Checkpoint& checkpoint, const SamplerConfig& config, Rng& rng);

struct SampleItem {
  std::size_t index = 0;
  SampledDag sample;
  ValidationReport report;
  /// Present when the DAG is valid; parametric gates get uniform angles.
  std::optional<Circuit> circuit;
};

/// Item i uses the stream derive_rng(config.seed, i); items are generated in
/// parallel and returned in index order.
std::vector<SampleItem> sample_circuits(const Checkpoint& checkpoint, const SamplerConfig& config,
                                        std::size_t count);

/// Header `QFSAMPLES v1 gateset=<id> seed=<u64> mode=<m> edge_mode=<e>`, then
/// `index valid|invalid truncated dag circuit|-` per line.
void write_samples(const std::vector<SampleItem>& items, GateSetId gateset, const SamplerConfig& config,
                   std::ostream& out);
void save_samples(const std::vector<SampleItem>& items, GateSetId gateset, const SamplerConfig& config,
                  const std::string& path);

struct SampleFile {
  GateSetId gateset = GateSetId::HeronNp;
  std::uint64_t seed = 0;
  std::vector<SampleItem> items;
};

/// Re-validates every DAG. Throws FormatError naming the line.
SampleFile read_samples(std::istream& in);
SampleFile load_samples(const std::string& path);

}  // namespace qfusion
