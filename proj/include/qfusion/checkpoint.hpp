#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qfusion/model.hpp"

namespace qfusion {

struct EpochStats {
  int epoch = 0;
  double total = 0.0;
  double size = 0.0;
  double node = 0.0;
  double edge = 0.0;

  bool operator==(const EpochStats&) const = default;
};

/// Label and width of one training circuit; sampling draws conditioning
/// pairs from this list.
struct TrainingLabel {
  int num_qubits = 1;
  double re = 0.0;
  double im = 0.0;

  bool operator==(const TrainingLabel&) const = default;
};

struct Checkpoint {
  Model model;
  std::uint64_t seed = 0;
  std::vector<EpochStats> history;
  std::vector<TrainingLabel> labels;
};

/// Binary layout: magic "QFCK", u32 version, gate set, encoder config, qubit
/// capacity, keep probabilities, training metadata, then named tensors. All
/// numbers little-endian; doubles stored bit for bit.
void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out);
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
/// Throws FormatError on a bad magic, version, truncated file, or tensor
/// shape mismatch.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace qfusion
