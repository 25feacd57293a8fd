#pragma once

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

#include "qfusion/circuit.hpp"
#include "qfusion/random.hpp"
#include "qfusion/simulator.hpp"

namespace qfusion {

struct DatasetSpec {
  GateSetId gateset = GateSetId::HeronNp;
  std::vector<int> qubit_counts{2};
  int gates_per_circuit = 8;
  std::size_t num_samples = 6000;
  double param_lo = 0.0;
  double param_hi = 2.0 * std::numbers::pi;
  std::uint64_t seed = 0;
};

/// Throws Error when qubit counts fall outside [1, max_qubits], the gate
/// count is negative, the parameter range is empty, or a single-qubit
/// circuit is requested from a gate set without single-qubit gates.
void validate_spec(const DatasetSpec& spec, int max_qubits = default_max_qubits());

struct DatasetRecord {
  Circuit circuit;
  CircuitLabel label;  // rounded to 12 significant digits

  bool operator==(const DatasetRecord&) const = default;
};

struct Dataset {
  GateSetId gateset = GateSetId::HeronNp;
  std::uint64_t seed = 0;
  std::vector<DatasetRecord> records;
};

/// Qubit count uniform over spec.qubit_counts; each gate uniform over the
/// gates that fit (two-qubit gates only when n >= 2); wires uniform without
/// replacement; parameters uniform in [param_lo, param_hi) on the 9-decimal
/// grid.
Circuit generate_random_circuit(const DatasetSpec& spec, Rng& rng);

/// Record `index` of the dataset described by `spec`; independent of every
/// other index.
DatasetRecord generate_record(const DatasetSpec& spec, std::size_t index);

/// Generates all records in parallel, in index order.
Dataset build_dataset(const DatasetSpec& spec);

/// Header `QFDS v1 gateset=<id> seed=<u64>`, then `label_re label_im circuit`
/// per line.
void write_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset(const Dataset& dataset, const std::string& path);

/// Revalidates every circuit and recomputes the label of every 100th record.
/// Throws FormatError naming the offending line.
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::string& path);

double round_label_component(double value);

}  // namespace qfusion
