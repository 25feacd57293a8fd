#include "qfusion/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qfusion/error.hpp"

namespace qfusion {
namespace {

constexpr double kLabelTolerance = 1e-6;
constexpr std::size_t kChecksumStride = 100;

std::string format_label(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

double parse_double(std::string_view text, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(line, "bad label value '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

double round_label_component(double value) { return std::strtod(format_label(value).c_str(), nullptr); }

void validate_spec(const DatasetSpec& spec, int max_qubits) {
  if (spec.qubit_counts.empty()) throw Error("dataset spec: no qubit counts");
  for (int n : spec.qubit_counts) {
    if (n < 1 || n > max_qubits) {
      throw Error("dataset spec: qubit count " + std::to_string(n) + " outside [1, " + std::to_string(max_qubits) + "]");
    }
    if (n == 1 && spec.gates_per_circuit > 0 && !gate_set(spec.gateset).has_single_qubit_gates()) {
      throw Error("dataset spec: gate set has no single-qubit gates for 1-qubit circuits");
    }
  }
  if (spec.gates_per_circuit < 0) throw Error("dataset spec: negative gate count");
  if (!(spec.param_hi > spec.param_lo)) throw Error("dataset spec: empty parameter range");
}

Circuit generate_random_circuit(const DatasetSpec& spec, Rng& rng) {
  const GateSet& gates = gate_set(spec.gateset);
  Circuit circuit;
  circuit.gateset_id = spec.gateset;
  circuit.num_qubits = spec.qubit_counts[uniform_index(rng, spec.qubit_counts.size())];

  std::vector<std::size_t> allowed;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (gates[i].arity <= circuit.num_qubits) allowed.push_back(i);
  }
  if (allowed.empty() && spec.gates_per_circuit > 0) {
    throw Error("no gate in " + std::string(to_string(spec.gateset)) + " fits " +
                std::to_string(circuit.num_qubits) + " qubit(s)");
  }
  for (int k = 0; k < spec.gates_per_circuit; ++k) {
    GateInstance g;
    g.gate_index = allowed[uniform_index(rng, allowed.size())];
    const GateDefinition& def = gates[g.gate_index];
    std::vector<int> pool(static_cast<std::size_t>(circuit.num_qubits));
    for (int w = 0; w < circuit.num_qubits; ++w) pool[static_cast<std::size_t>(w)] = w;
    for (int a = 0; a < def.arity; ++a) {
      const std::size_t pick = uniform_index(rng, pool.size());
      g.wires.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<long>(pick));
    }
    for (int p = 0; p < def.num_params; ++p) {
      g.params.push_back(round_param(spec.param_lo + (spec.param_hi - spec.param_lo) * uniform01(rng)));
    }
    circuit.gates.push_back(std::move(g));
  }
  return circuit;
}

DatasetRecord generate_record(const DatasetSpec& spec, std::size_t index) {
  Rng rng = derive_rng(spec.seed, index);
  DatasetRecord record;
  record.circuit = generate_random_circuit(spec, rng);
  const CircuitLabel exact = label(record.circuit);
  record.label = {round_label_component(exact.re), round_label_component(exact.im)};
  return record;
}

Dataset build_dataset(const DatasetSpec& spec) {
  validate_spec(spec);
  Dataset dataset;
  dataset.gateset = spec.gateset;
  dataset.seed = spec.seed;
  dataset.records.resize(spec.num_samples);
  const auto count = static_cast<long>(spec.num_samples);
  std::string failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < count; ++i) {
    try {
      dataset.records[static_cast<std::size_t>(i)] = generate_record(spec, static_cast<std::size_t>(i));
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw Error("dataset generation failed: " + failure);
  return dataset;
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  out << "QFDS v1 gateset=" << to_string(dataset.gateset) << " seed=" << dataset.seed << '\n';
  for (const DatasetRecord& r : dataset.records) {
    out << format_label(r.label.re) << ' ' << format_label(r.label.im) << ' ' << serialize_circuit(r.circuit) << '\n';
  }
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_dataset(dataset, out);
  if (!out) throw Error("failed writing " + path);
}

Dataset read_dataset(std::istream& in) {
  Dataset dataset;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(1, "empty dataset file");
  {
    std::istringstream header(line);
    std::string magic, version, gs, seed;
    header >> magic >> version >> gs >> seed;
    std::string rest;
    if (magic != "QFDS" || version != "v1" || gs.rfind("gateset=", 0) != 0 || seed.rfind("seed=", 0) != 0 ||
        (header >> rest)) {
      throw FormatError(1, "expected header 'QFDS v1 gateset=<id> seed=<u64>'");
    }
    const auto id = parse_gateset_id(gs.substr(8));
    if (!id) throw FormatError(1, "unknown gate set '" + gs.substr(8) + "'");
    dataset.gateset = *id;
    const std::string seed_text = seed.substr(5);
    const auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), dataset.seed);
    if (seed_text.empty() || ec != std::errc{} || ptr != seed_text.data() + seed_text.size()) {
      throw FormatError(1, "bad seed '" + seed_text + "'");
    }
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw FormatError(line_no, "empty record line");
    const std::size_t s1 = line.find(' ');
    const std::size_t s2 = s1 == std::string::npos ? s1 : line.find(' ', s1 + 1);
    if (s2 == std::string::npos) throw FormatError(line_no, "expected 'label_re label_im circuit'");
    DatasetRecord record;
    record.label.re = parse_double(std::string_view(line).substr(0, s1), line_no);
    record.label.im = parse_double(std::string_view(line).substr(s1 + 1, s2 - s1 - 1), line_no);
    try {
      record.circuit = parse_circuit(std::string_view(line).substr(s2 + 1), dataset.gateset);
    } catch (const Error& e) {
      throw FormatError(line_no, e.what());
    }
    if (!params_bound(record.circuit)) throw FormatError(line_no, "unbound gate parameter");
    const std::size_t index = dataset.records.size();
    if (index % kChecksumStride == 0) {
      const CircuitLabel fresh = label(record.circuit);
      if (std::abs(fresh.re - record.label.re) > kLabelTolerance ||
          std::abs(fresh.im - record.label.im) > kLabelTolerance) {
        throw FormatError(line_no, "label mismatch: stored (" + format_label(record.label.re) + ", " +
                                       format_label(record.label.im) + "), recomputed (" + format_label(fresh.re) +
                                       ", " + format_label(fresh.im) + ")");
      }
    }
    dataset.records.push_back(std::move(record));
  }
  return dataset;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_dataset(in);
}

}  // namespace qfusion
