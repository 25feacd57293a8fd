#pragma once

#include <complex>
#include <string>
#include <vector>

#include "qfusion/circuit.hpp"

namespace qfusion {

struct StateVector {
  int num_qubits = 0;
  std::vector<Complex> amplitudes;

  static StateVector zero(int num_qubits);
  double norm_squared() const;
};

/// Row-major 2^n x 2^n matrix.
struct DensityMatrix {
  int num_qubits = 0;
  std::vector<Complex> entries;

  std::size_t dim() const { return std::size_t{1} << num_qubits; }
  Complex operator()(std::size_t row, std::size_t col) const { return entries[row * dim() + col]; }
  Complex trace() const;
};

/// Complex sum of all density-matrix entries.
struct CircuitLabel {
  double re = 0.0;
  double im = 0.0;

  bool operator==(const CircuitLabel&) const = default;
};

struct SimulatorOptions {
  int max_qubits = default_max_qubits();
};

/// Checks U U^dagger = I (1e-12) for every gate of every gate set, once per
/// process. Throws Error naming the first offender.
void verify_gate_unitarity();

void apply_gate(StateVector& state, const GateSet& gates, const GateInstance& gate);

/// Applies the circuit's gates in order to |0...0>. Qubit 0 is the least
/// significant bit of the basis index. Throws QubitBoundError or
/// MissingParameterError.
StateVector run_statevector(const Circuit& circuit, const SimulatorOptions& options = {});

DensityMatrix density_matrix(const StateVector& state);
DensityMatrix density_matrix(const Circuit& circuit, const SimulatorOptions& options = {});

CircuitLabel label(const DensityMatrix& rho);
CircuitLabel label(const Circuit& circuit, const SimulatorOptions& options = {});

/// True iff at least `threshold` entries have magnitude above `tol`.
bool is_meaningful(const DensityMatrix& rho, int threshold = 10, double tol = 1e-8);

/// |<a|b>|^2 clamped to [0, 1]. Throws Error on dimension mismatch.
double fidelity(const StateVector& a, const StateVector& b);

/// One row per line, entries as `re+imi` separated by spaces.
std::string format_matrix(const DensityMatrix& rho);

}  // namespace qfusion
