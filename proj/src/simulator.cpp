#include "qfusion/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>

#include "qfusion/error.hpp"
#include "qfusion/kernels.hpp"

namespace qfusion {

StateVector StateVector::zero(int num_qubits) {
  StateVector s;
  s.num_qubits = num_qubits;
  s.amplitudes.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
  s.amplitudes[0] = 1.0;
  return s;
}

double StateVector::norm_squared() const {
  double acc = 0.0;
  for (const Complex& a : amplitudes) acc += std::norm(a);
  return acc;
}

Complex DensityMatrix::trace() const {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) acc += (*this)(i, i);
  return acc;
}

void verify_gate_unitarity() {
  static std::once_flag once;
  std::call_once(once, [] {
    const double angles[] = {0.0, 0.3, 1.0, 3.14159, 5.5};
    for (GateSetId id : {GateSetId::Custom22, GateSetId::HeronNp, GateSetId::HeronP}) {
      for (const GateDefinition& def : gate_set(id).gates()) {
        for (double a : angles) {
          const std::vector<double> params(static_cast<std::size_t>(def.num_params), a);
          if (unitarity_error(def.unitary(params)) > 1e-12) {
            throw Error("gate " + def.name + " is not unitary");
          }
          if (def.num_params == 0) break;
        }
      }
    }
  });
}

void apply_gate(StateVector& state, const GateSet& gates, const GateInstance& gate) {
  const GateDefinition& def = gates[gate.gate_index];
  if (static_cast<int>(gate.params.size()) != def.num_params) {
    throw MissingParameterError("gate " + def.name + " has no bound parameter");
  }
  const GateMatrix u = def.unitary(gate.params);
  if (def.arity == 1) {
    kernels::Mat2 m;
    std::copy(u.m.begin(), u.m.end(), m.begin());
    kernels::omp::apply_1q(state.amplitudes, gate.wires[0], m);
  } else {
    kernels::Mat4 m;
    std::copy(u.m.begin(), u.m.end(), m.begin());
    kernels::omp::apply_2q(state.amplitudes, gate.wires[0], gate.wires[1], m);
  }
}

StateVector run_statevector(const Circuit& circuit, const SimulatorOptions& options) {
  verify_gate_unitarity();
  if (circuit.num_qubits > options.max_qubits) {
    throw QubitBoundError("circuit has " + std::to_string(circuit.num_qubits) + " qubits, cap is " +
                          std::to_string(options.max_qubits));
  }
  validate_circuit(circuit, options.max_qubits);
  StateVector state = StateVector::zero(circuit.num_qubits);
  const GateSet& gates = circuit.gateset();
  for (const GateInstance& g : circuit.gates) apply_gate(state, gates, g);
  return state;
}

DensityMatrix density_matrix(const StateVector& state) {
  DensityMatrix rho;
  rho.num_qubits = state.num_qubits;
  rho.entries.resize(state.amplitudes.size() * state.amplitudes.size());
  kernels::omp::outer_product(state.amplitudes, rho.entries);
  return rho;
}

DensityMatrix density_matrix(const Circuit& circuit, const SimulatorOptions& options) {
  return density_matrix(run_statevector(circuit, options));
}

CircuitLabel label(const DensityMatrix& rho) {
  const Complex s = kernels::omp::sum(rho.entries);
  return {s.real(), s.imag()};
}

CircuitLabel label(const Circuit& circuit, const SimulatorOptions& options) {
  return label(density_matrix(circuit, options));
}

bool is_meaningful(const DensityMatrix& rho, int threshold, double tol) {
  return kernels::omp::count_above(rho.entries, tol) >= static_cast<std::size_t>(std::max(threshold, 0));
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.amplitudes.size() != b.amplitudes.size()) {
    throw Error("fidelity: dimension mismatch (" + std::to_string(a.num_qubits) + " vs " +
                std::to_string(b.num_qubits) + " qubits)");
  }
  return std::clamp(std::norm(kernels::omp::inner(a.amplitudes, b.amplitudes)), 0.0, 1.0);
}

std::string format_matrix(const DensityMatrix& rho) {
  std::string out;
  char buf[96];
  for (std::size_t r = 0; r < rho.dim(); ++r) {
    for (std::size_t c = 0; c < rho.dim(); ++c) {
      const Complex v = rho(r, c);
      std::snprintf(buf, sizeof buf, "%s%.12g%+.12gi", c == 0 ? "" : " ", v.real(), v.imag());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace qfusion
