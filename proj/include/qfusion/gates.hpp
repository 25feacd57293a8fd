#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qfusion {

using Complex = std::complex<double>;

/// Dense row-major unitary on 1 or 2 qubits. For two-qubit gates acting on
/// wires (a, b) the local basis index is bit(a) + 2 * bit(b), so the first
/// wire is the least significant bit.
struct GateMatrix {
  int dim = 2;
  std::vector<Complex> m;

  Complex operator()(int row, int col) const { return m[static_cast<std::size_t>(row * dim + col)]; }
  Complex& operator()(int row, int col) { return m[static_cast<std::size_t>(row * dim + col)]; }
};

GateMatrix matmul(const GateMatrix& a, const GateMatrix& b);
GateMatrix adjoint(const GateMatrix& a);

struct GateDefinition {
  std::string name;       // upper case, e.g. "CX"
  std::string qasm_name;  // lower case OpenQASM 2 identifier
  int arity = 1;
  int num_params = 0;
  std::function<GateMatrix(std::span<const double>)> unitary;
};

enum class GateSetId { Custom22, HeronNp, HeronP };

std::string_view to_string(GateSetId id);
std::optional<GateSetId> parse_gateset_id(std::string_view text);

class GateSet {
 public:
  GateSet(GateSetId id, std::vector<GateDefinition> gates);

  GateSetId id() const { return id_; }
  std::size_t size() const { return gates_.size(); }
  const GateDefinition& operator[](std::size_t i) const { return gates_[i]; }
  const std::vector<GateDefinition>& gates() const { return gates_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  bool has_single_qubit_gates() const;
  bool has_parametric_gates() const;

 private:
  GateSetId id_;
  std::vector<GateDefinition> gates_;
};

/// Process-wide immutable gate sets. Gate order is the categorical vocabulary
/// used by the diffusion model and must never change.
const GateSet& gate_set(GateSetId id);

/// Max |U U^dagger - I| over all entries.
double unitarity_error(const GateMatrix& u);

}  // namespace qfusion
