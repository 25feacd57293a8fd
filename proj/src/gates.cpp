#include "qfusion/gates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qfusion {
namespace {

constexpr Complex kI{0.0, 1.0};
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

GateMatrix mat2(Complex a, Complex b, Complex c, Complex d) { return {2, {a, b, c, d}}; }

GateMatrix identity(int dim) {
  GateMatrix g{dim, std::vector<Complex>(static_cast<std::size_t>(dim * dim))};
  for (int i = 0; i < dim; ++i) g(i, i) = 1.0;
  return g;
}

// Control on the first wire (bit 0), target on the second (bit 1).
GateMatrix controlled(const GateMatrix& u) {
  GateMatrix g = identity(4);
  for (int t_out = 0; t_out < 2; ++t_out) {
    for (int t_in = 0; t_in < 2; ++t_in) {
      g(1 + 2 * t_out, 1 + 2 * t_in) = u(t_out, t_in);
    }
  }
  return g;
}

// Same gate with the roles of its two wires exchanged.
GateMatrix swap_roles(const GateMatrix& u) {
  auto flip = [](int i) { return ((i & 1) << 1) | (i >> 1); };
  GateMatrix g{4, std::vector<Complex>(16)};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) g(flip(r), flip(c)) = u(r, c);
  }
  return g;
}

GateMatrix x_gate() { return mat2(0, 1, 1, 0); }
GateMatrix y_gate() { return mat2(0, -kI, kI, 0); }
GateMatrix z_gate() { return mat2(1, 0, 0, -1); }
GateMatrix h_gate() { return mat2(kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2); }
GateMatrix s_gate() { return mat2(1, 0, 0, kI); }
GateMatrix sdg_gate() { return mat2(1, 0, 0, -kI); }
GateMatrix t_gate() { return mat2(1, 0, 0, std::polar(1.0, std::numbers::pi / 4)); }
GateMatrix tdg_gate() { return mat2(1, 0, 0, std::polar(1.0, -std::numbers::pi / 4)); }
GateMatrix sx_gate() {
  return mat2(Complex(0.5, 0.5), Complex(0.5, -0.5), Complex(0.5, -0.5), Complex(0.5, 0.5));
}
GateMatrix sxdg_gate() { return adjoint(sx_gate()); }
GateMatrix rz_gate(double theta) {
  return mat2(std::polar(1.0, -theta / 2), 0, 0, std::polar(1.0, theta / 2));
}

GateMatrix swap_gate() {
  GateMatrix g{4, std::vector<Complex>(16)};
  g(0, 0) = g(1, 2) = g(2, 1) = g(3, 3) = 1.0;
  return g;
}

GateMatrix iswap_gate() {
  GateMatrix g{4, std::vector<Complex>(16)};
  g(0, 0) = g(3, 3) = 1.0;
  g(1, 2) = g(2, 1) = kI;
  return g;
}

GateMatrix ecr_gate() {
  const double s = kInvSqrt2;
  return {4,
          {0, s, 0, kI * s,    //
           s, 0, -kI * s, 0,   //
           0, kI * s, 0, s,    //
           -kI * s, 0, s, 0}};
}

GateMatrix dcx_gate() {
  // CX(first -> second), then CX(second -> first).
  const GateMatrix cx = controlled(x_gate());
  return matmul(swap_roles(cx), cx);
}

GateDefinition fixed(std::string name, std::string qasm, int arity, GateMatrix m) {
  return {std::move(name), std::move(qasm), arity, 0,
          [m = std::move(m)](std::span<const double>) { return m; }};
}

std::vector<GateDefinition> custom22() {
  return {
      fixed("X", "x", 1, x_gate()),
      fixed("Y", "y", 1, y_gate()),
      fixed("Z", "z", 1, z_gate()),
      fixed("H", "h", 1, h_gate()),
      fixed("S", "s", 1, s_gate()),
      fixed("T", "t", 1, t_gate()),
      fixed("ID", "id", 1, identity(2)),
      fixed("SXDG", "sxdg", 1, sxdg_gate()),
      fixed("SDG", "sdg", 1, sdg_gate()),
      fixed("SX", "sx", 1, sx_gate()),
      fixed("TDG", "tdg", 1, tdg_gate()),
      fixed("CX", "cx", 2, controlled(x_gate())),
      fixed("CY", "cy", 2, controlled(y_gate())),
      fixed("CZ", "cz", 2, controlled(z_gate())),
      fixed("SWAP", "swap", 2, swap_gate()),
      fixed("DCX", "dcx", 2, dcx_gate()),
      fixed("ISWAP", "iswap", 2, iswap_gate()),
      fixed("CSDG", "csdg", 2, controlled(sdg_gate())),
      fixed("ECR", "ecr", 2, ecr_gate()),
      fixed("CH", "ch", 2, controlled(h_gate())),
      fixed("CS", "cs", 2, controlled(s_gate())),
      fixed("CSX", "csx", 2, controlled(sx_gate())),
  };
}

std::vector<GateDefinition> heron(bool parametric) {
  std::vector<GateDefinition> gates{
      fixed("X", "x", 1, x_gate()),
      fixed("SX", "sx", 1, sx_gate()),
      fixed("ID", "id", 1, identity(2)),
      fixed("CZ", "cz", 2, controlled(z_gate())),
  };
  if (parametric) {
    gates.push_back({"RZ", "rz", 1, 1, [](std::span<const double> p) { return rz_gate(p[0]); }});
  }
  return gates;
}

}  // namespace

GateMatrix matmul(const GateMatrix& a, const GateMatrix& b) {
  GateMatrix out{a.dim, std::vector<Complex>(a.m.size())};
  for (int i = 0; i < a.dim; ++i) {
    for (int k = 0; k < a.dim; ++k) {
      for (int j = 0; j < a.dim; ++j) out(i, j) += a(i, k) * b(k, j);
    }
  }
  return out;
}

GateMatrix adjoint(const GateMatrix& a) {
  GateMatrix out{a.dim, std::vector<Complex>(a.m.size())};
  for (int i = 0; i < a.dim; ++i) {
    for (int j = 0; j < a.dim; ++j) out(i, j) = std::conj(a(j, i));
  }
  return out;
}

double unitarity_error(const GateMatrix& u) {
  const GateMatrix p = matmul(u, adjoint(u));
  double err = 0.0;
  for (int i = 0; i < u.dim; ++i) {
    for (int j = 0; j < u.dim; ++j) err = std::max(err, std::abs(p(i, j) - (i == j ? 1.0 : 0.0)));
  }
  return err;
}

std::string_view to_string(GateSetId id) {
  switch (id) {
    case GateSetId::Custom22: return "custom22";
    case GateSetId::HeronNp: return "heron_np";
    case GateSetId::HeronP: return "heron_p";
  }
  return "unknown";
}

std::optional<GateSetId> parse_gateset_id(std::string_view text) {
  for (GateSetId id : {GateSetId::Custom22, GateSetId::HeronNp, GateSetId::HeronP}) {
    if (text == to_string(id)) return id;
  }
  return std::nullopt;
}

GateSet::GateSet(GateSetId id, std::vector<GateDefinition> gates) : id_(id), gates_(std::move(gates)) {}

std::optional<std::size_t> GateSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    if (gates_[i].name == name) return i;
  }
  return std::nullopt;
}

bool GateSet::has_single_qubit_gates() const {
  return std::any_of(gates_.begin(), gates_.end(), [](const auto& g) { return g.arity == 1; });
}

bool GateSet::has_parametric_gates() const {
  return std::any_of(gates_.begin(), gates_.end(), [](const auto& g) { return g.num_params > 0; });
}

const GateSet& gate_set(GateSetId id) {
  static const GateSet custom{GateSetId::Custom22, custom22()};
  static const GateSet heron_np{GateSetId::HeronNp, heron(false)};
  static const GateSet heron_p{GateSetId::HeronP, heron(true)};
  switch (id) {
    case GateSetId::Custom22: return custom;
    case GateSetId::HeronNp: return heron_np;
    case GateSetId::HeronP: return heron_p;
  }
  return custom;
}

}  // namespace qfusion
