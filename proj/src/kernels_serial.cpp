#include <algorithm>

#include "qfusion/kernels.hpp"

namespace qfusion::kernels::serial {

void apply_1q(std::span<Complex> amps, int target, const Mat2& u) {
  const std::size_t half = amps.size() / 2;
  const std::size_t stride = std::size_t{1} << target;
  for (std::size_t i = 0; i < half; ++i) {
    const std::size_t i0 = insert_zero_bit(i, target);
    const Complex a0 = amps[i0], a1 = amps[i0 + stride];
    amps[i0] = u[0] * a0 + u[1] * a1;
    amps[i0 + stride] = u[2] * a0 + u[3] * a1;
  }
}

void apply_2q(std::span<Complex> amps, int q0, int q1, const Mat4& u) {
  const std::size_t quarter = amps.size() / 4;
  const int lo = std::min(q0, q1), hi = std::max(q0, q1);
  const std::size_t s0 = std::size_t{1} << q0, s1 = std::size_t{1} << q1;
  for (std::size_t i = 0; i < quarter; ++i) {
    const std::size_t base = insert_zero_bit(insert_zero_bit(i, lo), hi);
    const std::size_t idx[4] = {base, base + s0, base + s1, base + s0 + s1};
    Complex in[4];
    for (int k = 0; k < 4; ++k) in[k] = amps[idx[k]];
    for (int r = 0; r < 4; ++r) {
      Complex acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += u[static_cast<std::size_t>(4 * r + c)] * in[c];
      amps[idx[r]] = acc;
    }
  }
}

void outer_product(std::span<const Complex> psi, std::span<Complex> rho) {
  const std::size_t dim = psi.size();
  for (std::size_t j = 0; j < dim; ++j) {
    const double a = psi[j].real(), b = psi[j].imag();
    for (std::size_t k = 0; k < dim; ++k) {
      const double c = psi[k].real(), d = psi[k].imag();
      rho[j * dim + k] = {a * c + b * d, b * c - a * d};
    }
  }
}

Complex sum(std::span<const Complex> values) {
  Complex acc = 0.0;
  for (const Complex& v : values) acc += v;
  return acc;
}

std::size_t count_above(std::span<const Complex> values, double tol) {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [tol](const Complex& v) { return std::abs(v) > tol; }));
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

}  // namespace qfusion::kernels::serial
