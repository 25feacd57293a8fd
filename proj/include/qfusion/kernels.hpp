#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>

namespace qfusion::kernels {

using Complex = std::complex<double>;
using Mat2 = std::array<Complex, 4>;   // row-major
using Mat4 = std::array<Complex, 16>;  // row-major, local index bit(q0) + 2*bit(q1)

// Two implementations with identical contracts. `serial` is the reference
// used by the tests; `omp` is what the simulator calls. Reductions in `omp`
// use a fixed chunking so results do not depend on the thread count.

namespace serial {
void apply_1q(std::span<Complex> amps, int target, const Mat2& u);
void apply_2q(std::span<Complex> amps, int q0, int q1, const Mat4& u);
/// rho = psi psi^dagger, row-major dim x dim.
void outer_product(std::span<const Complex> psi, std::span<Complex> rho);
Complex sum(std::span<const Complex> values);
std::size_t count_above(std::span<const Complex> values, double tol);
/// <a|b>
Complex inner(std::span<const Complex> a, std::span<const Complex> b);
}  // namespace serial

namespace omp {
void apply_1q(std::span<Complex> amps, int target, const Mat2& u);
void apply_2q(std::span<Complex> amps, int q0, int q1, const Mat4& u);
void outer_product(std::span<const Complex> psi, std::span<Complex> rho);
Complex sum(std::span<const Complex> values);
std::size_t count_above(std::span<const Complex> values, double tol);
Complex inner(std::span<const Complex> a, std::span<const Complex> b);
}  // namespace omp

/// Below this many elements the omp kernels stay on one thread.
inline constexpr std::size_t kParallelThreshold = 1u << 12;

inline std::size_t insert_zero_bit(std::size_t i, int bit) {
  const std::size_t low = i & ((std::size_t{1} << bit) - 1);
  return ((i >> bit) << (bit + 1)) | low;
}

}  // namespace qfusion::kernels
