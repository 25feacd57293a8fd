#include <algorithm>
#include <vector>

#include "qfusion/kernels.hpp"

namespace qfusion::kernels::omp {
namespace {

constexpr std::size_t kChunks = 64;

// Partial results per fixed chunk, combined in chunk order.
template <typename T, typename F>
T chunked_reduce(std::size_t n, F&& partial) {
  std::vector<T> parts(kChunks, T{});
  const std::size_t step = (n + kChunks - 1) / kChunks;
  const auto chunks = static_cast<long>(kChunks);
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (long c = 0; c < chunks; ++c) {
    const std::size_t lo = std::min(n, static_cast<std::size_t>(c) * step);
    const std::size_t hi = std::min(n, lo + step);
    parts[static_cast<std::size_t>(c)] = partial(lo, hi);
  }
  T acc{};
  for (const T& p : parts) acc += p;
  return acc;
}

}  // namespace

void apply_1q(std::span<Complex> amps, int target, const Mat2& u) {
  const auto half = static_cast<long>(amps.size() / 2);
  const std::size_t stride = std::size_t{1} << target;
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelThreshold)
  for (long i = 0; i < half; ++i) {
    const std::size_t i0 = insert_zero_bit(static_cast<std::size_t>(i), target);
    const Complex a0 = amps[i0], a1 = amps[i0 + stride];
    amps[i0] = u[0] * a0 + u[1] * a1;
    amps[i0 + stride] = u[2] * a0 + u[3] * a1;
  }
}

void apply_2q(std::span<Complex> amps, int q0, int q1, const Mat4& u) {
  const auto quarter = static_cast<long>(amps.size() / 4);
  const int lo = std::min(q0, q1), hi = std::max(q0, q1);
  const std::size_t s0 = std::size_t{1} << q0, s1 = std::size_t{1} << q1;
#pragma omp parallel for schedule(static) if (amps.size() >= kParallelThreshold)
  for (long i = 0; i < quarter; ++i) {
    const std::size_t base = insert_zero_bit(insert_zero_bit(static_cast<std::size_t>(i), lo), hi);
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
  const auto rows = static_cast<long>(dim);
#pragma omp parallel for schedule(static) if (dim * dim >= kParallelThreshold)
  for (long j = 0; j < rows; ++j) {
    const double a = psi[static_cast<std::size_t>(j)].real(), b = psi[static_cast<std::size_t>(j)].imag();
    const Complex* in = psi.data();
    Complex* row = rho.data() + static_cast<std::size_t>(j) * dim;
    for (std::size_t k = 0; k < dim; ++k) {
      const double c = in[k].real(), d = in[k].imag();
      row[k] = {a * c + b * d, b * c - a * d};
    }
  }
}

Complex sum(std::span<const Complex> values) {
  return chunked_reduce<Complex>(values.size(), [&](std::size_t lo, std::size_t hi) {
    Complex acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += values[i];
    return acc;
  });
}

std::size_t count_above(std::span<const Complex> values, double tol) {
  return chunked_reduce<std::size_t>(values.size(), [&](std::size_t lo, std::size_t hi) {
    std::size_t count = 0;
    for (std::size_t i = lo; i < hi; ++i) count += std::abs(values[i]) > tol ? 1 : 0;
    return count;
  });
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  return chunked_reduce<Complex>(a.size(), [&](std::size_t lo, std::size_t hi) {
    Complex acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += std::conj(a[i]) * b[i];
    return acc;
  });
}

}  // namespace qfusion::kernels::omp
