#pragma once

// Dense inner-loop kernels used by the solver and the samplers.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The variant is
// picked once per process from the CPU features; setting SMALLBALL_SIMD=scalar
// in the environment pins the scalar path.

#include <cstddef>
#include <span>
#include <string_view>

namespace smallball::kernels {

enum class Isa { Scalar, Avx2, Neon };

/// Row-major dense matrix view; row i starts at data + i * cols.
struct MatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Function table for one instruction set.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = X * x
  void (*gemv)(MatrixView X, const double* x, double* out);
  // out = X^T * r
  void (*gemv_t)(MatrixView X, const double* r, double* out);
  void (*soft_threshold)(const double* in, double t, double* out, std::size_t n);
  double (*sum_abs)(const double* a, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the variant was not compiled for this target.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// Table selected for this process.
const KernelTable& active();
Isa active_isa();
std::string_view isa_name(Isa isa);

// Convenience wrappers over active().

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(MatrixView X, std::span<const double> x, std::span<double> out) {
  active().gemv(X, x.data(), out.data());
}

inline void gemv_t(MatrixView X, std::span<const double> r, std::span<double> out) {
  active().gemv_t(X, r.data(), out.data());
}

inline void soft_threshold(std::span<const double> in, double t, std::span<double> out) {
  active().soft_threshold(in.data(), t, out.data(), in.size());
}

inline double sum_abs(std::span<const double> a) {
  return active().sum_abs(a.data(), a.size());
}

}  // namespace smallball::kernels
