#include "smallball/kernels.hpp"

#include <cmath>

namespace smallball::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(MatrixView X, const double* x, double* out) {
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = dot_scalar(X.data + i * X.cols, x, X.cols);
}

void gemv_t_scalar(MatrixView X, const double* r, double* out) {
  for (std::size_t j = 0; j < X.cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < X.rows; ++i) axpy_scalar(r[i], X.data + i * X.cols, out, X.cols);
}

void soft_threshold_scalar(const double* in, double t, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::fabs(in[i]) - t;
    out[i] = mag > 0.0 ? std::copysign(mag, in[i]) : 0.0;
  }
}

double sum_abs_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i]);
  return acc;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar,  dot_scalar,           axpy_scalar,   gemv_scalar,
                                 gemv_t_scalar, soft_threshold_scalar, sum_abs_scalar};
  return table;
}

}  // namespace smallball::kernels
