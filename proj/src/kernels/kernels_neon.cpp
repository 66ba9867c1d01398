#include "smallball/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace smallball::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_neon(MatrixView X, const double* x, double* out) {
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = dot_neon(X.data + i * X.cols, x, X.cols);
}

void gemv_t_neon(MatrixView X, const double* r, double* out) {
  for (std::size_t j = 0; j < X.cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < X.rows; ++i) axpy_neon(r[i], X.data + i * X.cols, out, X.cols);
}

void soft_threshold_neon(const double* in, double t, double* out, std::size_t n) {
  const float64x2_t tv = vdupq_n_f64(t);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(in + i);
    const float64x2_t mag = vmaxq_f64(vsubq_f64(vabsq_f64(v), tv), zero);
    const uint64x2_t keep = vcgtq_f64(mag, zero);
    const float64x2_t neg = vnegq_f64(mag);
    const float64x2_t signed_mag = vbslq_f64(vcltq_f64(v, zero), neg, mag);
    vst1q_f64(out + i, vreinterpretq_f64_u64(vandq_u64(vreinterpretq_u64_f64(signed_mag), keep)));
  }
  for (; i < n; ++i) {
    const double mag = std::fabs(in[i]) - t;
    out[i] = mag > 0.0 ? std::copysign(mag, in[i]) : 0.0;
  }
}

double sum_abs_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(a + i)));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{Isa::Neon,  dot_neon,           axpy_neon,   gemv_neon,
                                 gemv_t_neon, soft_threshold_neon, sum_abs_neon};
  return &table;
}

}  // namespace smallball::kernels
