// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "smallball/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace smallball::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_avx2(MatrixView X, const double* x, double* out) {
  // Four rows at a time share the loads of x.
  std::size_t i = 0;
  const std::size_t n = X.cols;
  for (; i + 4 <= X.rows; i += 4) {
    const double* r0 = X.data + i * n;
    const double* r1 = r0 + n;
    const double* r2 = r1 + n;
    const double* r3 = r2 + n;
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d xv = _mm256_loadu_pd(x + j);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + j), xv, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + j), xv, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + j), xv, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + j), xv, a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; j < n; ++j) {
      s0 += r0[j] * x[j];
      s1 += r1[j] * x[j];
      s2 += r2[j] * x[j];
      s3 += r3[j] * x[j];
    }
    out[i] = s0;
    out[i + 1] = s1;
    out[i + 2] = s2;
    out[i + 3] = s3;
  }
  for (; i < X.rows; ++i) out[i] = dot_avx2(X.data + i * n, x, n);
}

void gemv_t_avx2(MatrixView X, const double* r, double* out) {
  const std::size_t n = X.cols;
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= X.rows; i += 2) {
    const double* r0 = X.data + i * n;
    const double* r1 = r0 + n;
    const __m256d c0 = _mm256_set1_pd(r[i]);
    const __m256d c1 = _mm256_set1_pd(r[i + 1]);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d o = _mm256_loadu_pd(out + j);
      o = _mm256_fmadd_pd(c0, _mm256_loadu_pd(r0 + j), o);
      o = _mm256_fmadd_pd(c1, _mm256_loadu_pd(r1 + j), o);
      _mm256_storeu_pd(out + j, o);
    }
    for (; j < n; ++j) out[j] += r[i] * r0[j] + r[i + 1] * r1[j];
  }
  for (; i < X.rows; ++i) axpy_avx2(r[i], X.data + i * n, out, n);
}

void soft_threshold_avx2(const double* in, double t, double* out, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d tv = _mm256_set1_pd(t);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(in + i);
    const __m256d sign = _mm256_and_pd(v, sign_mask);
    const __m256d mag = _mm256_max_pd(_mm256_sub_pd(_mm256_andnot_pd(sign_mask, v), tv), zero);
    // max() leaves +0.0 where the entry was shrunk away; copy the sign only onto survivors.
    const __m256d keep = _mm256_cmp_pd(mag, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(_mm256_or_pd(mag, sign), keep));
  }
  for (; i < n; ++i) {
    const double mag = std::fabs(in[i]) - t;
    out[i] = mag > 0.0 ? std::copysign(mag, in[i]) : 0.0;
  }
}

double sum_abs_avx2(const double* a, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(a + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::Avx2,  dot_avx2,           axpy_avx2,   gemv_avx2,
                                 gemv_t_avx2, soft_threshold_avx2, sum_abs_avx2};
  return &table;
}

}  // namespace smallball::kernels
