#pragma once

#include "smallball/norms.hpp"

namespace smallball {

/// Entrywise sign(v_i) * max(|v_i| - t, 0).
Vector soft_threshold(const Vector& v, double t);

/// Proximal map of the sorted-l1 norm with weights w (nonincreasing, >= 0):
/// argmin_x 0.5 * ||x - v||^2 + sum_i w_i x#_i.
Vector prox_sorted_l1(const Vector& v, const Vector& w);

/// Singular-value soft thresholding of a flattened matrix parameter.
Param prox_nuclear(const RegNorm& norm, const Param& a, double t);

/// Proximal map of t * Psi for any of the three norms.
Param prox(const RegNorm& norm, const Param& v, double t);

struct ProxValue {
  Param x;
  double psi = 0.0;  // Psi(x), obtained as a by-product
};

/// prox() that also reports Psi of the result without a second factorization.
ProxValue prox_with_value(const RegNorm& norm, const Param& v, double t);

}  // namespace smallball
