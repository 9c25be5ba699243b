#pragma once

// Literal double-loop evaluation of the negated MMD estimator, written
// without the tensor library.

#include <cmath>
#include <vector>

#include "izf/numcore/tensor.hpp"

namespace izf::testing {

inline double im_kernel(const double* a, const double* b, std::size_t d) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < d; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return 2.0 * d / (2.0 * d + d2);
}

inline double gaussian_kernel(const double* a, const double* b, std::size_t d, double h) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < d; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-d2 / (2.0 * h * h));
}

template <class Kernel>
double negative_mmd_oracle(const numcore::Matrix& s, const numcore::Matrix& u, Kernel kernel) {
  const std::size_t n = s.rows, d = s.cols;
  double cross = 0.0, within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cross += kernel(&s.values[i * d], &u.values[j * d], d);
      if (i != j) {
        within += kernel(&s.values[i * d], &s.values[j * d], d);
        within += kernel(&u.values[i * d], &u.values[j * d], d);
      }
    }
  }
  const double nd = static_cast<double>(n);
  return 2.0 / (nd * nd) * cross - within / (nd * (nd - 1.0));
}

}  // namespace izf::testing
