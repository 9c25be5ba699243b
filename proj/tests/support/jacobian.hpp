#pragma once

// Finite-difference Jacobian and a partial-pivoting determinant, used as an
// oracle for analytic log-determinants.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace izf::testing {

using VecFn = std::function<std::vector<double>(const std::vector<double>&)>;

inline std::vector<std::vector<double>> numeric_jacobian(const VecFn& f, const std::vector<double>& x,
                                                         double step = 1e-6) {
  const std::size_t n = x.size();
  const std::size_t m = f(x).size();
  std::vector<std::vector<double>> jac(m, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    auto up = x, down = x;
    up[j] += step;
    down[j] -= step;
    auto fu = f(up), fd = f(down);
    for (std::size_t i = 0; i < m; ++i) jac[i][j] = (fu[i] - fd[i]) / (2.0 * step);
  }
  return jac;
}

inline double determinant(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) return 0.0;
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return det;
}

}  // namespace izf::testing
