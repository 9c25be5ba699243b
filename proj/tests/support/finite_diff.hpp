#pragma once

// Central finite-difference gradient oracle. It only reads losses as plain
// numbers, so it stays independent of the reverse-mode engine it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "izf/numcore/autograd.hpp"
#include "izf/numcore/tensor.hpp"

namespace izf::testing {

struct GradCheck {
  double max_rel_err = 0.0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t checked = 0;
};

inline double rel_err(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// `loss_fn` must rebuild the loss from the current contents of `params`.
inline GradCheck check_gradients(std::vector<numcore::Tensor> params,
                                 const std::function<numcore::Tensor()>& loss_fn, double step = 1e-5,
                                 double floor = 1e-6) {
  for (auto& p : params) p.zero_grad();
  numcore::backward(loss_fn());
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params) analytic.push_back(p.grad());

  GradCheck result;
  numcore::NoGradGuard guard;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto data = params[t].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double orig = data[i];
      data[i] = orig + step;
      const double up = loss_fn().item();
      data[i] = orig - step;
      const double down = loss_fn().item();
      data[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double err = rel_err(analytic[t][i], numeric, floor);
      if (err > result.max_rel_err || result.checked == 0) {
        result.max_rel_err = err;
        result.analytic_at_worst = analytic[t][i];
        result.numeric_at_worst = numeric;
      }
      ++result.checked;
    }
  }
  return result;
}

}  // namespace izf::testing
