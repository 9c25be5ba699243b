#pragma once

#include <cstdint>
#include <vector>

#include "izf/flow/coupling.hpp"

namespace izf::trainer {

using flow::NamedParameters;

struct AdamSettings {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moment buffers, one per parameter tensor, in the order
// of the parameter list the state was built from.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const NamedParameters& params);

  std::uint64_t step_count() const { return step_count_; }
  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

  // Bias-corrected Adam update in place using each parameter's accumulated
  // gradient. All gradients are checked before anything is written.
  void step(const NamedParameters& params, const AdamSettings& settings);

 private:
  std::uint64_t step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

inline void adam_step(AdamState& state, const NamedParameters& params, const AdamSettings& settings) {
  state.step(params, settings);
}

// Rescales all gradients so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(const NamedParameters& params, double max_norm);

void zero_grad(const NamedParameters& params);

}  // namespace izf::trainer
