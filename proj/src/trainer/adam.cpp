#include "izf/trainer/adam.hpp"

#include <cmath>

#include "izf/errors.hpp"

namespace izf::trainer {

AdamState::AdamState(const NamedParameters& params) {
  for (const auto& [name, t] : params) {
    m_.emplace_back(t.numel(), 0.0);
    v_.emplace_back(t.numel(), 0.0);
  }
}

void AdamState::step(const NamedParameters& params, const AdamSettings& settings) {
  if (params.size() != m_.size()) throw ContractError("Adam state does not match the parameter list");
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto [name, t] = params[p];
    if (t.numel() != m_[p].size()) throw ContractError("Adam buffer shape mismatch for " + name);
    if (!t.has_grad()) continue;
    auto g = t.mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError("non-finite gradient in " + name + "[" + std::to_string(i) + "]");
      }
    }
  }

  ++step_count_;
  const double b1 = settings.beta1, b2 = settings.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto t = params[p].second;
    if (!t.has_grad()) continue;
    auto g = t.mutable_grad();
    auto w = t.mutable_data();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= settings.learning_rate * m_hat / (std::sqrt(v_hat) + settings.eps);
    }
  }
}

double clip_grad_norm(const NamedParameters& params, double max_norm) {
  double sq = 0.0;
  for (auto [name, t] : params) {
    if (!t.has_grad()) continue;
    for (double g : t.mutable_grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto [name, t] : params) {
      if (!t.has_grad()) continue;
      for (auto& g : t.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

void zero_grad(const NamedParameters& params) {
  for (auto [name, t] : params) t.zero_grad();
}

}  // namespace izf::trainer
