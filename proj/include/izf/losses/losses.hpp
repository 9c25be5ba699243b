#pragma once

#include <optional>
#include <string>

#include "izf/flow/flow_model.hpp"
#include "izf/numcore/tensor.hpp"

namespace izf::losses {

using numcore::Tensor;

struct LossWeights {
  double lambda1 = 2.0;  // flow likelihood
  double lambda2 = 1.0;  // prototype centralizing
  double lambda3 = 0.1;  // negative MMD

  bool operator==(const LossWeights&) const = default;
};

enum class KernelKind { inverse_multiquadratic, gaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::inverse_multiquadratic;
  // Gaussian only; when unset the bandwidth is sqrt(d_v).
  std::optional<double> bandwidth;

  static KernelSpec inverse_multiquadratic() { return {}; }
  static KernelSpec gaussian(std::optional<double> bandwidth = std::nullopt) {
    return {KernelKind::gaussian, bandwidth};
  }
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);
void validate(const KernelSpec& spec);

// Pairwise kernel matrix between the rows of a and b.
//   inverse multiquadratic: 2d / (2d + |a - b|^2)
//   gaussian:               exp(-|a - b|^2 / (2 h^2))
Tensor kernel_eval(const KernelSpec& spec, const Tensor& a, const Tensor& b);

// Per-sample log p(v | y) = log N(c_hat | c(y), I) + log N(z_f | 0, I) + logdet,
// normalization constants included (n x 1).
Tensor conditional_log_likelihood(const flow::FlowModel& model, const Tensor& v, const Tensor& c);

// Batch mean of -log p(v | y); row i of c_batch is the embedding of sample i.
Tensor loss_flow(const flow::FlowModel& model, const Tensor& v_batch, const Tensor& c_batch);

// Mean over classes of |f^-1([c_k, 0]) - mean_k|^2.
Tensor loss_centralize(const flow::FlowModel& model, const Tensor& class_embeddings, const Tensor& class_means);

// Negated MMD between real seen and generated unseen batches of equal size n:
//   2/n^2 sum_ij k(s_i, u_j) - 1/(n(n-1)) sum_{i != j} [k(s_i, s_j) + k(u_i, u_j)]
Tensor loss_immd(const KernelSpec& spec, const Tensor& v_seen, const Tensor& v_gen_unseen);

Tensor loss_total(const LossWeights& weights, const Tensor& l_flow, const Tensor& l_c, const Tensor& l_immd);

}  // namespace izf::losses
