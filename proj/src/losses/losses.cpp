#include "izf/losses/losses.hpp"

#include <cmath>
#include <numbers>

#include "izf/errors.hpp"
#include "izf/numcore/ops.hpp"

namespace izf::losses {

using namespace numcore;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_finite(const Tensor& t, const char* what) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + " is not finite");
  }
}

}  // namespace

std::string to_string(KernelKind kind) {
  return kind == KernelKind::gaussian ? "gaussian" : "inverse_multiquadratic";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "inverse_multiquadratic" || name == "im") return KernelKind::inverse_multiquadratic;
  if (name == "gaussian") return KernelKind::gaussian;
  throw ConfigError("unknown kernel '" + name + "' (expected inverse_multiquadratic or gaussian)");
}

void validate(const KernelSpec& spec) {
  if (spec.kind == KernelKind::gaussian && spec.bandwidth && !(*spec.bandwidth > 0.0)) {
    throw ContractError("gaussian kernel bandwidth must be positive");
  }
}

Tensor kernel_eval(const KernelSpec& spec, const Tensor& a, const Tensor& b) {
  validate(spec);
  auto d2 = sqdist(a, b);
  const double d_v = static_cast<double>(a.cols());
  if (spec.kind == KernelKind::inverse_multiquadratic) {
    return div(Tensor::scalar(2.0 * d_v), add_scalar(d2, 2.0 * d_v));
  }
  const double h = spec.bandwidth.value_or(std::sqrt(d_v));
  return exp(scale(d2, -1.0 / (2.0 * h * h)));
}

Tensor conditional_log_likelihood(const flow::FlowModel& model, const Tensor& v, const Tensor& c) {
  if (c.rank() != 2 || c.cols() != model.d_c() || c.rows() != v.rows()) {
    throw DimensionError("conditional likelihood: embeddings must be " + std::to_string(v.rows()) + " x " +
                         std::to_string(model.d_c()) + ", got " + shape_str(c.shape()));
  }
  auto fwd = model.forward(v);
  const double dc = static_cast<double>(model.d_c());
  const double dz = static_cast<double>(model.d_z());
  auto log_c = add_scalar(scale(sum(square(sub(fwd.latent.c_hat, c)), 1), -0.5), -0.5 * dc * kLog2Pi);
  auto log_z = add_scalar(scale(sum(square(fwd.latent.z_f), 1), -0.5), -0.5 * dz * kLog2Pi);
  return add(add(log_c, log_z), fwd.logdet);
}

Tensor loss_flow(const flow::FlowModel& model, const Tensor& v_batch, const Tensor& c_batch) {
  auto loss = neg(mean(conditional_log_likelihood(model, v_batch, c_batch)));
  require_finite(loss, "flow loss");
  return loss;
}

Tensor loss_centralize(const flow::FlowModel& model, const Tensor& class_embeddings, const Tensor& class_means) {
  if (class_embeddings.rank() != 2 || class_means.rank() != 2 || class_embeddings.rows() != class_means.rows()) {
    throw ContractError("centralizing loss: one class mean per class embedding required (" +
                        shape_str(class_embeddings.shape()) + " vs " + shape_str(class_means.shape()) + ")");
  }
  if (class_embeddings.rows() == 0) throw ContractError("centralizing loss: no classes");
  auto prototypes = model.inverse(class_embeddings, Tensor::zeros({class_embeddings.rows(), model.d_z()}));
  auto loss = mean(sum(square(sub(prototypes, class_means)), 1));
  require_finite(loss, "centralizing loss");
  return loss;
}

Tensor loss_immd(const KernelSpec& spec, const Tensor& v_seen, const Tensor& v_gen_unseen) {
  if (v_seen.rank() != 2 || v_gen_unseen.rank() != 2 || v_seen.rows() != v_gen_unseen.rows()) {
    throw ContractError("MMD loss: both batches need the same number of rows (" + shape_str(v_seen.shape()) +
                        " vs " + shape_str(v_gen_unseen.shape()) + ")");
  }
  const std::size_t n = v_seen.rows();
  if (n < 2) throw ContractError("MMD loss needs at least two samples per batch");
  const double nd = static_cast<double>(n);

  Matrix mask(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) mask(i, i) = 0.0;
  auto off_diag = Tensor::from_matrix(mask);

  auto cross = sum(kernel_eval(spec, v_seen, v_gen_unseen));
  auto within_s = sum(mul(kernel_eval(spec, v_seen, v_seen), off_diag));
  auto within_u = sum(mul(kernel_eval(spec, v_gen_unseen, v_gen_unseen), off_diag));
  auto loss = sub(scale(cross, 2.0 / (nd * nd)), scale(add(within_s, within_u), 1.0 / (nd * (nd - 1.0))));
  require_finite(loss, "MMD loss");
  return loss;
}

Tensor loss_total(const LossWeights& weights, const Tensor& l_flow, const Tensor& l_c, const Tensor& l_immd) {
  if (l_flow.numel() != 1 || l_c.numel() != 1 || l_immd.numel() != 1) {
    throw ContractError("loss_total expects scalar terms");
  }
  return add(add(scale(l_flow, weights.lambda1), scale(l_c, weights.lambda2)), scale(l_immd, weights.lambda3));
}

}  // namespace izf::losses
