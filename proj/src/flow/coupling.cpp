#include "izf/flow/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "izf/errors.hpp"

namespace izf::flow {

using namespace numcore;

Mlp Mlp::zeros(std::size_t width) {
  return Mlp{Tensor::zeros({width, width}, true), Tensor::zeros({1, width}, true),
             Tensor::zeros({width, width}, true), Tensor::zeros({1, width}, true)};
}

Tensor Mlp::apply(const Tensor& x, double slope) const {
  auto hidden = leaky_relu(add(matmul(x, w1), b1), slope);
  return add(matmul(hidden, w2), b2);
}

void Mlp::append_parameters(const std::string& prefix, NamedParameters& out) const {
  out.emplace_back(prefix + ".w1", w1);
  out.emplace_back(prefix + ".b1", b1);
  out.emplace_back(prefix + ".w2", w2);
  out.emplace_back(prefix + ".b2", b2);
}

CouplingLayer::CouplingLayer(std::size_t dim, double s_clamp, double leaky_slope)
    : dim_(dim), s_clamp_(s_clamp), slope_(leaky_slope), s_net_(Mlp::zeros(dim / 2)), t_net_(Mlp::zeros(dim / 2)) {
  if (dim == 0 || dim % 2 != 0) {
    throw ContractError("coupling layer width must be even and positive, got " + std::to_string(dim));
  }
  if (!(s_clamp > 0.0)) throw ContractError("s_clamp must be positive");
}

void CouplingLayer::init_uniform(std::mt19937_64& rng, double output_init_scale) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(half()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto fill = [&](Tensor& t, double factor) {
    for (auto& v : t.mutable_data()) v = dist(rng) * factor;
  };
  fill(s_net_.w1, 1.0);
  fill(s_net_.b1, 1.0);
  fill(s_net_.w2, output_init_scale);
  fill(s_net_.b2, output_init_scale);
  fill(t_net_.w1, 1.0);
  fill(t_net_.b1, 1.0);
  fill(t_net_.w2, output_init_scale);
  fill(t_net_.b2, output_init_scale);
}

void CouplingLayer::check_width(const Tensor& x, const char* what) const {
  if (x.rank() != 2 || x.cols() != dim_) {
    throw DimensionError(std::string("coupling ") + what + ": expected width " + std::to_string(dim_) +
                         ", got shape " + shape_str(x.shape()));
  }
}

Tensor CouplingLayer::clamped_scale(const Tensor& x_a) const {
  return scale(numcore::tanh(scale(s_net_.apply(x_a, slope_), 1.0 / s_clamp_)), s_clamp_);
}

Tensor CouplingLayer::shift(const Tensor& x_a) const { return t_net_.apply(x_a, slope_); }

CouplingLayer::Output CouplingLayer::forward(const Tensor& x) const {
  check_width(x, "forward");
  auto x_a = slice_cols(x, 0, half());
  auto x_b = slice_cols(x, half(), dim_);
  auto s = clamped_scale(x_a);
  auto y_b = add(mul(x_b, numcore::exp(s)), shift(x_a));
  return {concat_cols(x_a, y_b), sum(s, 1)};
}

Tensor CouplingLayer::inverse(const Tensor& z) const {
  check_width(z, "inverse");
  auto z_a = slice_cols(z, 0, half());
  auto z_b = slice_cols(z, half(), dim_);
  auto s = clamped_scale(z_a);
  auto x_b = mul(sub(z_b, shift(z_a)), numcore::exp(neg(s)));
  return concat_cols(z_a, x_b);
}

void CouplingLayer::append_parameters(const std::string& prefix, NamedParameters& out) const {
  s_net_.append_parameters(prefix + ".s_net", out);
  t_net_.append_parameters(prefix + ".t_net", out);
}

PermutationLayer::PermutationLayer(std::vector<std::size_t> perm) : perm_(std::move(perm)), inverse_(perm_.size()) {
  std::vector<bool> seen(perm_.size(), false);
  for (std::size_t i = 0; i < perm_.size(); ++i) {
    if (perm_[i] >= perm_.size() || seen[perm_[i]]) throw ContractError("not a permutation");
    seen[perm_[i]] = true;
    inverse_[perm_[i]] = i;
  }
}

PermutationLayer PermutationLayer::random(std::size_t dim, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return PermutationLayer(std::move(perm));
}

PermutationLayer PermutationLayer::identity(std::size_t dim) {
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), 0);
  return PermutationLayer(std::move(perm));
}

}  // namespace izf::flow
