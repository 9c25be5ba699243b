#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "izf/numcore/ops.hpp"
#include "izf/numcore/tensor.hpp"

namespace izf::flow {

using numcore::Tensor;

using NamedParameters = std::vector<std::pair<std::string, Tensor>>;

// fc -> leaky ReLU -> fc, all widths equal. Weights are stored (in x out) so
// that a batch of row vectors is transformed as x * W + b.
struct Mlp {
  Tensor w1, b1, w2, b2;

  static Mlp zeros(std::size_t width);
  Tensor apply(const Tensor& x, double slope) const;
  void append_parameters(const std::string& prefix, NamedParameters& out) const;
};

// Affine coupling: the first half passes through and conditions a scale and
// shift applied to the second half. The scale is bounded by
// s_clamp * tanh(s / s_clamp).
class CouplingLayer {
 public:
  struct Output {
    Tensor y;
    Tensor logdet;  // n x 1
  };

  CouplingLayer(std::size_t dim, double s_clamp, double leaky_slope);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias; the
  // output layers of both nets are multiplied by `output_init_scale`, so a
  // freshly created layer is close to the identity.
  void init_uniform(std::mt19937_64& rng, double output_init_scale);

  Output forward(const Tensor& x) const;
  Tensor inverse(const Tensor& z) const;
  Tensor clamped_scale(const Tensor& x_a) const;
  Tensor shift(const Tensor& x_a) const;

  std::size_t dim() const { return dim_; }
  std::size_t half() const { return dim_ / 2; }
  double s_clamp() const { return s_clamp_; }
  double leaky_slope() const { return slope_; }
  Mlp& s_net() { return s_net_; }
  Mlp& t_net() { return t_net_; }
  const Mlp& s_net() const { return s_net_; }
  const Mlp& t_net() const { return t_net_; }

  void append_parameters(const std::string& prefix, NamedParameters& out) const;

 private:
  void check_width(const Tensor& x, const char* what) const;

  std::size_t dim_;
  double s_clamp_;
  double slope_;
  Mlp s_net_;
  Mlp t_net_;
};

// Fixed reordering of feature columns.
class PermutationLayer {
 public:
  explicit PermutationLayer(std::vector<std::size_t> perm);
  static PermutationLayer random(std::size_t dim, std::mt19937_64& rng);
  static PermutationLayer identity(std::size_t dim);

  Tensor forward(const Tensor& x) const { return numcore::gather_cols(x, perm_); }
  Tensor inverse(const Tensor& z) const { return numcore::gather_cols(z, inverse_); }

  const std::vector<std::size_t>& perm() const { return perm_; }
  const std::vector<std::size_t>& inverse_perm() const { return inverse_; }

 private:
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> inverse_;
};

}  // namespace izf::flow
