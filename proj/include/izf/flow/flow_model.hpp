#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "izf/flow/coupling.hpp"

namespace izf::flow {

struct FlowConfig {
  std::size_t d_v = 0;
  std::size_t d_c = 0;
  std::size_t n_blocks = 5;
  double s_clamp = 2.0;
  double leaky_slope = numcore::kDefaultLeakySlope;
  double output_init_scale = 0.01;
};

// Forward-pass output split into the semantic factor (first d_c columns)
// and the non-semantic remainder.
struct LatentCode {
  Tensor c_hat;  // n x d_c
  Tensor z_f;    // n x (d_v - d_c)

  Tensor joined() const { return numcore::concat_cols(c_hat, z_f); }
  static LatentCode split(const Tensor& z, std::size_t d_c);
};

struct FlowForward {
  LatentCode latent;
  Tensor logdet;  // n x 1
};

struct FlowBlock {
  PermutationLayer permutation;
  CouplingLayer coupling;
};

class FlowModel {
 public:
  FlowModel(FlowConfig config, std::vector<FlowBlock> blocks);

  // Independent random permutation per block and uniform weight init, all
  // drawn from `seed`.
  static FlowModel create(const FlowConfig& config, std::uint64_t seed);
  // Same permutations as create(config, seed) but every weight zero.
  static FlowModel zeros(const FlowConfig& config, std::uint64_t seed);

  FlowForward forward(const Tensor& v) const;
  Tensor inverse(const LatentCode& latent) const;
  Tensor inverse(const Tensor& c, const Tensor& z_f) const;

  // log p(v) under a standard normal prior on the full latent (n x 1).
  Tensor log_prob(const Tensor& v) const;

  const FlowConfig& config() const { return config_; }
  std::size_t d_v() const { return config_.d_v; }
  std::size_t d_c() const { return config_.d_c; }
  std::size_t d_z() const { return config_.d_v - config_.d_c; }
  const std::vector<FlowBlock>& blocks() const { return blocks_; }
  std::vector<FlowBlock>& blocks() { return blocks_; }

  // Stable order: block index, then s_net/t_net, then w1, b1, w2, b2.
  NamedParameters named_parameters() const;
  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad() const;

 private:
  FlowConfig config_;
  std::vector<FlowBlock> blocks_;
};

void validate_config(const FlowConfig& config);

}  // namespace izf::flow
