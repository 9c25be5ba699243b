#include "izf/flow/flow_model.hpp"

#include <cmath>
#include <numbers>

#include "izf/errors.hpp"

namespace izf::flow {

using namespace numcore;

void validate_config(const FlowConfig& config) {
  if (config.d_v == 0 || config.d_v % 2 != 0) {
    throw ContractError("flow width d_v must be even and positive, got " + std::to_string(config.d_v));
  }
  if (config.d_c == 0 || config.d_c >= config.d_v) {
    throw ContractError("semantic width d_c must satisfy 0 < d_c < d_v (d_c=" + std::to_string(config.d_c) +
                        ", d_v=" + std::to_string(config.d_v) + ")");
  }
  if (config.n_blocks == 0) throw ContractError("flow needs at least one block");
  if (!(config.s_clamp > 0.0)) throw ContractError("s_clamp must be positive");
  if (!(config.leaky_slope > 0.0 && config.leaky_slope < 1.0)) throw ContractError("leaky slope must lie in (0, 1)");
}

LatentCode LatentCode::split(const Tensor& z, std::size_t d_c) {
  return {slice_cols(z, 0, d_c), slice_cols(z, d_c, z.cols())};
}

FlowModel::FlowModel(FlowConfig config, std::vector<FlowBlock> blocks)
    : config_(config), blocks_(std::move(blocks)) {
  validate_config(config_);
  if (blocks_.size() != config_.n_blocks) throw ContractError("block count does not match n_blocks");
  for (const auto& b : blocks_) {
    if (b.permutation.perm().size() != config_.d_v || b.coupling.dim() != config_.d_v) {
      throw ContractError("block width does not match d_v");
    }
  }
}

namespace {

std::vector<FlowBlock> make_blocks(const FlowConfig& config, std::mt19937_64& rng) {
  std::vector<PermutationLayer> perms;
  perms.reserve(config.n_blocks);
  for (std::size_t i = 0; i < config.n_blocks; ++i) perms.push_back(PermutationLayer::random(config.d_v, rng));
  std::vector<FlowBlock> blocks;
  blocks.reserve(config.n_blocks);
  for (auto& p : perms) {
    blocks.push_back({std::move(p), CouplingLayer(config.d_v, config.s_clamp, config.leaky_slope)});
  }
  return blocks;
}

}  // namespace

FlowModel FlowModel::create(const FlowConfig& config, std::uint64_t seed) {
  validate_config(config);
  std::mt19937_64 rng(seed);
  auto blocks = make_blocks(config, rng);
  for (auto& b : blocks) b.coupling.init_uniform(rng, config.output_init_scale);
  return FlowModel(config, std::move(blocks));
}

FlowModel FlowModel::zeros(const FlowConfig& config, std::uint64_t seed) {
  validate_config(config);
  std::mt19937_64 rng(seed);
  return FlowModel(config, make_blocks(config, rng));
}

FlowForward FlowModel::forward(const Tensor& v) const {
  if (v.rank() != 2 || v.cols() != config_.d_v) {
    throw DimensionError("flow forward: expected width " + std::to_string(config_.d_v) + ", got shape " +
                         shape_str(v.shape()));
  }
  Tensor x = v;
  Tensor logdet;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    try {
      auto out = blocks_[i].coupling.forward(blocks_[i].permutation.forward(x));
      x = out.y;
      logdet = i == 0 ? out.logdet : add(logdet, out.logdet);
    } catch (const DimensionError&) {
      throw;
    } catch (const NumericError& e) {
      throw NumericError("coupling block " + std::to_string(i) + " (forward): " + e.what());
    }
  }
  return {LatentCode::split(x, config_.d_c), logdet};
}

Tensor FlowModel::inverse(const Tensor& c, const Tensor& z_f) const {
  if (c.rank() != 2 || z_f.rank() != 2 || c.cols() != config_.d_c || z_f.cols() != d_z() ||
      c.rows() != z_f.rows()) {
    throw DimensionError("flow inverse: latent widths must be (" + std::to_string(config_.d_c) + ", " +
                         std::to_string(d_z()) + "), got " + shape_str(c.shape()) + " and " +
                         shape_str(z_f.shape()));
  }
  Tensor z = concat_cols(c, z_f);
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    try {
      z = blocks_[i].permutation.inverse(blocks_[i].coupling.inverse(z));
    } catch (const DimensionError&) {
      throw;
    } catch (const NumericError& e) {
      throw NumericError("coupling block " + std::to_string(i) + " (inverse): " + e.what());
    }
  }
  return z;
}

Tensor FlowModel::inverse(const LatentCode& latent) const { return inverse(latent.c_hat, latent.z_f); }

Tensor FlowModel::log_prob(const Tensor& v) const {
  auto fwd = forward(v);
  const double norm = -0.5 * static_cast<double>(config_.d_v) * std::log(2.0 * std::numbers::pi);
  auto z = fwd.latent.joined();
  return add(add_scalar(scale(sum(square(z), 1), -0.5), norm), fwd.logdet);
}

NamedParameters FlowModel::named_parameters() const {
  NamedParameters out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].coupling.append_parameters("block" + std::to_string(i), out);
  }
  return out;
}

std::vector<Tensor> FlowModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

std::size_t FlowModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : parameters()) n += t.numel();
  return n;
}

void FlowModel::zero_grad() const {
  for (auto t : parameters()) t.zero_grad();
}

}  // namespace izf::flow
