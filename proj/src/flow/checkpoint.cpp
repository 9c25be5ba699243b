#include "izf/flow/checkpoint.hpp"

#include "izf/errors.hpp"
#include "izf/numcore/binary_io.hpp"

namespace izf::flow {

namespace {

constexpr std::string_view kMagic{"IZFFLOW\0", 8};

}  // namespace

std::vector<std::uint8_t> serialize(const FlowModel& model) {
  numcore::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(0);
  const auto& cfg = model.config();
  w.u64(cfg.d_v);
  w.u64(cfg.d_c);
  w.u64(cfg.n_blocks);
  w.f64(cfg.s_clamp);
  w.f64(cfg.leaky_slope);
  for (const auto& block : model.blocks()) {
    for (auto p : block.permutation.perm()) w.u64(p);
    NamedParameters params;
    block.coupling.append_parameters("", params);
    for (const auto& [name, t] : params) w.f64s(t.data());
  }
  return w.take();
}

FlowModel deserialize(std::span<const std::uint8_t> bytes) {
  numcore::ByteReader<LoadError> r(bytes, "checkpoint");
  if (r.bytes(kMagic.size()) != kMagic) throw LoadError("checkpoint: bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw LoadError("checkpoint: unsupported version " + std::to_string(version));
  }
  r.u32();
  FlowConfig cfg;
  cfg.d_v = r.u64();
  cfg.d_c = r.u64();
  cfg.n_blocks = r.u64();
  cfg.s_clamp = r.f64();
  cfg.leaky_slope = r.f64();
  try {
    validate_config(cfg);
  } catch (const ContractError& e) {
    throw LoadError(std::string("checkpoint: ") + e.what());
  }
  const std::size_t h = cfg.d_v / 2;
  const std::size_t per_block = 8 * cfg.d_v + 8 * 4 * (h * h + h);
  if (cfg.n_blocks > r.remaining() / per_block || r.remaining() != cfg.n_blocks * per_block) {
    throw LoadError("checkpoint: payload size does not match header");
  }

  std::vector<FlowBlock> blocks;
  for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
    std::vector<std::size_t> perm(cfg.d_v);
    for (auto& p : perm) p = r.u64();
    PermutationLayer permutation = [&] {
      try {
        return PermutationLayer(std::move(perm));
      } catch (const ContractError&) {
        throw LoadError("checkpoint: block " + std::to_string(b) + " holds an invalid permutation");
      }
    }();
    CouplingLayer coupling(cfg.d_v, cfg.s_clamp, cfg.leaky_slope);
    NamedParameters params;
    coupling.append_parameters("", params);
    for (auto& [name, t] : params) r.f64s(t.mutable_data());
    blocks.push_back({std::move(permutation), std::move(coupling)});
  }
  return FlowModel(cfg, std::move(blocks));
}

void save_checkpoint(const FlowModel& model, const std::filesystem::path& path) {
  numcore::write_file_bytes(path, serialize(model));
}

FlowModel load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw LoadError("checkpoint not found: " + path.string());
  return deserialize(numcore::read_file_bytes(path));
}

}  // namespace izf::flow
