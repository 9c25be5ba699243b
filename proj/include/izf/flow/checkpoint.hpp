#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "izf/flow/flow_model.hpp"

namespace izf::flow {

// Binary layout, all integers and doubles little-endian:
//   "IZFFLOW\0"  u32 version  u32 reserved
//   u64 d_v  u64 d_c  u64 n_blocks  f64 s_clamp  f64 leaky_slope
//   per block: u64 perm[d_v], then s_net {w1,b1,w2,b2}, t_net {w1,b1,w2,b2}
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize(const FlowModel& model);
FlowModel deserialize(std::span<const std::uint8_t> bytes);

void save_checkpoint(const FlowModel& model, const std::filesystem::path& path);
FlowModel load_checkpoint(const std::filesystem::path& path);

}  // namespace izf::flow
