#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "izf/data/dataset.hpp"

namespace izf::data {

struct ScalingStats {
  std::vector<double> min;
  std::vector<double> max;
};

// Statistics come from train_seen rows only.
ScalingStats fit_minmax(const ZslDataset& ds);
// x' = (x - min) / (max - min); constant dimensions map to 0. No clipping.
ZslDataset apply_minmax(const ZslDataset& ds, const ScalingStats& stats);
std::pair<ZslDataset, ScalingStats> fit_apply_minmax(const ZslDataset& ds);

// Appends zero columns until d_v is even and d_v > d_c.
ZslDataset pad_to_even(const ZslDataset& ds);

// Four classes in 2-D: seen A=[0,1], B=[0,0], C=[1,0], unseen D=[1,1].
// Samples are 2c - 1 + eps with eps ~ N(0, I/3), padded with two zero
// columns. Seen samples split 80/20 into train/test per class.
ZslDataset toy_generate(std::size_t n_per_class, std::uint64_t seed);

inline constexpr double kToyNoiseVariance = 1.0 / 3.0;

}  // namespace izf::data
