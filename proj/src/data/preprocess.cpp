#include "izf/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "izf/errors.hpp"

namespace izf::data {

ScalingStats fit_minmax(const ZslDataset& ds) {
  const auto rows = ds.indices(Split::train_seen);
  if (rows.empty()) throw ContractError("min-max scaling needs train_seen samples");
  ScalingStats stats;
  stats.min.assign(ds.d_v(), std::numeric_limits<double>::infinity());
  stats.max.assign(ds.d_v(), -std::numeric_limits<double>::infinity());
  for (auto r : rows) {
    auto x = ds.visual.row(r);
    for (std::size_t j = 0; j < x.size(); ++j) {
      stats.min[j] = std::min(stats.min[j], x[j]);
      stats.max[j] = std::max(stats.max[j], x[j]);
    }
  }
  return stats;
}

ZslDataset apply_minmax(const ZslDataset& ds, const ScalingStats& stats) {
  if (stats.min.size() != ds.d_v() || stats.max.size() != ds.d_v()) {
    throw DimensionError("scaling statistics width does not match the dataset");
  }
  ZslDataset out = ds;
  for (std::size_t i = 0; i < out.visual.rows; ++i) {
    auto x = out.visual.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double range = stats.max[j] - stats.min[j];
      x[j] = range > 0.0 ? (x[j] - stats.min[j]) / range : 0.0;
    }
  }
  return out;
}

std::pair<ZslDataset, ScalingStats> fit_apply_minmax(const ZslDataset& ds) {
  auto stats = fit_minmax(ds);
  return {apply_minmax(ds, stats), std::move(stats)};
}

ZslDataset pad_to_even(const ZslDataset& ds) {
  std::size_t width = ds.d_v();
  while (width % 2 != 0 || width <= ds.d_c()) ++width;
  if (width == ds.d_v()) return ds;
  ZslDataset out = ds;
  out.visual = Matrix(ds.visual.rows, width, 0.0);
  for (std::size_t i = 0; i < ds.visual.rows; ++i) {
    auto src = ds.visual.row(i);
    std::copy(src.begin(), src.end(), out.visual.row(i).begin());
  }
  out.pad_count = ds.pad_count + (width - ds.d_v());
  return out;
}

ZslDataset toy_generate(std::size_t n_per_class, std::uint64_t seed) {
  if (n_per_class == 0) throw ContractError("toy data needs at least one sample per class");
  ZslDataset ds;
  ds.class_names = {"A", "B", "C", "D"};
  ds.class_embeddings = Matrix(4, 2, {0, 1, 0, 0, 1, 0, 1, 1});
  ds.seen_classes = {0, 1, 2};
  ds.unseen_classes = {3};

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(kToyNoiseVariance));
  const std::size_t n_train = std::max<std::size_t>(1, (n_per_class * 4) / 5);
  ds.visual = Matrix(4 * n_per_class, 2);
  std::size_t row = 0;
  for (int cls = 0; cls < 4; ++cls) {
    auto c = ds.class_embeddings.row(static_cast<std::size_t>(cls));
    for (std::size_t k = 0; k < n_per_class; ++k, ++row) {
      for (std::size_t j = 0; j < 2; ++j) ds.visual(row, j) = 2.0 * c[j] - 1.0 + noise(rng);
      ds.labels.push_back(cls);
      if (cls == 3) {
        ds.split.push_back(Split::test_unseen);
      } else {
        ds.split.push_back(k < n_train ? Split::train_seen : Split::test_seen);
      }
    }
  }
  return pad_to_even(ds);
}

}  // namespace izf::data
