#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "izf/numcore/tensor.hpp"

namespace izf::data {

using numcore::Matrix;

enum class Split : std::uint8_t { train_seen, test_seen, test_unseen };

std::string to_string(Split split);
Split split_from_string(const std::string& name);

// Visual features with labels, per-class semantic embeddings and the
// seen/unseen partition. Class ids index the rows of class_embeddings.
struct ZslDataset {
  Matrix visual;                // n_samples x d_v
  std::vector<int> labels;      // n_samples
  std::vector<Split> split;     // n_samples
  Matrix class_embeddings;      // n_classes x d_c
  std::vector<std::string> class_names;
  std::vector<int> seen_classes;
  std::vector<int> unseen_classes;
  std::size_t pad_count = 0;    // zero columns appended by pad_to_even

  std::size_t size() const { return labels.size(); }
  std::size_t d_v() const { return visual.cols; }
  std::size_t d_c() const { return class_embeddings.cols; }
  std::size_t n_classes() const { return class_embeddings.rows; }

  std::vector<std::size_t> indices(Split which) const;
  Matrix features(const std::vector<std::size_t>& rows) const;
  std::vector<int> labels_of(const std::vector<std::size_t>& rows) const;
  Matrix embeddings_of(const std::vector<int>& class_ids) const;
  bool is_seen(int class_id) const;
  bool is_unseen(int class_id) const;

  bool operator==(const ZslDataset&) const = default;
};

// Structural invariants: label ranges, split/class consistency, disjoint
// class partitions. Throws ContractError naming the first offending record.
void validate(const ZslDataset& ds);

// Additionally requires d_v even and d_v > d_c.
void validate_model_ready(const ZslDataset& ds);

// Per-class means of train_seen features, one row per entry of class_ids.
Matrix class_means(const ZslDataset& ds, const std::vector<int>& class_ids);

std::string summary(const ZslDataset& ds);

}  // namespace izf::data
