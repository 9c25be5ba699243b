#include "izf/data/dataset.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "izf/errors.hpp"

namespace izf::data {

std::string to_string(Split split) {
  switch (split) {
    case Split::train_seen:
      return "train_seen";
    case Split::test_seen:
      return "test_seen";
    case Split::test_unseen:
      return "test_unseen";
  }
  return "?";
}

Split split_from_string(const std::string& name) {
  if (name == "train_seen") return Split::train_seen;
  if (name == "test_seen") return Split::test_seen;
  if (name == "test_unseen") return Split::test_unseen;
  throw ContractError("unknown split tag '" + name + "'");
}

std::vector<std::size_t> ZslDataset::indices(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == which) out.push_back(i);
  }
  return out;
}

Matrix ZslDataset::features(const std::vector<std::size_t>& rows) const {
  Matrix m(rows.size(), d_v());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = visual.row(rows[i]);
    std::copy(src.begin(), src.end(), m.row(i).begin());
  }
  return m;
}

std::vector<int> ZslDataset::labels_of(const std::vector<std::size_t>& rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(labels[r]);
  return out;
}

Matrix ZslDataset::embeddings_of(const std::vector<int>& class_ids) const {
  Matrix m(class_ids.size(), d_c());
  for (std::size_t i = 0; i < class_ids.size(); ++i) {
    auto src = class_embeddings.row(static_cast<std::size_t>(class_ids[i]));
    std::copy(src.begin(), src.end(), m.row(i).begin());
  }
  return m;
}

bool ZslDataset::is_seen(int class_id) const {
  return std::find(seen_classes.begin(), seen_classes.end(), class_id) != seen_classes.end();
}

bool ZslDataset::is_unseen(int class_id) const {
  return std::find(unseen_classes.begin(), unseen_classes.end(), class_id) != unseen_classes.end();
}

void validate(const ZslDataset& ds) {
  const auto n = ds.size();
  if (ds.visual.rows != n || ds.split.size() != n) {
    throw ContractError("dataset: features, labels and split tags disagree in length (" +
                        std::to_string(ds.visual.rows) + ", " + std::to_string(n) + ", " +
                        std::to_string(ds.split.size()) + ")");
  }
  if (ds.class_names.size() != ds.n_classes()) {
    throw ContractError("dataset: " + std::to_string(ds.class_names.size()) + " class names for " +
                        std::to_string(ds.n_classes()) + " embedding rows");
  }
  if (ds.seen_classes.empty()) throw ContractError("dataset: no seen classes");
  if (ds.unseen_classes.empty()) throw ContractError("dataset: no unseen classes");
  std::set<int> seen, unseen;
  for (int c : ds.seen_classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= ds.n_classes()) {
      throw ContractError("dataset: seen class id " + std::to_string(c) + " has no embedding");
    }
    if (!seen.insert(c).second) throw ContractError("dataset: seen class id " + std::to_string(c) + " repeated");
  }
  for (int c : ds.unseen_classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= ds.n_classes()) {
      throw ContractError("dataset: unseen class id " + std::to_string(c) + " has no embedding");
    }
    if (seen.contains(c)) throw ContractError("dataset: class id " + std::to_string(c) + " is both seen and unseen");
    if (!unseen.insert(c).second) {
      throw ContractError("dataset: unseen class id " + std::to_string(c) + " repeated");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int y = ds.labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= ds.n_classes()) {
      throw ContractError("dataset: sample " + std::to_string(i) + " has unknown label " + std::to_string(y));
    }
    const bool ok = ds.split[i] == Split::test_unseen ? unseen.contains(y) : seen.contains(y);
    if (!ok) {
      throw ContractError("dataset: sample " + std::to_string(i) + " tagged " + to_string(ds.split[i]) +
                          " has label " + std::to_string(y) + " from the wrong partition");
    }
  }
  if (ds.indices(Split::train_seen).empty()) throw ContractError("dataset: no train_seen samples");
}

void validate_model_ready(const ZslDataset& ds) {
  validate(ds);
  if (ds.d_v() % 2 != 0 || ds.d_v() <= ds.d_c()) {
    throw ContractError("dataset: d_v=" + std::to_string(ds.d_v()) + " must be even and exceed d_c=" +
                        std::to_string(ds.d_c()) + " (apply pad_to_even)");
  }
}

Matrix class_means(const ZslDataset& ds, const std::vector<int>& class_ids) {
  Matrix means(class_ids.size(), ds.d_v());
  std::vector<std::size_t> counts(class_ids.size(), 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.split[i] != Split::train_seen) continue;
    auto it = std::find(class_ids.begin(), class_ids.end(), ds.labels[i]);
    if (it == class_ids.end()) continue;
    const auto k = static_cast<std::size_t>(it - class_ids.begin());
    auto src = ds.visual.row(i);
    auto dst = means.row(k);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    ++counts[k];
  }
  for (std::size_t k = 0; k < class_ids.size(); ++k) {
    if (counts[k] == 0) {
      throw ContractError("class " + std::to_string(class_ids[k]) + " has no train_seen samples");
    }
    for (auto& v : means.row(k)) v /= static_cast<double>(counts[k]);
  }
  return means;
}

std::string summary(const ZslDataset& ds) {
  std::ostringstream os;
  os << "samples: " << ds.size() << " (train_seen " << ds.indices(Split::train_seen).size() << ", test_seen "
     << ds.indices(Split::test_seen).size() << ", test_unseen " << ds.indices(Split::test_unseen).size() << ")\n"
     << "classes: " << ds.n_classes() << " (seen " << ds.seen_classes.size() << ", unseen "
     << ds.unseen_classes.size() << ")\n"
     << "d_v: " << ds.d_v() << " (padding " << ds.pad_count << ")\n"
     << "d_c: " << ds.d_c() << "\n";
  return os.str();
}

}  // namespace izf::data
