#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "izf/data/dataset.hpp"
#include "izf/flow/flow_model.hpp"

namespace izf::classify {

using numcore::Matrix;

enum class Mode { nbc, softmax };
enum class Setting { czsl, gzsl };

std::string to_string(Mode mode);
std::string to_string(Setting setting);
Mode mode_from_string(const std::string& name);
Setting setting_from_string(const std::string& name);

// Candidate classes: unseen only for CZSL, seen and unseen for GZSL. Sorted.
std::vector<int> label_space(const data::ZslDataset& ds, Setting setting);

struct PrototypeSet {
  std::vector<int> labels;
  Matrix prototypes;  // row k is f^-1([c(labels[k]), 0])
};

// `class_embeddings` is indexed by class id.
PrototypeSet make_prototypes(const flow::FlowModel& model, const Matrix& class_embeddings,
                             const std::vector<int>& labels);

// Nearest prototype in Euclidean distance; equal distances go to the lower class id.
int classify_nbc(const PrototypeSet& protos, std::span<const double> query);
std::vector<int> classify_nbc(const PrototypeSet& protos, const Matrix& queries);

struct LabeledFeatures {
  Matrix features;
  std::vector<int> labels;
};

// per_class samples f^-1([c, z_f]) for each class id, z_f ~ N(0, I) drawn
// from a generator seeded with `seed`. With zero_latent every z_f is 0.
LabeledFeatures generate_training_set(const flow::FlowModel& model, const Matrix& class_embeddings,
                                      const std::vector<int>& class_ids, std::size_t per_class,
                                      std::uint64_t seed, bool zero_latent = false);

LabeledFeatures concat(const LabeledFeatures& a, const LabeledFeatures& b);

struct SoftmaxConfig {
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
};

struct SoftmaxClassifier {
  std::vector<int> labels;   // class id of each output row
  Matrix weight;             // n_classes x d_v
  std::vector<double> bias;  // n_classes

  std::vector<double> scores(std::span<const double> query) const;
};

// Mean softmax cross-entropy of the classifier on a labeled set.
double cross_entropy(const SoftmaxClassifier& clf, const LabeledFeatures& set);

// One linear layer trained with Adam on softmax cross-entropy. Every class in
// `classes` must occur in the training set.
SoftmaxClassifier train_softmax(const LabeledFeatures& train, const std::vector<int>& classes,
                                const SoftmaxConfig& config);

int classify_softmax(const SoftmaxClassifier& clf, std::span<const double> query);
std::vector<int> classify_softmax(const SoftmaxClassifier& clf, const Matrix& queries);

}  // namespace izf::classify
