#include "izf/classify/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "izf/errors.hpp"
#include "izf/numcore/autograd.hpp"
#include "izf/numcore/ops.hpp"
#include "izf/trainer/adam.hpp"

namespace izf::classify {

using numcore::Tensor;

std::string to_string(Mode mode) { return mode == Mode::nbc ? "nbc" : "softmax"; }
std::string to_string(Setting setting) { return setting == Setting::czsl ? "czsl" : "gzsl"; }

Mode mode_from_string(const std::string& name) {
  if (name == "nbc") return Mode::nbc;
  if (name == "softmax") return Mode::softmax;
  throw ConfigError("unknown mode '" + name + "' (expected nbc or softmax)");
}

Setting setting_from_string(const std::string& name) {
  if (name == "czsl") return Setting::czsl;
  if (name == "gzsl") return Setting::gzsl;
  throw ConfigError("unknown setting '" + name + "' (expected czsl or gzsl)");
}

std::vector<int> label_space(const data::ZslDataset& ds, Setting setting) {
  std::vector<int> out = ds.unseen_classes;
  if (setting == Setting::gzsl) out.insert(out.end(), ds.seen_classes.begin(), ds.seen_classes.end());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

Matrix embeddings_for(const Matrix& class_embeddings, const std::vector<int>& ids) {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= class_embeddings.rows) {
      throw ContractError("class id " + std::to_string(id) + " has no embedding");
    }
    rows.push_back(static_cast<std::size_t>(id));
  }
  return numcore::select_rows(class_embeddings, rows);
}

template <typename Predict>
std::vector<int> predict_rows(const Matrix& queries, Predict predict) {
  std::vector<int> out(queries.rows);
  for (std::size_t i = 0; i < queries.rows; ++i) out[i] = predict(queries.row(i));
  return out;
}

}  // namespace

PrototypeSet make_prototypes(const flow::FlowModel& model, const Matrix& class_embeddings,
                             const std::vector<int>& labels) {
  if (labels.empty()) throw ContractError("prototype set needs at least one class");
  numcore::NoGradGuard no_grad;
  const auto c = Tensor::from_matrix(embeddings_for(class_embeddings, labels));
  const auto z = Tensor::zeros({labels.size(), model.d_z()});
  return {labels, model.inverse(c, z).to_matrix()};
}

int classify_nbc(const PrototypeSet& protos, std::span<const double> query) {
  if (query.size() != protos.prototypes.cols) {
    throw DimensionError("query width " + std::to_string(query.size()) + " does not match prototypes of width " +
                         std::to_string(protos.prototypes.cols));
  }
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < protos.labels.size(); ++k) {
    auto p = protos.prototypes.row(k);
    double d = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      const double e = query[j] - p[j];
      d += e * e;
    }
    const int label = protos.labels[k];
    if (d < best_dist || (d == best_dist && label < best)) {
      best_dist = d;
      best = label;
    }
  }
  return best;
}

std::vector<int> classify_nbc(const PrototypeSet& protos, const Matrix& queries) {
  return predict_rows(queries, [&](auto q) { return classify_nbc(protos, q); });
}

LabeledFeatures generate_training_set(const flow::FlowModel& model, const Matrix& class_embeddings,
                                      const std::vector<int>& class_ids, std::size_t per_class,
                                      std::uint64_t seed, bool zero_latent) {
  if (per_class == 0) throw ContractError("per_class must be at least 1");
  std::vector<int> labels;
  labels.reserve(class_ids.size() * per_class);
  for (int id : class_ids) labels.insert(labels.end(), per_class, id);

  Matrix z(labels.size(), model.d_z(), 0.0);
  if (!zero_latent) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& x : z.values) x = gauss(rng);
  }
  numcore::NoGradGuard no_grad;
  const auto c = Tensor::from_matrix(embeddings_for(class_embeddings, labels));
  return {model.inverse(c, Tensor::from_matrix(z)).to_matrix(), std::move(labels)};
}

LabeledFeatures concat(const LabeledFeatures& a, const LabeledFeatures& b) {
  if (a.features.rows == 0) return b;
  if (b.features.rows == 0) return a;
  if (a.features.cols != b.features.cols) throw DimensionError("cannot stack feature sets of different widths");
  LabeledFeatures out = a;
  out.features.rows += b.features.rows;
  out.features.values.insert(out.features.values.end(), b.features.values.begin(), b.features.values.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

std::vector<double> SoftmaxClassifier::scores(std::span<const double> query) const {
  if (query.size() != weight.cols) {
    throw DimensionError("query width " + std::to_string(query.size()) + " does not match classifier width " +
                         std::to_string(weight.cols));
  }
  std::vector<double> out(bias);
  for (std::size_t k = 0; k < weight.rows; ++k) {
    auto w = weight.row(k);
    for (std::size_t j = 0; j < query.size(); ++j) out[k] += w[j] * query[j];
  }
  return out;
}

double cross_entropy(const SoftmaxClassifier& clf, const LabeledFeatures& set) {
  std::map<int, std::size_t> index;
  for (std::size_t k = 0; k < clf.labels.size(); ++k) index[clf.labels[k]] = k;
  double total = 0.0;
  for (std::size_t i = 0; i < set.features.rows; ++i) {
    auto s = clf.scores(set.features.row(i));
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double v : s) z += std::exp(v - m);
    total += m + std::log(z) - s[index.at(set.labels[i])];
  }
  return total / static_cast<double>(set.features.rows);
}

SoftmaxClassifier train_softmax(const LabeledFeatures& train, const std::vector<int>& classes,
                                const SoftmaxConfig& config) {
  if (classes.empty()) throw ContractError("softmax classifier needs at least one class");
  if (train.features.rows != train.labels.size()) throw ContractError("feature and label counts differ");
  if (config.batch_size == 0) throw ConfigError("softmax batch_size must be positive");

  std::map<int, std::size_t> index;
  for (std::size_t k = 0; k < classes.size(); ++k) index[classes[k]] = k;
  std::vector<std::size_t> counts(classes.size(), 0);
  std::vector<std::size_t> target(train.labels.size());
  for (std::size_t i = 0; i < train.labels.size(); ++i) {
    auto it = index.find(train.labels[i]);
    if (it == index.end()) {
      throw ContractError("training label " + std::to_string(train.labels[i]) + " is outside the label space");
    }
    target[i] = it->second;
    ++counts[it->second];
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    if (counts[k] == 0) throw ContractError("class " + std::to_string(classes[k]) + " is absent from the training set");
  }

  const std::size_t d = train.features.cols;
  // stored transposed (d x k) so that logits = x W + b needs no transpose per batch
  auto w = Tensor::zeros({d, classes.size()}, true);
  auto b = Tensor::zeros({1, classes.size()}, true);
  const trainer::NamedParameters params{{"softmax.weight", w}, {"softmax.bias", b}};
  trainer::AdamState adam(params);
  trainer::AdamSettings settings;
  settings.learning_rate = config.learning_rate;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      std::span<const std::size_t> rows(order.data() + start, len);
      std::vector<std::size_t> y(len);
      for (std::size_t i = 0; i < len; ++i) y[i] = target[rows[i]];
      const auto x = Tensor::from_matrix(numcore::select_rows(train.features, rows));
      const auto loss = numcore::softmax_cross_entropy(numcore::add(numcore::matmul(x, w), b), y);
      trainer::zero_grad(params);
      numcore::backward(loss);
      adam.step(params, settings);
    }
  }

  SoftmaxClassifier clf;
  clf.labels = classes;
  clf.weight = numcore::transpose(w.detach()).to_matrix();
  clf.bias = std::vector<double>(b.data().begin(), b.data().end());
  return clf;
}

int classify_softmax(const SoftmaxClassifier& clf, std::span<const double> query) {
  const auto s = clf.scores(query);
  std::size_t best = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k] > s[best] || (s[k] == s[best] && clf.labels[k] < clf.labels[best])) best = k;
  }
  return clf.labels[best];
}

std::vector<int> classify_softmax(const SoftmaxClassifier& clf, const Matrix& queries) {
  return predict_rows(queries, [&](auto q) { return classify_softmax(clf, q); });
}

}  // namespace izf::classify
