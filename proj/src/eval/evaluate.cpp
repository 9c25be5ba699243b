#include "izf/eval/evaluate.hpp"

#include <algorithm>

namespace izf::eval {

EvalOutcome evaluate_model(const flow::FlowModel& model, const data::ZslDataset& ds, Mode mode, Setting setting,
                           const EvalOptions& options) {
  std::vector<std::size_t> rows = ds.indices(data::Split::test_unseen);
  if (setting == Setting::gzsl) {
    auto seen = ds.indices(data::Split::test_seen);
    rows.insert(rows.end(), seen.begin(), seen.end());
    std::sort(rows.begin(), rows.end());
  }
  const auto queries = ds.features(rows);
  const auto classes = classify::label_space(ds, setting);

  std::vector<int> predicted;
  if (mode == Mode::nbc) {
    predicted = classify::classify_nbc(classify::make_prototypes(model, ds.class_embeddings, classes), queries);
  } else {
    auto train = classify::generate_training_set(model, ds.class_embeddings, ds.unseen_classes, options.per_class,
                                                 options.seed);
    if (setting == Setting::gzsl) {
      const auto seen_rows = ds.indices(data::Split::train_seen);
      train = classify::concat({ds.features(seen_rows), ds.labels_of(seen_rows)}, train);
    }
    auto softmax = options.softmax;
    softmax.seed = options.seed;
    predicted = classify::classify_softmax(classify::train_softmax(train, classes, softmax), queries);
  }

  EvalOutcome outcome;
  outcome.predictions.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    outcome.predictions.push_back({rows[i], ds.labels[rows[i]], predicted[i]});
  }
  outcome.report = build_report(ds, mode, setting, outcome.predictions);
  return outcome;
}

}  // namespace izf::eval
