#pragma once

#include <cstdint>
#include <vector>

#include "izf/classify/classify.hpp"
#include "izf/eval/metrics.hpp"

namespace izf::eval {

struct EvalOptions {
  std::size_t per_class = 400;  // synthetic samples per unseen class for the softmax classifier
  std::uint64_t seed = 0;
  classify::SoftmaxConfig softmax;
};

struct EvalOutcome {
  EvalReport report;
  std::vector<Prediction> predictions;
};

// Classifies test_unseen (CZSL) or test_seen and test_unseen (GZSL) samples.
// The softmax classifier trains on synthetic unseen features, plus the real
// train_seen features in GZSL.
EvalOutcome evaluate_model(const flow::FlowModel& model, const data::ZslDataset& ds, Mode mode, Setting setting,
                           const EvalOptions& options = {});

}  // namespace izf::eval
