#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "izf/data/dataset.hpp"
#include "izf/flow/flow_model.hpp"
#include "izf/losses/losses.hpp"
#include "izf/trainer/adam.hpp"

namespace izf::trainer {

enum class Ablation { none, no_lc, no_immd, no_lc_no_immd, positive_mmd };

std::string to_string(Ablation ablation);
Ablation ablation_from_string(const std::string& name);

struct TrainConfig {
  losses::LossWeights weights;
  losses::KernelSpec kernel;
  double learning_rate = 5e-4;
  std::size_t batch_size = 256;
  std::size_t epochs = 40;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Ablation ablation = Ablation::none;
  bool grad_clip = true;
  double grad_clip_norm = 10.0;

  AdamSettings adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

void validate(const TrainConfig& config);

// Loss weights after the ablation switch: no_lc zeroes lambda2, no_immd
// zeroes lambda3, positive_mmd flips the sign of lambda3.
losses::LossWeights effective_weights(const TrainConfig& config);

// Everything the epoch loop needs, extracted once from a dataset.
struct TrainingData {
  data::Matrix seen_features;        // train_seen rows
  data::Matrix seen_sample_embeddings;  // embedding of each row's class
  data::Matrix seen_class_embeddings;   // one row per seen class
  data::Matrix seen_class_means;
  data::Matrix unseen_class_embeddings;

  static TrainingData from(const data::ZslDataset& ds);
  std::size_t size() const { return seen_features.rows; }
};

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  std::size_t batches = 0;
  double l_flow = 0.0;
  double l_c = 0.0;
  double l_immd = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;  // mean pre-clip norm
  double wall_seconds = 0.0;
};

struct TrainState {
  AdamState adam;
  std::mt19937_64 rng;
  std::size_t epochs_done = 0;

  TrainState(const flow::FlowModel& model, std::uint64_t seed);
};

EpochReport train_epoch(flow::FlowModel& model, const TrainingData& data, const TrainConfig& config,
                        TrainState& state);

using EpochCallback = std::function<void(const EpochReport&, const flow::FlowModel&)>;

// Runs config.epochs epochs from a fresh state seeded by config.seed.
std::vector<EpochReport> fit(flow::FlowModel& model, const data::ZslDataset& ds, const TrainConfig& config,
                             const EpochCallback& on_epoch = {});

// Append-only CSV: epoch,l_flow,l_c,l_immd,total,wall_seconds.
// With record_wall_clock off the last column is written as 0 so that logs
// from equal-seed runs compare byte for byte.
class EpochLog {
 public:
  static constexpr const char* kHeader = "epoch,l_flow,l_c,l_immd,total,wall_seconds";

  explicit EpochLog(const std::filesystem::path& path, bool record_wall_clock = true);
  void append(const EpochReport& report);

 private:
  std::ofstream out_;
  bool wall_clock_;
};

}  // namespace izf::trainer
