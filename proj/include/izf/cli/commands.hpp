#pragma once

#include <optional>
#include <string>
#include <vector>

#include "izf/cli/config.hpp"
#include "izf/data/dataset.hpp"
#include "izf/eval/evaluate.hpp"
#include "izf/trainer/trainer.hpp"

namespace izf::cli {

// Loads the manifest (or builds the toy set when no manifest is given),
// rescales with train_seen statistics when enabled and pads d_v.
data::ZslDataset prepare_dataset(const RunConfig& config);

flow::FlowModel make_model(const RunConfig& config, const data::ZslDataset& ds);

struct EvalRun {
  classify::Mode mode;
  classify::Setting setting;
  eval::EvalOutcome outcome;
};

// One report, per-class CSV, confusion CSV and predictions CSV per
// (mode, setting) pair, named <stem>_<mode>_<setting>.*
std::vector<EvalRun> evaluate_and_write(const flow::FlowModel& model, const data::ZslDataset& ds,
                                        const RunConfig& config, const std::filesystem::path& dir);

struct TrainRun {
  std::vector<trainer::EpochReport> epochs;
  std::filesystem::path model_path;
};
TrainRun run_train(const RunConfig& config);

std::vector<EvalRun> run_eval(const RunConfig& config);

// Returns the path of the generated-features CSV.
std::filesystem::path run_generate(const RunConfig& config);

struct ToyVariantResult {
  std::string name;
  losses::LossWeights weights;  // effective
  bool diverged = false;
  std::string divergence_message;
  bool failure_flag = false;   // L_Flow rose while L_iMMD fell, or training diverged
  double l_flow_start = 0.0, l_flow_end = 0.0;
  double l_immd_start = 0.0, l_immd_end = 0.0;
  std::vector<double> unseen_mean;  // first two coordinates
  double unseen_distance = 0.0;     // to the unseen class centre (1, 1)
  bool off_target = false;          // unseen mean farther from (1, 1) than adjacent class centres are apart
  double padded_max_abs = 0.0;      // largest |padded coordinate| over generated unseen samples
  std::vector<EvalRun> evals;

  const EvalRun* find(classify::Mode mode, classify::Setting setting) const;
};

struct ToyResult {
  std::vector<ToyVariantResult> variants;
  double seconds = 0.0;
  const ToyVariantResult* find(const std::string& name) const;
};

ToyResult run_toy(const RunConfig& config);

struct SweepPoint {
  std::string param;
  std::string value;
  losses::LossWeights weights;
  std::size_t n_blocks = 0;
  bool diverged = false;
  struct Score {
    classify::Mode mode;
    double a_seen, a_unseen, harmonic;
  };
  std::vector<Score> scores;
};

// One parameter varied at a time around the resolved configuration; GZSL.
std::vector<SweepPoint> run_sweep(const RunConfig& config);

std::string dataset_summary(const RunConfig& config);

}  // namespace izf::cli
