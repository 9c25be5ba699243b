#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "izf/classify/classify.hpp"
#include "izf/eval/evaluate.hpp"
#include "izf/flow/flow_model.hpp"
#include "izf/trainer/trainer.hpp"

namespace izf::cli {

using ConfigMap = std::map<std::string, std::string>;

// key = value lines; '#' starts a comment. Throws ConfigError naming the line.
ConfigMap parse_config_text(const std::string& text, const std::string& origin = "config");
ConfigMap load_config_file(const std::filesystem::path& path);

struct RunConfig {
  std::string command = "train";
  std::filesystem::path dataset;
  std::filesystem::path output_dir = "izf_out";
  std::filesystem::path checkpoint;  // eval/generate; defaults to output_dir/model.izf
  std::uint64_t seed = 0;

  flow::FlowConfig flow;  // d_v and d_c are taken from the data
  trainer::TrainConfig train;
  bool minmax = true;
  bool log_wall_clock = true;
  std::size_t checkpoint_interval = 0;  // epochs between extra checkpoints; 0 keeps only the final model

  std::vector<classify::Mode> modes{classify::Mode::nbc, classify::Mode::softmax};
  std::vector<classify::Setting> settings{classify::Setting::czsl, classify::Setting::gzsl};
  eval::EvalOptions eval;

  std::vector<int> classes;  // generate; empty means all unseen classes
  bool zero_latent = false;

  std::size_t toy_samples = 500;
  std::size_t toy_generated = 1000;
  std::vector<std::string> toy_variants{"full", "no_immd", "positive_mmd", "large_lambda3"};

  std::vector<std::string> sweep_params{"lambda1", "lambda2", "lambda3", "n_blocks"};
  std::vector<double> sweep_values{0.1, 0.5, 1.0, 1.5, 2.0};
  std::vector<std::size_t> sweep_blocks{1, 3, 5, 7, 9};

  std::filesystem::path checkpoint_path() const {
    return checkpoint.empty() ? output_dir / "model.izf" : checkpoint;
  }
};

// Defaults for a command, before the config file and command-line overrides.
RunConfig defaults_for(const std::string& command);

// Applies entries in order; unknown keys and malformed values are ConfigErrors.
void apply(RunConfig& config, const ConfigMap& entries, const std::string& origin);

// Command-line entries win over file entries, which win over the defaults.
RunConfig resolve(const std::string& command, const ConfigMap& file_entries, const ConfigMap& cli_entries);

// Every key with its resolved value, in a stable order.
ConfigMap to_map(const RunConfig& config);
std::string snapshot_text(const RunConfig& config);
void write_snapshot(const RunConfig& config, const std::filesystem::path& path);

std::vector<std::string> known_keys();

}  // namespace izf::cli
