#include "izf/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "izf/classify/classify.hpp"
#include "izf/data/io.hpp"
#include "izf/data/preprocess.hpp"
#include "izf/errors.hpp"
#include "izf/flow/checkpoint.hpp"
#include "izf/numcore/text.hpp"

namespace izf::cli {

namespace fs = std::filesystem;
using numcore::format_double;

namespace {

void prepare_output(const RunConfig& config, const fs::path& dir) {
  fs::create_directories(dir);
  write_snapshot(config, dir / "config.txt");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<trainer::EpochReport> train_into(flow::FlowModel& model, const data::ZslDataset& ds,
                                             const RunConfig& config, const fs::path& dir) {
  fs::remove(dir / "epoch_log.csv");
  trainer::EpochLog log(dir / "epoch_log.csv", config.log_wall_clock);
  const auto interval = config.checkpoint_interval;
  if (interval > 0) fs::create_directories(dir / "checkpoints");
  auto reports = trainer::fit(model, ds, config.train, [&](const trainer::EpochReport& r, const flow::FlowModel& m) {
    log.append(r);
    if (interval > 0 && r.epoch % interval == 0) {
      std::ostringstream name;
      name << "epoch_" << std::setw(4) << std::setfill('0') << r.epoch << ".izf";
      flow::save_checkpoint(m, dir / "checkpoints" / name.str());
    }
  });
  flow::save_checkpoint(model, dir / "model.izf");
  return reports;
}

void write_features_csv(const classify::LabeledFeatures& set, const fs::path& path) {
  auto out = open_out(path);
  out << "label";
  for (std::size_t j = 0; j < set.features.cols; ++j) out << ",v" << j;
  out << '\n';
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    out << set.labels[i];
    for (std::size_t j = 0; j < set.features.cols; ++j) out << ',' << format_double(set.features(i, j));
    out << '\n';
  }
}

void check_model_fits(const flow::FlowModel& model, const data::ZslDataset& ds) {
  if (model.config().d_v != ds.d_v() || model.config().d_c != ds.d_c()) {
    throw LoadError("checkpoint expects d_v=" + std::to_string(model.config().d_v) + ", d_c=" +
                    std::to_string(model.config().d_c) + " but the prepared dataset has d_v=" +
                    std::to_string(ds.d_v()) + ", d_c=" + std::to_string(ds.d_c()));
  }
}

double window_mean(const std::vector<trainer::EpochReport>& r, bool head, double trainer::EpochReport::*field) {
  const std::size_t w = std::max<std::size_t>(1, r.size() / 10);
  double s = 0.0;
  for (std::size_t i = 0; i < w; ++i) s += r[head ? i : r.size() - 1 - i].*field;
  return s / static_cast<double>(w);
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

data::ZslDataset prepare_dataset(const RunConfig& config) {
  data::ZslDataset ds =
      config.dataset.empty() ? data::toy_generate(config.toy_samples, config.seed) : data::load_dataset(config.dataset);
  if (config.minmax) ds = data::fit_apply_minmax(ds).first;
  ds = data::pad_to_even(ds);
  data::validate_model_ready(ds);
  return ds;
}

flow::FlowModel make_model(const RunConfig& config, const data::ZslDataset& ds) {
  auto fc = config.flow;
  fc.d_v = ds.d_v();
  fc.d_c = ds.d_c();
  return flow::FlowModel::create(fc, config.seed);
}

std::vector<EvalRun> evaluate_and_write(const flow::FlowModel& model, const data::ZslDataset& ds,
                                        const RunConfig& config, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<EvalRun> runs;
  for (auto mode : config.modes) {
    for (auto setting : config.settings) {
      auto outcome = eval::evaluate_model(model, ds, mode, setting, config.eval);
      const std::string stem = classify::to_string(mode) + "_" + classify::to_string(setting);
      {
        auto out = open_out(dir / ("report_" + stem + ".txt"));
        eval::write_report_text(outcome.report, ds.class_names, out);
      }
      eval::write_per_class_csv(outcome.report, dir / ("per_class_" + stem + ".csv"));
      eval::write_confusion_csv(outcome.report, dir / ("confusion_" + stem + ".csv"));
      eval::write_predictions_csv(outcome.predictions, mode, setting, dir / ("predictions_" + stem + ".csv"));
      runs.push_back({mode, setting, std::move(outcome)});
    }
  }
  return runs;
}

TrainRun run_train(const RunConfig& config) {
  auto ds = prepare_dataset(config);
  prepare_output(config, config.output_dir);
  auto model = make_model(config, ds);
  TrainRun run;
  run.epochs = train_into(model, ds, config, config.output_dir);
  run.model_path = config.output_dir / "model.izf";
  return run;
}

std::vector<EvalRun> run_eval(const RunConfig& config) {
  auto model = flow::load_checkpoint(config.checkpoint_path());
  auto ds = prepare_dataset(config);
  check_model_fits(model, ds);
  prepare_output(config, config.output_dir);
  return evaluate_and_write(model, ds, config, config.output_dir);
}

fs::path run_generate(const RunConfig& config) {
  auto model = flow::load_checkpoint(config.checkpoint_path());
  auto ds = prepare_dataset(config);
  check_model_fits(model, ds);
  auto classes = config.classes.empty() ? ds.unseen_classes : config.classes;
  for (int c : classes) {
    if (c < 0 || static_cast<std::size_t>(c) >= ds.n_classes()) {
      throw ConfigError("class id " + std::to_string(c) + " is outside 0.." + std::to_string(ds.n_classes() - 1));
    }
  }
  prepare_output(config, config.output_dir);
  auto set = classify::generate_training_set(model, ds.class_embeddings, classes, config.eval.per_class, config.seed,
                                             config.zero_latent);
  const auto path = config.output_dir / "generated.csv";
  write_features_csv(set, path);
  return path;
}

const EvalRun* ToyVariantResult::find(classify::Mode mode, classify::Setting setting) const {
  for (const auto& e : evals) {
    if (e.mode == mode && e.setting == setting) return &e;
  }
  return nullptr;
}

const ToyVariantResult* ToyResult::find(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

namespace {

// toy class centres sit on the corners of a square with side 2
constexpr double kToyCentreSpacing = 2.0;

RunConfig toy_variant_config(const RunConfig& base, const std::string& name) {
  RunConfig c = base;
  if (name == "full") {
  } else if (name == "no_immd") {
    c.train.ablation = trainer::Ablation::no_immd;
  } else if (name == "positive_mmd") {
    // the MMD term enters the objective with weight -1
    c.train.weights.lambda3 = 1.0;
    c.train.ablation = trainer::Ablation::positive_mmd;
  } else if (name == "large_lambda3") {
    c.train.weights.lambda3 = 10.0;
  } else {
    throw ConfigError("unknown toy variant '" + name + "'");
  }
  return c;
}

ToyVariantResult run_toy_variant(const RunConfig& config, const std::string& name, const data::ZslDataset& ds,
                                 const fs::path& dir) {
  ToyVariantResult r;
  r.name = name;
  r.weights = trainer::effective_weights(config.train);
  fs::create_directories(dir);
  write_snapshot(config, dir / "config.txt");
  auto model = make_model(config, ds);
  std::vector<trainer::EpochReport> epochs;
  try {
    epochs = train_into(model, ds, config, dir);
  } catch (const NumericError& e) {
    r.diverged = true;
    r.divergence_message = e.what();
  }
  if (!epochs.empty()) {
    r.l_flow_start = window_mean(epochs, true, &trainer::EpochReport::l_flow);
    r.l_flow_end = window_mean(epochs, false, &trainer::EpochReport::l_flow);
    r.l_immd_start = window_mean(epochs, true, &trainer::EpochReport::l_immd);
    r.l_immd_end = window_mean(epochs, false, &trainer::EpochReport::l_immd);
  }
  if (!r.diverged) {
    try {
      std::vector<int> all(ds.n_classes());
      for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
      auto gen = classify::generate_training_set(model, ds.class_embeddings, all, config.toy_generated, config.seed);
      write_features_csv(gen, dir / "generated.csv");

      const int unseen = ds.unseen_classes.front();
      std::vector<double> mean(2, 0.0);
      std::size_t n = 0;
      for (std::size_t i = 0; i < gen.labels.size(); ++i) {
        if (gen.labels[i] != unseen) continue;
        ++n;
        for (std::size_t j = 0; j < 2; ++j) mean[j] += gen.features(i, j);
        for (std::size_t j = 2; j < gen.features.cols; ++j)
          r.padded_max_abs = std::max(r.padded_max_abs, std::abs(gen.features(i, j)));
      }
      double d2 = 0.0;
      for (std::size_t j = 0; j < 2; ++j) {
        mean[j] /= static_cast<double>(n);
        const double centre = 2.0 * ds.class_embeddings(static_cast<std::size_t>(unseen), j) - 1.0;
        d2 += (mean[j] - centre) * (mean[j] - centre);
      }
      r.unseen_mean = mean;
      r.unseen_distance = std::sqrt(d2);
      if (!std::isfinite(r.unseen_distance)) throw NumericError("generated samples are not finite");
      r.evals = evaluate_and_write(model, ds, config, dir);
    } catch (const NumericError& e) {
      r.diverged = true;
      r.divergence_message = e.what();
    }
  }
  if (r.diverged) r.unseen_distance = std::numeric_limits<double>::infinity();
  r.off_target = r.unseen_distance > kToyCentreSpacing;
  r.failure_flag = r.diverged || (r.l_flow_end > r.l_flow_start && r.l_immd_end < r.l_immd_start);
  return r;
}

}  // namespace

ToyResult run_toy(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<RunConfig> variant_configs;
  for (const auto& name : config.toy_variants) variant_configs.push_back(toy_variant_config(config, name));

  auto ds = prepare_dataset(config);
  prepare_output(config, config.output_dir);
  data::save_dataset(ds, config.output_dir / "data");

  ToyResult result;
  for (std::size_t v = 0; v < variant_configs.size(); ++v) {
    const auto& name = config.toy_variants[v];
    result.variants.push_back(run_toy_variant(variant_configs[v], name, ds, config.output_dir / name));
  }

  auto out = open_out(config.output_dir / "summary.csv");
  out << "variant,lambda1,lambda2,lambda3,diverged,failure_flag,l_flow_start,l_flow_end,l_immd_start,l_immd_end,"
         "unseen_mean_x,unseen_mean_y,unseen_distance,unseen_off_target,padded_max_abs";
  for (auto mode : config.modes)
    for (auto setting : config.settings) {
      const auto stem = classify::to_string(mode) + "_" + classify::to_string(setting);
      out << ',' << stem << "_a_seen," << stem << "_a_unseen," << stem << "_harmonic";
    }
  out << '\n';
  for (const auto& r : result.variants) {
    out << r.name << ',' << format_double(r.weights.lambda1) << ',' << format_double(r.weights.lambda2) << ','
        << format_double(r.weights.lambda3) << ',' << r.diverged << ',' << r.failure_flag << ','
        << format_double(r.l_flow_start) << ',' << format_double(r.l_flow_end) << ','
        << format_double(r.l_immd_start) << ',' << format_double(r.l_immd_end) << ',';
    if (r.unseen_mean.size() == 2) {
      out << format_double(r.unseen_mean[0]) << ',' << format_double(r.unseen_mean[1]) << ','
          << format_double(r.unseen_distance) << ',' << r.off_target << ',' << format_double(r.padded_max_abs);
    } else {
      out << ",,," << r.off_target << ',';
    }
    for (auto mode : config.modes)
      for (auto setting : config.settings) {
        const EvalRun* e = r.find(mode, setting);
        if (!e) {
          out << ",,,";
          continue;
        }
        out << ',' << opt(e->outcome.report.a_seen) << ',' << format_double(e->outcome.report.a_unseen) << ','
            << opt(e->outcome.report.harmonic);
      }
    out << '\n';
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<SweepPoint> run_sweep(const RunConfig& config) {
  struct Job {
    std::string param, value;
    RunConfig config;
  };
  std::vector<Job> jobs;
  for (const auto& param : config.sweep_params) {
    if (param == "n_blocks") {
      for (auto n : config.sweep_blocks) {
        RunConfig c = config;
        c.flow.n_blocks = n;
        if (n == 0) throw ConfigError("sweep_blocks entries must be at least 1");
        jobs.push_back({param, std::to_string(n), c});
      }
      continue;
    }
    double losses::LossWeights::*field = nullptr;
    if (param == "lambda1") field = &losses::LossWeights::lambda1;
    if (param == "lambda2") field = &losses::LossWeights::lambda2;
    if (param == "lambda3") field = &losses::LossWeights::lambda3;
    if (!field) throw ConfigError("cannot sweep '" + param + "'; expected lambda1, lambda2, lambda3 or n_blocks");
    for (double v : config.sweep_values) {
      RunConfig c = config;
      c.train.weights.*field = v;
      jobs.push_back({param, format_double(v), c});
    }
  }

  auto ds = prepare_dataset(config);
  prepare_output(config, config.output_dir);
  std::vector<SweepPoint> points;
  for (auto& job : jobs) {
    job.config.settings = {classify::Setting::gzsl};
    const auto dir = config.output_dir / "points" / (job.param + "_" + job.value);
    fs::create_directories(dir);
    write_snapshot(job.config, dir / "config.txt");
    SweepPoint p;
    p.param = job.param;
    p.value = job.value;
    p.weights = trainer::effective_weights(job.config.train);
    p.n_blocks = job.config.flow.n_blocks;
    try {
      auto model = make_model(job.config, ds);
      train_into(model, ds, job.config, dir);
      for (const auto& e : evaluate_and_write(model, ds, job.config, dir)) {
        const auto& rep = e.outcome.report;
        p.scores.push_back({e.mode, rep.a_seen.value_or(0.0), rep.a_unseen, rep.harmonic.value_or(0.0)});
      }
    } catch (const NumericError&) {
      p.diverged = true;
      p.scores.clear();
    }
    points.push_back(std::move(p));
  }

  auto out = open_out(config.output_dir / "sweep.csv");
  out << "param,value,lambda1,lambda2,lambda3,n_blocks,diverged";
  for (auto mode : config.modes) {
    const auto m = classify::to_string(mode);
    out << ',' << m << "_a_seen," << m << "_a_unseen," << m << "_harmonic";
  }
  out << '\n';
  for (const auto& p : points) {
    out << p.param << ',' << p.value << ',' << format_double(p.weights.lambda1) << ','
        << format_double(p.weights.lambda2) << ',' << format_double(p.weights.lambda3) << ',' << p.n_blocks << ','
        << p.diverged;
    for (auto mode : config.modes) {
      const SweepPoint::Score* s = nullptr;
      for (const auto& sc : p.scores)
        if (sc.mode == mode) s = &sc;
      if (s) {
        out << ',' << format_double(s->a_seen) << ',' << format_double(s->a_unseen) << ',' << format_double(s->harmonic);
      } else {
        out << ",,,";
      }
    }
    out << '\n';
  }
  return points;
}

std::string dataset_summary(const RunConfig& config) {
  auto raw = config.dataset.empty() ? data::toy_generate(config.toy_samples, config.seed)
                                    : data::load_dataset(config.dataset);
  data::validate(raw);
  std::string out = data::summary(raw);
  auto prepared = prepare_dataset(config);
  if (prepared.d_v() != raw.d_v()) {
    out += "model input after padding: d_v=" + std::to_string(prepared.d_v()) + "\n";
  }
  return out;
}

}  // namespace izf::cli
