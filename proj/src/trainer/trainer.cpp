#include "izf/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "izf/errors.hpp"
#include "izf/numcore/autograd.hpp"
#include "izf/numcore/text.hpp"

namespace izf::trainer {

using numcore::Tensor;

std::string to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::none: return "none";
    case Ablation::no_lc: return "no_lc";
    case Ablation::no_immd: return "no_immd";
    case Ablation::no_lc_no_immd: return "no_lc_no_immd";
    case Ablation::positive_mmd: return "positive_mmd";
  }
  return "none";
}

Ablation ablation_from_string(const std::string& name) {
  for (auto a : {Ablation::none, Ablation::no_lc, Ablation::no_immd, Ablation::no_lc_no_immd,
                 Ablation::positive_mmd}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown ablation '" + name +
                    "' (expected none, no_lc, no_immd, no_lc_no_immd or positive_mmd)");
}

void validate(const TrainConfig& config) {
  if (config.batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(config.adam_beta1 >= 0.0 && config.adam_beta1 < 1.0) ||
      !(config.adam_beta2 >= 0.0 && config.adam_beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(config.adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (config.grad_clip && !(config.grad_clip_norm > 0.0)) throw ConfigError("grad_clip_norm must be positive");
  for (double l : {config.weights.lambda1, config.weights.lambda2, config.weights.lambda3}) {
    if (!std::isfinite(l)) throw ConfigError("loss weights must be finite");
  }
  try {
    losses::validate(config.kernel);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

losses::LossWeights effective_weights(const TrainConfig& config) {
  auto w = config.weights;
  switch (config.ablation) {
    case Ablation::none: break;
    case Ablation::no_lc: w.lambda2 = 0.0; break;
    case Ablation::no_immd: w.lambda3 = 0.0; break;
    case Ablation::no_lc_no_immd: w.lambda2 = w.lambda3 = 0.0; break;
    case Ablation::positive_mmd: w.lambda3 = -w.lambda3; break;
  }
  return w;
}

TrainingData TrainingData::from(const data::ZslDataset& ds) {
  data::validate_model_ready(ds);
  const auto rows = ds.indices(data::Split::train_seen);
  if (rows.empty()) throw ContractError("training needs train_seen samples");
  if (ds.unseen_classes.empty()) throw ContractError("training needs unseen class embeddings");
  TrainingData td;
  td.seen_features = ds.features(rows);
  td.seen_sample_embeddings = ds.embeddings_of(ds.labels_of(rows));
  td.seen_class_embeddings = ds.embeddings_of(ds.seen_classes);
  td.seen_class_means = data::class_means(ds, ds.seen_classes);
  td.unseen_class_embeddings = ds.embeddings_of(ds.unseen_classes);
  return td;
}

TrainState::TrainState(const flow::FlowModel& model, std::uint64_t seed)
    : adam(model.named_parameters()), rng(seed) {}

EpochReport train_epoch(flow::FlowModel& model, const TrainingData& data, const TrainConfig& config,
                        TrainState& state) {
  const auto start = std::chrono::steady_clock::now();
  const auto weights = effective_weights(config);
  const auto settings = config.adam();
  const auto params = model.named_parameters();
  const std::size_t n = data.size();
  const std::size_t batch = std::min(config.batch_size, n);
  if (batch < 2) throw ContractError("training needs at least two train_seen samples");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), state.rng);

  const Tensor class_c = Tensor::from_matrix(data.seen_class_embeddings);
  const Tensor class_means = Tensor::from_matrix(data.seen_class_means);
  std::uniform_int_distribution<std::size_t> pick_unseen(0, data.unseen_class_embeddings.rows - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  EpochReport report;
  report.epoch = state.epochs_done + 1;
  report.batches = n / batch;
  for (std::size_t b = 0; b < report.batches; ++b) {
    std::span<const std::size_t> rows(order.data() + b * batch, batch);
    const Tensor v = Tensor::from_matrix(numcore::select_rows(data.seen_features, rows));
    const Tensor c = Tensor::from_matrix(numcore::select_rows(data.seen_sample_embeddings, rows));

    std::vector<std::size_t> unseen_rows(batch);
    for (auto& r : unseen_rows) r = pick_unseen(state.rng);
    const Tensor c_u = Tensor::from_matrix(numcore::select_rows(data.unseen_class_embeddings, unseen_rows));
    data::Matrix z(batch, model.d_z());
    for (auto& x : z.values) x = gauss(state.rng);

    try {
      const Tensor l_flow = losses::loss_flow(model, v, c);
      const Tensor l_c = losses::loss_centralize(model, class_c, class_means);
      const Tensor v_gen = model.inverse(c_u, Tensor::from_matrix(z));
      const Tensor l_immd = losses::loss_immd(config.kernel, v, v_gen);
      const Tensor total = losses::loss_total(weights, l_flow, l_c, l_immd);

      zero_grad(params);
      numcore::backward(total);
      report.grad_norm += clip_grad_norm(params, config.grad_clip ? config.grad_clip_norm : 0.0);
      state.adam.step(params, settings);

      report.l_flow += l_flow.item();
      report.l_c += l_c.item();
      report.l_immd += l_immd.item();
      report.total += total.item();
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(report.epoch) + " batch " + std::to_string(b) + ": " +
                         e.what());
    }
  }
  zero_grad(params);

  const double k = static_cast<double>(report.batches);
  report.l_flow /= k;
  report.l_c /= k;
  report.l_immd /= k;
  report.total /= k;
  report.grad_norm /= k;
  state.epochs_done = report.epoch;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<EpochReport> fit(flow::FlowModel& model, const data::ZslDataset& ds, const TrainConfig& config,
                             const EpochCallback& on_epoch) {
  validate(config);
  const auto td = TrainingData::from(ds);
  if (model.d_v() != ds.d_v() || model.d_c() != ds.d_c()) {
    throw DimensionError("model is " + std::to_string(model.d_v()) + "/" + std::to_string(model.d_c()) +
                         " but the dataset is " + std::to_string(ds.d_v()) + "/" + std::to_string(ds.d_c()));
  }
  TrainState state(model, config.seed);
  std::vector<EpochReport> reports;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    reports.push_back(train_epoch(model, td, config, state));
    if (on_epoch) on_epoch(reports.back(), model);
  }
  return reports;
}

EpochLog::EpochLog(const std::filesystem::path& path, bool record_wall_clock) : wall_clock_(record_wall_clock) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw Error("cannot open epoch log " + path.string());
  if (fresh) out_ << kHeader << '\n' << std::flush;
}

void EpochLog::append(const EpochReport& r) {
  using numcore::format_double;
  out_ << r.epoch << ',' << format_double(r.l_flow) << ',' << format_double(r.l_c) << ','
       << format_double(r.l_immd) << ',' << format_double(r.total) << ','
       << (wall_clock_ ? numcore::format_fixed(r.wall_seconds, 3) : std::string("0")) << '\n'
       << std::flush;
}

}  // namespace izf::trainer
