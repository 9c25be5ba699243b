#include "izf/eval/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "izf/errors.hpp"
#include "izf/numcore/text.hpp"

namespace izf::eval {

namespace {

std::map<int, std::size_t> position_of(const std::vector<int>& classes) {
  std::map<int, std::size_t> pos;
  for (std::size_t k = 0; k < classes.size(); ++k) pos[classes[k]] = k;
  return pos;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

PerClassResult per_class_result(const std::vector<int>& truths, const std::vector<int>& predictions,
                                const std::vector<int>& class_set) {
  if (class_set.empty()) throw ContractError("per-class accuracy needs a nonempty class set");
  if (truths.size() != predictions.size()) throw ContractError("truth and prediction counts differ");
  const auto pos = position_of(class_set);
  std::vector<ClassAccuracy> acc(class_set.size());
  for (std::size_t k = 0; k < class_set.size(); ++k) acc[k].label = class_set[k];
  for (std::size_t i = 0; i < truths.size(); ++i) {
    auto it = pos.find(truths[i]);
    if (it == pos.end()) throw ContractError("label " + std::to_string(truths[i]) + " is not in the class set");
    auto& a = acc[it->second];
    ++a.count;
    if (predictions[i] == truths[i]) ++a.correct;
  }
  PerClassResult result;
  double sum = 0.0;
  for (const auto& a : acc) {
    if (a.count == 0) {
      result.excluded.push_back(a.label);
      continue;
    }
    sum += a.accuracy();
    result.classes.push_back(a);
  }
  if (!result.classes.empty()) result.mean = sum / static_cast<double>(result.classes.size());
  return result;
}

double harmonic_mean(double a_seen, double a_unseen) {
  if (a_seen + a_unseen == 0.0) return 0.0;
  return 2.0 * a_seen * a_unseen / (a_seen + a_unseen);
}

ConfusionMatrix confusion_matrix(const std::vector<int>& truths, const std::vector<int>& predictions,
                                 const std::vector<int>& class_order) {
  if (truths.size() != predictions.size()) throw ContractError("truth and prediction counts differ");
  const auto pos = position_of(class_order);
  ConfusionMatrix cm{class_order, std::vector<std::vector<std::size_t>>(
                                      class_order.size(), std::vector<std::size_t>(class_order.size(), 0))};
  for (std::size_t i = 0; i < truths.size(); ++i) {
    auto t = pos.find(truths[i]);
    auto p = pos.find(predictions[i]);
    if (t == pos.end() || p == pos.end()) {
      throw ContractError("label outside the confusion class order at sample " + std::to_string(i));
    }
    ++cm.counts[t->second][p->second];
  }
  return cm;
}

EvalReport build_report(const data::ZslDataset& ds, Mode mode, Setting setting,
                        const std::vector<Prediction>& predictions) {
  EvalReport report;
  report.mode = mode;
  report.setting = setting;

  std::vector<int> truth_s, pred_s, truth_u, pred_u, truth_all, pred_all;
  for (const auto& p : predictions) {
    if (ds.is_unseen(p.true_label)) {
      truth_u.push_back(p.true_label);
      pred_u.push_back(p.predicted_label);
    } else {
      truth_s.push_back(p.true_label);
      pred_s.push_back(p.predicted_label);
    }
    truth_all.push_back(p.true_label);
    pred_all.push_back(p.predicted_label);
  }

  auto unseen = per_class_result(truth_u, pred_u, ds.unseen_classes);
  report.a_unseen = unseen.mean;
  report.per_class = unseen.classes;
  report.excluded = unseen.excluded;
  if (setting == Setting::gzsl) {
    auto seen = per_class_result(truth_s, pred_s, ds.seen_classes);
    report.a_seen = seen.mean;
    report.harmonic = harmonic_mean(seen.mean, unseen.mean);
    report.per_class.insert(report.per_class.end(), seen.classes.begin(), seen.classes.end());
    report.excluded.insert(report.excluded.end(), seen.excluded.begin(), seen.excluded.end());
    std::sort(report.per_class.begin(), report.per_class.end(),
              [](const auto& a, const auto& b) { return a.label < b.label; });
    std::sort(report.excluded.begin(), report.excluded.end());
  }
  report.confusion = confusion_matrix(truth_all, pred_all, classify::label_space(ds, setting));
  return report;
}

std::string percent(double fraction) { return numcore::format_fixed(100.0 * fraction, 1); }

void write_report_text(const EvalReport& r, const std::vector<std::string>& class_names, std::ostream& out) {
  auto name = [&](int id) {
    return id >= 0 && static_cast<std::size_t>(id) < class_names.size() ? class_names[id] : std::to_string(id);
  };
  out << "mode: " << classify::to_string(r.mode) << '\n';
  out << "setting: " << classify::to_string(r.setting) << '\n';
  if (r.a_seen) out << "a_seen: " << percent(*r.a_seen) << '\n';
  out << "a_unseen: " << percent(r.a_unseen) << '\n';
  if (r.harmonic) out << "harmonic: " << percent(*r.harmonic) << '\n';
  out << "per_class:\n";
  for (const auto& c : r.per_class) {
    out << "  " << c.label << ' ' << name(c.label) << ": " << percent(c.accuracy()) << " (" << c.correct << '/'
        << c.count << ")\n";
  }
  if (!r.excluded.empty()) {
    out << "excluded (no test samples):";
    for (int id : r.excluded) out << ' ' << id;
    out << '\n';
  }
}

void write_per_class_csv(const EvalReport& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "label,count,correct,accuracy\n";
  for (const auto& c : r.per_class) {
    out << c.label << ',' << c.count << ',' << c.correct << ',' << numcore::format_double(c.accuracy()) << '\n';
  }
}

void write_confusion_csv(const EvalReport& r, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "true\\pred";
  for (int id : r.confusion.class_order) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < r.confusion.class_order.size(); ++i) {
    out << r.confusion.class_order[i];
    for (auto n : r.confusion.counts[i]) out << ',' << n;
    out << '\n';
  }
}

void write_predictions_csv(const std::vector<Prediction>& predictions, Mode mode, Setting setting,
                           const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "query_index,true_label,predicted_label,mode,setting\n";
  const auto m = classify::to_string(mode);
  const auto s = classify::to_string(setting);
  for (const auto& p : predictions) {
    out << p.query_index << ',' << p.true_label << ',' << p.predicted_label << ',' << m << ',' << s << '\n';
  }
}

}  // namespace izf::eval
