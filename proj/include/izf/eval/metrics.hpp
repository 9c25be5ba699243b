#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "izf/classify/classify.hpp"

namespace izf::eval {

using classify::Mode;
using classify::Setting;

struct ClassAccuracy {
  int label = 0;
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct PerClassResult {
  double mean = 0.0;                 // unweighted over classes with samples
  std::vector<ClassAccuracy> classes;  // classes with at least one sample
  std::vector<int> excluded;           // classes without test samples
};

PerClassResult per_class_result(const std::vector<int>& truths, const std::vector<int>& predictions,
                                const std::vector<int>& class_set);

inline double per_class_accuracy(const std::vector<int>& truths, const std::vector<int>& predictions,
                                 const std::vector<int>& class_set) {
  return per_class_result(truths, predictions, class_set).mean;
}

double harmonic_mean(double a_seen, double a_unseen);

struct ConfusionMatrix {
  std::vector<int> class_order;
  std::vector<std::vector<std::size_t>> counts;  // counts[true][pred], indexed by position in class_order
};

ConfusionMatrix confusion_matrix(const std::vector<int>& truths, const std::vector<int>& predictions,
                                 const std::vector<int>& class_order);

struct Prediction {
  std::size_t query_index = 0;  // row in the dataset
  int true_label = 0;
  int predicted_label = 0;
};

struct EvalReport {
  Setting setting = Setting::gzsl;
  Mode mode = Mode::nbc;
  std::optional<double> a_seen;    // GZSL only
  double a_unseen = 0.0;
  std::optional<double> harmonic;  // GZSL only
  std::vector<ClassAccuracy> per_class;
  std::vector<int> excluded;
  ConfusionMatrix confusion;
};

// Builds the report from predictions over test_seen (GZSL) and test_unseen samples.
EvalReport build_report(const data::ZslDataset& ds, Mode mode, Setting setting,
                        const std::vector<Prediction>& predictions);

std::string percent(double fraction);  // "65.4"

void write_report_text(const EvalReport& report, const std::vector<std::string>& class_names, std::ostream& out);
void write_per_class_csv(const EvalReport& report, const std::filesystem::path& path);
void write_confusion_csv(const EvalReport& report, const std::filesystem::path& path);
void write_predictions_csv(const std::vector<Prediction>& predictions, Mode mode, Setting setting,
                           const std::filesystem::path& path);

}  // namespace izf::eval
