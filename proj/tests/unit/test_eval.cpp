#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "izf/data/preprocess.hpp"
#include "izf/errors.hpp"
#include "izf/eval/evaluate.hpp"

using namespace izf;
using namespace izf::eval;

TEST_CASE("per-class accuracy averages over classes, not samples") {
  std::vector<int> truth(10, 0), pred(10, 0);
  truth.push_back(1);
  pred.push_back(0);
  CHECK(per_class_accuracy(truth, pred, {0, 1}) == doctest::Approx(0.5));
  CHECK(per_class_accuracy({0, 1, 2}, {0, 1, 2}, {0, 1, 2}) == 1.0);

  auto twice_t = truth, twice_p = pred;
  twice_t.insert(twice_t.end(), truth.begin(), truth.end());
  twice_p.insert(twice_p.end(), pred.begin(), pred.end());
  CHECK(per_class_accuracy(twice_t, twice_p, {0, 1}) == per_class_accuracy(truth, pred, {0, 1}));

  auto r = per_class_result({0, 0}, {0, 1}, {0, 1, 2});
  CHECK(r.mean == 0.5);
  CHECK(r.excluded == std::vector<int>{1, 2});
  CHECK_THROWS_AS(per_class_accuracy({0}, {0}, {}), izf::ContractError);
  CHECK_THROWS_AS(per_class_accuracy({5}, {5}, {0, 1}), izf::ContractError);
}

TEST_CASE("harmonic mean") {
  CHECK(percent(harmonic_mean(0.752, 0.578)) == "65.4");
  CHECK(percent(harmonic_mean(0.805, 0.613)) == "69.6");
  CHECK(harmonic_mean(0.4, 0.4) == doctest::Approx(0.4));
  CHECK(harmonic_mean(0.0, 0.0) == 0.0);
  CHECK(harmonic_mean(0.0, 0.9) == 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng);
    const double h = harmonic_mean(a, b);
    CHECK(h <= (a + b) / 2 + 1e-15);
    CHECK(h <= 2 * std::min(a, b) + 1e-15);
  }
}

TEST_CASE("confusion matrix") {
  auto cm = confusion_matrix({2, 2, 5, 5, 5}, {2, 5, 5, 5, 2}, {2, 5});
  CHECK(cm.counts == std::vector<std::vector<std::size_t>>{{1, 1}, {1, 2}});
  auto diag = confusion_matrix({1, 0, 1}, {1, 0, 1}, {0, 1});
  CHECK(diag.counts == std::vector<std::vector<std::size_t>>{{1, 0}, {0, 2}});
  CHECK_THROWS_AS(confusion_matrix({0}, {3}, {0, 1}), izf::ContractError);
}

TEST_CASE("reports from an untrained model complete") {
  auto ds = data::toy_generate(40, 5);
  flow::FlowConfig fc;
  fc.d_v = 4;
  fc.d_c = 2;
  auto model = flow::FlowModel::create(fc, 1);
  for (auto mode : {Mode::nbc, Mode::softmax}) {
    auto czsl = evaluate_model(model, ds, mode, Setting::czsl);
    CHECK_FALSE(czsl.report.a_seen.has_value());
    CHECK_FALSE(czsl.report.harmonic.has_value());
    CHECK(czsl.report.a_unseen == 1.0);  // a single candidate class
    CHECK(czsl.report.confusion.class_order == std::vector<int>{3});
    CHECK(czsl.predictions.size() == 40);

    auto gzsl = evaluate_model(model, ds, mode, Setting::gzsl);
    REQUIRE(gzsl.report.a_seen.has_value());
    REQUIRE(gzsl.report.harmonic.has_value());
    for (double v : {*gzsl.report.a_seen, gzsl.report.a_unseen, *gzsl.report.harmonic}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(gzsl.predictions.size() == 40 + 3 * 8);
    std::size_t total = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      std::size_t row = 0;
      for (auto n : gzsl.report.confusion.counts[i]) row += n;
      CHECK(row == (i == 3 ? 40u : 8u));
      total += row;
    }
    CHECK(total == gzsl.predictions.size());
  }
}

TEST_CASE("report and CSV writers") {
  auto ds = data::toy_generate(10, 1);
  std::vector<Prediction> preds{{24, 0, 0}, {26, 1, 1}, {28, 2, 0}, {30, 3, 3}, {31, 3, 2}};
  auto r = build_report(ds, Mode::nbc, Setting::gzsl, preds);
  CHECK(*r.a_seen == doctest::Approx(2.0 / 3.0));
  CHECK(r.a_unseen == 0.5);

  std::ostringstream text;
  write_report_text(r, ds.class_names, text);
  CHECK(text.str().find("a_seen: 66.7") != std::string::npos);
  CHECK(text.str().find("harmonic: 57.1") != std::string::npos);

  auto dir = std::filesystem::temp_directory_path() / "izf_eval_test";
  std::filesystem::create_directories(dir);
  write_predictions_csv(preds, Mode::nbc, Setting::gzsl, dir / "pred.csv");
  write_per_class_csv(r, dir / "per_class.csv");
  write_confusion_csv(r, dir / "confusion.csv");
  std::ifstream in(dir / "pred.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "query_index,true_label,predicted_label,mode,setting");
  CHECK(first == "24,0,0,nbc,gzsl");
  std::ifstream pc(dir / "per_class.csv");
  std::string line;
  std::getline(pc, line);
  std::getline(pc, line);
  CHECK(line == "0,1,1,1");
}
