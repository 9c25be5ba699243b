#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "izf/data/dataset.hpp"
#include "izf/data/io.hpp"
#include "izf/data/preprocess.hpp"
#include "izf/errors.hpp"

using namespace izf::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("izf_data_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ZslDataset tiny_dataset() {
  ZslDataset ds;
  ds.class_names = {"a", "b", "c"};
  ds.class_embeddings = Matrix(3, 1, {0.0, 0.5, 1.0});
  ds.seen_classes = {0, 1};
  ds.unseen_classes = {2};
  ds.visual = Matrix(5, 2, {2, 0, 4, 1, 3, 7, 5, 0.5, -1, 2});
  ds.labels = {0, 1, 0, 1, 2};
  ds.split = {Split::train_seen, Split::train_seen, Split::test_seen, Split::test_seen, Split::test_unseen};
  return ds;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

}  // namespace

TEST_CASE("toy data follows the linear attribute model") {
  const std::size_t n = 10000;
  auto ds = toy_generate(n, 1);
  CHECK(ds.d_v() == 4);
  CHECK(ds.d_c() == 2);
  CHECK(ds.pad_count == 2);
  CHECK(ds.size() == 4 * n);
  CHECK(ds.indices(Split::train_seen).size() == 3 * 8000);
  CHECK(ds.indices(Split::test_seen).size() == 3 * 2000);
  CHECK(ds.indices(Split::test_unseen).size() == n);
  validate_model_ready(ds);

  const double sigma = std::sqrt(kToyNoiseVariance);
  for (int cls = 0; cls < 4; ++cls) {
    double mean[2] = {0, 0}, sq[2] = {0, 0};
    std::size_t count = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] != cls) continue;
      ++count;
      for (int j = 0; j < 2; ++j) {
        mean[j] += ds.visual(i, j);
        sq[j] += ds.visual(i, j) * ds.visual(i, j);
      }
      CHECK(ds.visual(i, 2) == 0.0);
      CHECK(ds.visual(i, 3) == 0.0);
    }
    for (int j = 0; j < 2; ++j) {
      mean[j] /= count;
      const double expected = 2.0 * ds.class_embeddings(cls, j) - 1.0;
      CHECK(std::abs(mean[j] - expected) < 3.0 * sigma / std::sqrt(static_cast<double>(count)));
      const double var = sq[j] / count - mean[j] * mean[j];
      CHECK(std::abs(var - kToyNoiseVariance) < 0.1 * kToyNoiseVariance);
    }
  }
  CHECK(toy_generate(50, 9) == toy_generate(50, 9));
  CHECK_FALSE(toy_generate(50, 9) == toy_generate(50, 10));
}

TEST_CASE("save then load reproduces the dataset bit for bit") {
  auto ds = toy_generate(40, 3);
  for (auto format : {FeatureFormat::csv, FeatureFormat::binary}) {
    auto dir = scratch(format == FeatureFormat::csv ? "rt_csv" : "rt_bin");
    auto manifest = save_dataset(ds, dir, format);
    auto loaded = load_dataset(manifest);
    CHECK(loaded == ds);
    auto again = load_dataset(save_dataset(loaded, dir / "second", format));
    CHECK(again == loaded);
  }
}

TEST_CASE("AwA1-shaped manifest loads and validates") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ZslDataset ds;
  for (int c = 0; c < 50; ++c) ds.class_names.push_back("class" + std::to_string(c));
  ds.class_embeddings = Matrix(50, 85);
  for (auto& v : ds.class_embeddings.values) v = u(rng);
  for (int c = 0; c < 40; ++c) ds.seen_classes.push_back(c);
  for (int c = 40; c < 50; ++c) ds.unseen_classes.push_back(c);
  const std::size_t per_class = 3;
  ds.visual = Matrix(50 * per_class, 2048);
  for (auto& v : ds.visual.values) v = u(rng);
  for (int c = 0; c < 50; ++c) {
    for (std::size_t k = 0; k < per_class; ++k) {
      ds.labels.push_back(c);
      ds.split.push_back(c >= 40 ? Split::test_unseen : (k < 2 ? Split::train_seen : Split::test_seen));
    }
  }
  auto dir = scratch("awa1");
  auto loaded = load_dataset(save_dataset(ds, dir, FeatureFormat::binary));
  CHECK(loaded.d_v() == 2048);
  CHECK(loaded.d_c() == 85);
  CHECK(loaded.seen_classes.size() == 40);
  CHECK(loaded.unseen_classes.size() == 10);
  validate_model_ready(loaded);
  CHECK(pad_to_even(loaded) == loaded);
}

TEST_CASE("manifest errors name the offending record") {
  auto dir = scratch("errors");
  auto manifest = save_dataset(tiny_dataset(), dir);

  SUBCASE("unseen test sample labeled with a seen class") {
    write_text(dir / "splits.csv", "label,split\n0,train_seen\n1,train_seen\n0,test_seen\n1,test_seen\n1,test_unseen\n");
    try {
      load_dataset(manifest);
      FAIL("expected load error");
    } catch (const izf::LoadError& e) {
      CHECK(std::string(e.what()).find("line 6") != std::string::npos);
    }
  }
  SUBCASE("unknown label") {
    write_text(dir / "splits.csv", "label,split\n0,train_seen\n7,train_seen\n0,test_seen\n1,test_seen\n2,test_unseen\n");
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("unknown label 7"), izf::LoadError);
  }
  SUBCASE("width mismatch") {
    write_text(dir / "features.csv", "2,0\n4,1\n3\n5,0.5\n-1,2\n");
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("line 3"), izf::LoadError);
  }
  SUBCASE("overlapping seen and unseen ids") {
    auto text = std::string(R"({"format":"izf-zsl-manifest","version":1,"class_names":["a","b","c"],)"
                            R"("seen_classes":[0,1],"unseen_classes":[1,2],"embeddings":"embeddings.csv",)"
                            R"("features":"features.csv","splits":"splits.csv"})");
    write_text(dir / "manifest.json", text);
    CHECK_THROWS_AS(load_dataset(manifest), izf::LoadError);
  }
  SUBCASE("sample count mismatch") {
    write_text(dir / "splits.csv", "label,split\n0,train_seen\n");
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("features"), izf::LoadError);
  }
  SUBCASE("missing manifest") { CHECK_THROWS_AS(load_dataset(dir / "nope.json"), izf::LoadError); }
}

TEST_CASE("min-max scaling uses train_seen statistics only") {
  auto ds = tiny_dataset();
  auto [scaled, stats] = fit_apply_minmax(ds);
  CHECK(stats.min == std::vector<double>{2, 0});
  CHECK(stats.max == std::vector<double>{4, 1});
  CHECK(scaled.visual(2, 0) == 0.5);  // value 3 in [2, 4]
  CHECK(scaled.visual(2, 1) == 7.0);  // outside the train range, not clipped
  CHECK(scaled.visual(4, 0) == -1.5);

  // recompute from train_seen by hand
  double lo = 1e9, hi = -1e9;
  for (auto i : ds.indices(Split::train_seen)) {
    lo = std::min(lo, ds.visual(i, 0));
    hi = std::max(hi, ds.visual(i, 0));
  }
  CHECK(stats.min[0] == lo);
  CHECK(stats.max[0] == hi);

  auto unit = tiny_dataset();
  unit.visual = Matrix(5, 2, {0, 0, 1, 1, 0.5, 0.25, 0.7, 0.1, 0.3, 0.9});
  CHECK(fit_apply_minmax(unit).first == unit);

  auto constant = tiny_dataset();
  for (std::size_t i = 0; i < 5; ++i) constant.visual(i, 1) = 3.0;
  auto scaled_const = fit_apply_minmax(constant).first;
  for (std::size_t i = 0; i < 5; ++i) CHECK(scaled_const.visual(i, 1) == 0.0);
}

TEST_CASE("padding to an even width above d_c") {
  auto toy_raw = tiny_dataset();
  toy_raw.class_embeddings = Matrix(3, 2, {0, 1, 0, 0, 1, 1});
  auto padded = pad_to_even(toy_raw);
  CHECK(padded.d_v() == 4);
  CHECK(padded.pad_count == 2);
  CHECK(padded.visual(0, 0) == 2.0);
  CHECK(padded.visual(0, 3) == 0.0);

  auto odd = tiny_dataset();
  odd.visual = Matrix(5, 3, 1.0);
  CHECK(pad_to_even(odd).d_v() == 4);
  CHECK(pad_to_even(tiny_dataset()).d_v() == 2);
}

TEST_CASE("validation rejects inconsistent datasets") {
  auto ds = tiny_dataset();
  validate(ds);
  auto bad = ds;
  bad.labels[4] = 1;
  CHECK_THROWS_AS(validate(bad), izf::ContractError);
  bad = ds;
  bad.unseen_classes = {1, 2};
  CHECK_THROWS_AS(validate(bad), izf::ContractError);
  bad = ds;
  bad.labels[0] = 9;
  CHECK_THROWS_AS(validate(bad), izf::ContractError);
  validate_model_ready(ds);
  auto odd = ds;
  odd.visual = Matrix(5, 3, 0.0);
  CHECK_THROWS_AS(validate_model_ready(odd), izf::ContractError);
}
