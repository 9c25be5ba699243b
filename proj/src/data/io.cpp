#include "izf/data/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "izf/errors.hpp"
#include "izf/numcore/binary_io.hpp"
#include "izf/numcore/text.hpp"

namespace izf::data {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::string_view kMatrixMagic{"IZFMAT01", 8};
constexpr const char* kManifestFormat = "izf-zsl-manifest";

std::ifstream open_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  return in;
}

std::string where(const fs::path& path, std::size_t line) {
  return path.filename().string() + " line " + std::to_string(line);
}

}  // namespace

Matrix read_matrix_csv(const fs::path& path) {
  auto in = open_text(path);
  Matrix m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = numcore::trim(line);
    if (text.empty()) continue;
    auto fields = numcore::split(text, ',');
    if (m.rows == 0) {
      m.cols = fields.size();
    } else if (fields.size() != m.cols) {
      throw LoadError(where(path, line_no) + ": expected " + std::to_string(m.cols) + " values, got " +
                      std::to_string(fields.size()));
    }
    for (auto f : fields) {
      double v = 0.0;
      if (!numcore::parse_double(f, v)) {
        throw LoadError(where(path, line_no) + ": invalid number '" + std::string(f) + "'");
      }
      m.values.push_back(v);
    }
    ++m.rows;
  }
  return m;
}

void write_matrix_csv(const Matrix& m, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw LoadError("cannot write " + path.string());
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ',';
      out << numcore::format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_binary(const fs::path& path) {
  auto bytes = numcore::read_file_bytes(path);
  numcore::ByteReader<LoadError> r(bytes, path.filename().string());
  if (r.bytes(kMatrixMagic.size()) != kMatrixMagic) throw LoadError(path.filename().string() + ": bad magic");
  const auto rows = r.u64();
  const auto cols = r.u64();
  if (cols != 0 && rows > r.remaining() / 8 / cols) {
    throw LoadError(path.filename().string() + ": header claims more data than the file holds");
  }
  if (r.remaining() != rows * cols * 8) {
    throw LoadError(path.filename().string() + ": payload size does not match header");
  }
  Matrix m(rows, cols);
  r.f64s(m.values);
  return m;
}

void write_matrix_binary(const Matrix& m, const fs::path& path) {
  numcore::ByteWriter w;
  w.bytes(kMatrixMagic);
  w.u64(m.rows);
  w.u64(m.cols);
  w.f64s(m.values);
  numcore::write_file_bytes(path, w.buffer());
}

ZslDataset load_dataset(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path)) throw LoadError("manifest not found: " + manifest_path.string());
  json doc;
  try {
    auto in = open_text(manifest_path);
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError("manifest " + manifest_path.string() + ": " + e.what());
  }
  const fs::path base = manifest_path.parent_path();
  ZslDataset ds;
  try {
    if (doc.value("format", std::string()) != kManifestFormat) {
      throw LoadError("manifest: format must be \"" + std::string(kManifestFormat) + "\"");
    }
    if (doc.value("version", 0) != 1) throw LoadError("manifest: unsupported version");
    ds.class_names = doc.at("class_names").get<std::vector<std::string>>();
    ds.seen_classes = doc.at("seen_classes").get<std::vector<int>>();
    ds.unseen_classes = doc.at("unseen_classes").get<std::vector<int>>();
    ds.pad_count = doc.value("pad_count", std::size_t{0});

    ds.class_embeddings = read_matrix_csv(base / doc.at("embeddings").get<std::string>());

    const fs::path features = base / doc.at("features").get<std::string>();
    std::string format = doc.value("feature_format", features.extension() == ".bin" ? "binary" : "csv");
    if (format == "csv") {
      ds.visual = read_matrix_csv(features);
    } else if (format == "binary") {
      ds.visual = read_matrix_binary(features);
    } else {
      throw LoadError("manifest: unknown feature_format '" + format + "'");
    }

    const fs::path splits = base / doc.at("splits").get<std::string>();
    auto in = open_text(splits);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto text = numcore::trim(line);
      if (text.empty() || (line_no == 1 && text == "label,split")) continue;
      auto fields = numcore::split(text, ',');
      long long label = 0;
      if (fields.size() != 2 || !numcore::parse_long(fields[0], label)) {
        throw LoadError(where(splits, line_no) + ": expected 'label,split'");
      }
      if (label < 0 || static_cast<std::size_t>(label) >= ds.class_names.size()) {
        throw LoadError(where(splits, line_no) + ": unknown label " + std::to_string(label));
      }
      Split tag;
      try {
        tag = split_from_string(std::string(numcore::trim(fields[1])));
      } catch (const ContractError& e) {
        throw LoadError(where(splits, line_no) + ": " + e.what());
      }
      const int y = static_cast<int>(label);
      const bool unseen_label =
          std::find(ds.unseen_classes.begin(), ds.unseen_classes.end(), y) != ds.unseen_classes.end();
      if ((tag == Split::test_unseen) != unseen_label) {
        throw LoadError(where(splits, line_no) + ": " + to_string(tag) + " sample labeled " +
                        (unseen_label ? "unseen" : "seen") + " class " + std::to_string(y));
      }
      ds.labels.push_back(y);
      ds.split.push_back(tag);
    }
  } catch (const json::exception& e) {
    throw LoadError("manifest " + manifest_path.string() + ": " + e.what());
  }

  if (ds.class_embeddings.rows != ds.class_names.size()) {
    throw LoadError("embeddings: " + std::to_string(ds.class_embeddings.rows) + " rows for " +
                    std::to_string(ds.class_names.size()) + " classes");
  }
  if (ds.visual.rows != ds.labels.size()) {
    throw LoadError("features: " + std::to_string(ds.visual.rows) + " rows but splits list " +
                    std::to_string(ds.labels.size()) + " samples");
  }
  try {
    validate(ds);
  } catch (const ContractError& e) {
    throw LoadError(e.what());
  }
  return ds;
}

fs::path save_dataset(const ZslDataset& ds, const fs::path& dir, FeatureFormat format) {
  validate(ds);
  fs::create_directories(dir);
  const std::string features = format == FeatureFormat::csv ? "features.csv" : "features.bin";
  write_matrix_csv(ds.class_embeddings, dir / "embeddings.csv");
  if (format == FeatureFormat::csv) {
    write_matrix_csv(ds.visual, dir / features);
  } else {
    write_matrix_binary(ds.visual, dir / features);
  }
  {
    std::ofstream out(dir / "splits.csv", std::ios::trunc);
    if (!out) throw LoadError("cannot write " + (dir / "splits.csv").string());
    out << "label,split\n";
    for (std::size_t i = 0; i < ds.size(); ++i) out << ds.labels[i] << ',' << to_string(ds.split[i]) << '\n';
  }
  json doc = {{"format", kManifestFormat},
              {"version", 1},
              {"class_names", ds.class_names},
              {"seen_classes", ds.seen_classes},
              {"unseen_classes", ds.unseen_classes},
              {"embeddings", "embeddings.csv"},
              {"features", features},
              {"feature_format", format == FeatureFormat::csv ? "csv" : "binary"},
              {"splits", "splits.csv"},
              {"pad_count", ds.pad_count}};
  const fs::path manifest = dir / "manifest.json";
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw LoadError("cannot write " + manifest.string());
  out << doc.dump(2) << '\n';
  return manifest;
}

}  // namespace izf::data
