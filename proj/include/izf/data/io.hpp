#pragma once

#include <filesystem>

#include "izf/data/dataset.hpp"

namespace izf::data {

enum class FeatureFormat { csv, binary };

// Manifest: a JSON document next to its data files.
//
//   {
//     "format": "izf-zsl-manifest", "version": 1,
//     "class_names": ["A", ...],
//     "seen_classes": [0, 1, 2], "unseen_classes": [3],
//     "embeddings": "embeddings.csv",       // n_classes rows, d_c columns
//     "features": "features.csv",           // n_samples rows, d_v columns
//     "feature_format": "csv" | "binary",   // optional, inferred from extension
//     "splits": "splits.csv",               // header "label,split", one row per sample
//     "pad_count": 0                        // optional
//   }
//
// Binary matrices: "IZFMAT01", u64 rows, u64 cols, then row-major f64, all
// little-endian. CSV values use shortest round-trip decimal text.
ZslDataset load_dataset(const std::filesystem::path& manifest_path);

// Writes manifest.json plus data files into `dir`; returns the manifest path.
std::filesystem::path save_dataset(const ZslDataset& ds, const std::filesystem::path& dir,
                                   FeatureFormat format = FeatureFormat::csv);

Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix read_matrix_binary(const std::filesystem::path& path);
void write_matrix_binary(const Matrix& m, const std::filesystem::path& path);

}  // namespace izf::data
