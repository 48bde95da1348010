/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Tabular dataset ingestion: CSV + manifest loading, [0,1] normalization
 * with train-only statistics, and seeded 70/30 splits.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ubmlp/common.hpp"

namespace ubmlp {

struct Dataset {
  std::string name;
  std::vector<std::vector<double>> features;  // rows = samples
  std::vector<int> labels;                    // dense, in [0, num_classes)
  int num_classes = 0;

  int num_samples() const { return static_cast<int>(features.size()); }
  int num_features() const {
    return features.empty() ? 0 : static_cast<int>(features.front().size());
  }
};

struct Split {
  std::vector<int> train_indices;
  std::vector<int> test_indices;
  std::uint64_t seed = 0;
};

struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;
};

/// Column spec for load_csv, normally parsed from a manifest JSON file:
/// { "name": ..., "csv": ..., "label_column": ...,
///   "feature_columns": [...], "classes": {"label": index, ...},
///   "mac_ops": optional, "hidden": optional }
struct DatasetManifest {
  std::string name;
  std::string csv_path;
  std::string label_column;
  std::vector<std::string> feature_columns;  // empty = all non-label columns
  std::map<std::string, int> class_map;      // label string -> dense index
  int mac_ops = 0;                           // 0 = unknown
  int hidden = 0;                            // explicit H override, 0 = derive
};

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ingestion_error("manifest not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ingestion_error("manifest parse error in " + path + ": " + e.what());
  }
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  m.csv_path = j.at("csv").get<std::string>();
  m.label_column = j.at("label_column").get<std::string>();
  if (j.contains("feature_columns"))
    m.feature_columns = j["feature_columns"].get<std::vector<std::string>>();
  for (auto& [key, val] : j.at("classes").items())
    m.class_map[key] = val.get<int>();
  if (j.contains("mac_ops")) m.mac_ops = j["mac_ops"].get<int>();
  if (j.contains("hidden")) m.hidden = j["hidden"].get<int>();
  return m;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace detail

/// Loads a CSV per the manifest schema. The first row must be a header
/// naming the columns. Row order is preserved.
inline Dataset load_csv(const DatasetManifest& manifest,
                        const std::string& base_dir = "") {
  const std::string path = base_dir.empty()
                               ? manifest.csv_path
                               : base_dir + "/" + manifest.csv_path;
  std::ifstream in(path);
  if (!in) throw ingestion_error("dataset file not found: " + path);

  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw ingestion_error("empty dataset file: " + path);
  const auto header = detail::split_csv_line(line);

  auto column_index = [&](const std::string& col) {
    auto it = std::find(header.begin(), header.end(), col);
    if (it == header.end())
      throw ingestion_error(path + ": column '" + col + "' not in header");
    return static_cast<int>(it - header.begin());
  };

  const int label_idx = column_index(manifest.label_column);
  std::vector<int> feature_idx;
  if (manifest.feature_columns.empty()) {
    for (int i = 0; i < static_cast<int>(header.size()); ++i)
      if (i != label_idx) feature_idx.push_back(i);
  } else {
    for (const auto& col : manifest.feature_columns)
      feature_idx.push_back(column_index(col));
  }

  Dataset ds;
  ds.name = manifest.name;
  ds.num_classes = 0;
  for (const auto& [_, idx] : manifest.class_map)
    ds.num_classes = std::max(ds.num_classes, idx + 1);

  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ingestion_error(path + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
    std::vector<double> feats;
    feats.reserve(feature_idx.size());
    for (int fi : feature_idx) {
      try {
        std::size_t pos = 0;
        double v = std::stod(cells[fi], &pos);
        if (pos != cells[fi].size()) throw std::invalid_argument("trailing");
        feats.push_back(v);
      } catch (const std::exception&) {
        throw ingestion_error(path + ": non-numeric feature at row " +
                              std::to_string(row) + ", column '" +
                              header[fi] + "'");
      }
    }
    auto it = manifest.class_map.find(cells[label_idx]);
    if (it == manifest.class_map.end())
      throw ingestion_error(path + ": unknown label '" + cells[label_idx] +
                            "' at row " + std::to_string(row) + ", column '" +
                            manifest.label_column + "'");
    ds.features.push_back(std::move(feats));
    ds.labels.push_back(it->second);
  }
  if (ds.features.empty())
    throw ingestion_error(path + ": no data rows");
  return ds;
}

/// Seeded random split; |test| = floor(0.3 * n), |train| = n - |test|.
inline Split make_split(const Dataset& ds, std::uint64_t seed) {
  if (ds.num_samples() == 0) throw ingestion_error("split: empty dataset");
  const int n = ds.num_samples();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }
  const int test_count = static_cast<int>((3LL * n) / 10);
  Split s;
  s.seed = seed;
  s.train_indices.assign(order.begin(), order.end() - test_count);
  s.test_indices.assign(order.end() - test_count, order.end());
  std::sort(s.train_indices.begin(), s.train_indices.end());
  std::sort(s.test_indices.begin(), s.test_indices.end());
  return s;
}

/// Per-column min/max over the given rows (normally the train partition).
inline NormalizationParams fit_normalization(const Dataset& ds,
                                             const std::vector<int>& rows) {
  if (rows.empty()) throw ingestion_error("fit_normalization: no rows");
  const int f = ds.num_features();
  NormalizationParams p;
  p.min.assign(f, 0.0);
  p.max.assign(f, 0.0);
  for (int c = 0; c < f; ++c) {
    double lo = ds.features[rows[0]][c], hi = lo;
    for (int r : rows) {
      lo = std::min(lo, ds.features[r][c]);
      hi = std::max(hi, ds.features[r][c]);
    }
    p.min[c] = lo;
    p.max[c] = hi;
  }
  return p;
}

/// Maps each feature by (x - min)/(max - min), clamped to [0,1]. Constant
/// columns map to 0.
inline Dataset apply_normalization(const Dataset& ds,
                                   const NormalizationParams& p) {
  Dataset out = ds;
  const int f = ds.num_features();
  for (auto& row : out.features) {
    for (int c = 0; c < f; ++c) {
      const double range = p.max[c] - p.min[c];
      double v = range == 0.0 ? 0.0 : (row[c] - p.min[c]) / range;
      row[c] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

/// Convenience: fit on all rows, then apply.
inline std::pair<Dataset, NormalizationParams> normalize(const Dataset& ds) {
  std::vector<int> all(ds.num_samples());
  for (int i = 0; i < ds.num_samples(); ++i) all[i] = i;
  auto p = fit_normalization(ds, all);
  return {apply_normalization(ds, p), p};
}

}  // namespace ubmlp
