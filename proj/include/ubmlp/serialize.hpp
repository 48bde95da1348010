/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Versioned text serialization for models and normalized dataset
 * snapshots. Floats are written as hexfloats so round-trips are
 * bit-exact; all iteration orders are fixed, so identical inputs produce
 * byte-identical files.
 */

#pragma once

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ubmlp/common.hpp"
#include "ubmlp/dataset.hpp"
#include "ubmlp/mlp.hpp"

namespace ubmlp {

namespace detail {

inline std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw serialization_error("bad number: " + s);
  return v;
}

}  // namespace detail

/* ---- model format ----
 * ubmlp-model v1
 * kind float|quant|hybrid
 * topology I H C
 * config k w            (quant/hybrid)
 * then one line per tensor: name followed by row-major values
 */

inline void save_model(const FloatMlp& m, std::ostream& os) {
  os << "ubmlp-model v1\nkind float\n";
  os << "topology " << m.topology.inputs << " " << m.topology.hidden << " "
     << m.topology.classes << "\n";
  auto dump = [&](const char* name, const std::vector<std::vector<double>>& w) {
    os << name;
    for (const auto& row : w)
      for (double v : row) os << " " << detail::hexfloat(v);
    os << "\n";
  };
  auto dumpv = [&](const char* name, const std::vector<double>& v) {
    os << name;
    for (double x : v) os << " " << detail::hexfloat(x);
    os << "\n";
  };
  dump("w1", m.w1);
  dumpv("b1", m.b1);
  dump("w2", m.w2);
  dumpv("b2", m.b2);
  os << "end\n";
}

inline void save_model(const QuantizedMlp& m, std::ostream& os) {
  os << "ubmlp-model v1\nkind quant\n";
  os << "topology " << m.topology.inputs << " " << m.topology.hidden << " "
     << m.topology.classes << "\n";
  os << "config " << m.config.input_bits << " " << m.config.weight_bits
     << "\n";
  auto dump = [&](const char* name, const std::vector<std::vector<int>>& w) {
    os << name;
    for (const auto& row : w)
      for (int v : row) os << " " << v;
    os << "\n";
  };
  dump("w1", m.w1);
  os << "b1";
  for (auto v : m.b1) os << " " << v;
  os << "\n";
  dump("w2", m.w2);
  os << "b2";
  for (auto v : m.b2) os << " " << v;
  os << "\nend\n";
}

inline void save_model(const HybridModel& m, std::ostream& os) {
  os << "ubmlp-model v1\nkind hybrid\n";
  os << "topology " << m.topology.inputs << " " << m.topology.hidden << " "
     << m.topology.classes << "\n";
  os << "config " << m.config.input_bits << " " << m.config.weight_bits
     << "\n";
  os << "stream_width " << m.stream_width << "\n";
  auto dump = [&](const char* name, const std::vector<std::vector<int>>& w) {
    os << name;
    for (const auto& row : w)
      for (int v : row) os << " " << v;
    os << "\n";
  };
  dump("sign", m.sign);
  dump("count", m.count);
  os << "b1";
  for (auto v : m.b1) os << " " << v;
  os << "\n";
  dump("w2", m.w2);
  os << "b2";
  for (auto v : m.b2) os << " " << v;
  os << "\nend\n";
}

template <typename M>
inline void save_model_file(const M& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw serialization_error("cannot write " + path);
  save_model(m, os);
}

namespace detail {

struct ModelText {
  std::string kind;
  Topology topology;
  FixedPointConfig config;
  int stream_width = 0;
  std::map<std::string, std::vector<std::string>> tensors;
};

inline ModelText parse_model_text(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "ubmlp-model v1")
    throw serialization_error("bad model header");
  ModelText mt;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "end") break;
    if (tok == "kind") {
      ss >> mt.kind;
    } else if (tok == "topology") {
      ss >> mt.topology.inputs >> mt.topology.hidden >> mt.topology.classes;
    } else if (tok == "config") {
      ss >> mt.config.input_bits >> mt.config.weight_bits;
    } else if (tok == "stream_width") {
      ss >> mt.stream_width;
    } else {
      std::vector<std::string> vals;
      std::string v;
      while (ss >> v) vals.push_back(v);
      mt.tensors[tok] = std::move(vals);
    }
  }
  if (mt.kind.empty()) throw serialization_error("model has no kind");
  return mt;
}

template <typename T, typename Conv>
inline std::vector<std::vector<T>> reshape(const std::vector<std::string>& v,
                                           int rows, int cols, Conv conv) {
  if (static_cast<int>(v.size()) != rows * cols)
    throw serialization_error("tensor size mismatch");
  std::vector<std::vector<T>> out(rows, std::vector<T>(cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out[r][c] = conv(v[r * cols + c]);
  return out;
}

}  // namespace detail

inline std::string peek_model_kind(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw serialization_error("cannot read " + path);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  if (line.rfind("kind ", 0) != 0)
    throw serialization_error("bad model file " + path);
  return line.substr(5);
}

inline FloatMlp load_float_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw serialization_error("cannot read " + path);
  auto mt = detail::parse_model_text(is);
  if (mt.kind != "float")
    throw serialization_error(path + " is not a float model");
  auto d = [](const std::string& s) { return detail::parse_double(s); };
  FloatMlp m;
  m.topology = mt.topology;
  m.w1 = detail::reshape<double>(mt.tensors.at("w1"), mt.topology.hidden,
                                 mt.topology.inputs, d);
  m.w2 = detail::reshape<double>(mt.tensors.at("w2"), mt.topology.classes,
                                 mt.topology.hidden, d);
  for (const auto& s : mt.tensors.at("b1")) m.b1.push_back(d(s));
  for (const auto& s : mt.tensors.at("b2")) m.b2.push_back(d(s));
  return m;
}

inline QuantizedMlp load_quantized_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw serialization_error("cannot read " + path);
  auto mt = detail::parse_model_text(is);
  if (mt.kind != "quant")
    throw serialization_error(path + " is not a quantized model");
  auto i = [](const std::string& s) { return std::stoi(s); };
  QuantizedMlp m;
  m.topology = mt.topology;
  m.config = mt.config;
  m.w1 = detail::reshape<int>(mt.tensors.at("w1"), mt.topology.hidden,
                              mt.topology.inputs, i);
  m.w2 = detail::reshape<int>(mt.tensors.at("w2"), mt.topology.classes,
                              mt.topology.hidden, i);
  for (const auto& s : mt.tensors.at("b1")) m.b1.push_back(std::stoll(s));
  for (const auto& s : mt.tensors.at("b2")) m.b2.push_back(std::stoll(s));
  return m;
}

inline HybridModel load_hybrid_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw serialization_error("cannot read " + path);
  auto mt = detail::parse_model_text(is);
  if (mt.kind != "hybrid")
    throw serialization_error(path + " is not a hybrid model");
  auto i = [](const std::string& s) { return std::stoi(s); };
  HybridModel m;
  m.topology = mt.topology;
  m.config = mt.config;
  m.stream_width = mt.stream_width;
  m.sign = detail::reshape<int>(mt.tensors.at("sign"), mt.topology.hidden,
                                mt.topology.inputs, i);
  m.count = detail::reshape<int>(mt.tensors.at("count"), mt.topology.hidden,
                                 mt.topology.inputs, i);
  m.w2 = detail::reshape<int>(mt.tensors.at("w2"), mt.topology.classes,
                              mt.topology.hidden, i);
  for (const auto& s : mt.tensors.at("b1")) m.b1.push_back(std::stoll(s));
  for (const auto& s : mt.tensors.at("b2")) m.b2.push_back(std::stoll(s));
  return m;
}

/* ---- normalized dataset snapshot: CSV + JSON sidecar ---- */

struct DatasetSnapshot {
  Dataset dataset;  // normalized
  Split split;
  NormalizationParams params;
};

inline void save_snapshot(const DatasetSnapshot& s, const std::string& csv_path,
                          const std::string& meta_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw serialization_error("cannot write " + csv_path);
  const int f = s.dataset.num_features();
  for (int c = 0; c < f; ++c) csv << "f" << c << ",";
  csv << "label\n";
  for (int r = 0; r < s.dataset.num_samples(); ++r) {
    for (int c = 0; c < f; ++c)
      csv << detail::hexfloat(s.dataset.features[r][c]) << ",";
    csv << s.dataset.labels[r] << "\n";
  }

  nlohmann::json j;
  j["name"] = s.dataset.name;
  j["num_classes"] = s.dataset.num_classes;
  j["seed"] = s.split.seed;
  j["train_indices"] = s.split.train_indices;
  j["test_indices"] = s.split.test_indices;
  nlohmann::json cols = nlohmann::json::array();
  for (int c = 0; c < f; ++c)
    cols.push_back({{"min", detail::hexfloat(s.params.min[c])},
                    {"max", detail::hexfloat(s.params.max[c])}});
  j["columns"] = cols;
  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) throw serialization_error("cannot write " + meta_path);
  meta << j.dump(2) << "\n";
}

inline DatasetSnapshot load_snapshot(const std::string& csv_path,
                                     const std::string& meta_path) {
  std::ifstream meta(meta_path);
  if (!meta) throw serialization_error("cannot read " + meta_path);
  nlohmann::json j;
  meta >> j;
  DatasetSnapshot s;
  s.dataset.name = j.at("name").get<std::string>();
  s.dataset.num_classes = j.at("num_classes").get<int>();
  s.split.seed = j.at("seed").get<std::uint64_t>();
  s.split.train_indices = j.at("train_indices").get<std::vector<int>>();
  s.split.test_indices = j.at("test_indices").get<std::vector<int>>();
  for (const auto& col : j.at("columns")) {
    s.params.min.push_back(
        detail::parse_double(col.at("min").get<std::string>()));
    s.params.max.push_back(
        detail::parse_double(col.at("max").get<std::string>()));
  }

  std::ifstream csv(csv_path);
  if (!csv) throw serialization_error("cannot read " + csv_path);
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    std::vector<double> feats;
    for (std::size_t c = 0; c + 1 < cells.size(); ++c)
      feats.push_back(detail::parse_double(cells[c]));
    s.dataset.features.push_back(std::move(feats));
    s.dataset.labels.push_back(std::stoi(cells.back()));
  }
  return s;
}

}  // namespace ubmlp
