/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * End-to-end pipeline: ingest -> train -> hybridize -> pow2 -> lower ->
 * simulate -> cost -> report. Every stage reads its inputs from and writes
 * its artifacts to the run directory, so the CLI can run stages
 * individually or all at once. Identical config and seed produce
 * byte-identical artifacts.
 */

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ubmlp/common.hpp"
#include "ubmlp/costmodel.hpp"
#include "ubmlp/dataset.hpp"
#include "ubmlp/lowering.hpp"
#include "ubmlp/mlp.hpp"
#include "ubmlp/serialize.hpp"
#include "ubmlp/simulator.hpp"

namespace ubmlp {

struct RunConfig {
  std::vector<std::string> manifests;
  std::uint64_t seed = 1;
  FixedPointConfig fixed_point;
  Pow2Config pow2;
  Hyperparams hyperparams;
  std::string coefficients_path;  // empty = built-in defaults
  std::string out_dir = "run";
  std::vector<std::string> variants = {"baseline", "hybrid", "hybrid_pow2"};
  int equivalence_count = 1000;
};

inline RunConfig parse_run_config(const nlohmann::json& j,
                                  const std::string& base_dir) {
  RunConfig c;
  auto resolve = [&](const std::string& p) {
    if (p.empty() || p.front() == '/' || base_dir.empty()) return p;
    return base_dir + "/" + p;
  };
  for (const auto& m : j.at("datasets"))
    c.manifests.push_back(resolve(m.get<std::string>()));
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("fixed_point")) {
    c.fixed_point.input_bits = j["fixed_point"].value("input_bits", 3);
    c.fixed_point.weight_bits = j["fixed_point"].value("weight_bits", 5);
  }
  if (j.contains("pow2")) {
    c.pow2.retrain_epochs = j["pow2"].value("retrain_epochs", 2);
    c.pow2.accuracy_threshold = j["pow2"].value("accuracy_threshold", 0.01);
    c.pow2.neuron_order =
        j["pow2"].value("neuron_order", std::string("snap_distance"));
  }
  if (j.contains("hyperparams")) {
    const auto& h = j["hyperparams"];
    c.hyperparams.learning_rate = h.value("learning_rate", 0.05);
    c.hyperparams.epochs = h.value("epochs", 300);
    c.hyperparams.batch_size = h.value("batch_size", 32);
    c.hyperparams.validation_fraction = h.value("validation_fraction", 0.2);
    c.hyperparams.patience = h.value("patience", 60);
    c.hyperparams.weight_clip = h.value("weight_clip", 1.0);
  }
  if (j.contains("coefficients"))
    c.coefficients_path = resolve(j["coefficients"].get<std::string>());
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  if (j.contains("variants"))
    c.variants = j["variants"].get<std::vector<std::string>>();
  if (j.contains("equivalence_count"))
    c.equivalence_count = j["equivalence_count"].get<int>();
  for (const auto& v : c.variants)
    if (v != "baseline" && v != "hybrid" && v != "hybrid_pow2")
      throw validation_error("unknown variant '" + v + "'");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("config file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw validation_error("config parse error: " + std::string(e.what()));
  }
  const auto base = std::filesystem::path(path).parent_path().string();
  RunConfig c = parse_run_config(j, base);
  for (const auto& m : c.manifests)
    if (!std::filesystem::exists(m))
      throw validation_error("dataset manifest not found: " + m);
  if (!c.coefficients_path.empty() &&
      !std::filesystem::exists(c.coefficients_path))
    throw validation_error("coefficient file not found: " +
                           c.coefficients_path);
  return c;
}

/// Hash of the effective configuration, embedded in every artifact so
/// `report` can refuse to aggregate artifacts from mismatched runs.
inline std::string config_hash(const RunConfig& c) {
  std::ostringstream ss;
  ss << c.seed << "|" << c.fixed_point.input_bits << "|"
     << c.fixed_point.weight_bits << "|" << c.pow2.retrain_epochs << "|"
     << c.pow2.accuracy_threshold << "|" << c.pow2.neuron_order << "|"
     << c.hyperparams.learning_rate << "|" << c.hyperparams.epochs << "|"
     << c.hyperparams.batch_size << "|" << c.hyperparams.validation_fraction
     << "|" << c.hyperparams.patience << "|" << c.hyperparams.weight_clip
     << "|" << c.equivalence_count;
  for (const auto& m : c.manifests) ss << "|" << m;
  for (const auto& v : c.variants) ss << "|" << v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(ss.str())));
  return buf;
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw serialization_error("cannot write " + path);
  os << s;
}

inline std::vector<int> quantized_levels(const std::vector<double>& sample,
                                         int levels) {
  std::vector<int> lv(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i)
    lv[i] = quantize_input_level(sample[i], levels);
  return lv;
}

inline void require_artifact(const std::string& path,
                             const std::string& producer_stage) {
  if (!std::filesystem::exists(path))
    throw validation_error("missing artifact " + path + "; run `" +
                           producer_stage + "` first");
}

/// Reads "key value" lines from a small stage report file.
inline std::map<std::string, std::string> read_kv_file(
    const std::string& path) {
  std::ifstream is(path);
  if (!is) throw serialization_error("cannot read " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) continue;
    kv[line.substr(0, sp)] = line.substr(sp + 1);
  }
  return kv;
}

}  // namespace detail

/// Per-dataset stage context: resolved paths, manifest, config hash.
class StageContext {
 public:
  StageContext(const RunConfig& config, const std::string& manifest_path)
      : config_(config),
        manifest_(load_manifest(manifest_path)),
        manifest_dir_(
            std::filesystem::path(manifest_path).parent_path().string()),
        dir_(std::filesystem::path(config.out_dir) / manifest_.name),
        hash_(config_hash(config)) {
    std::filesystem::create_directories(dir_);
  }

  const RunConfig& config() const { return config_; }
  const DatasetManifest& manifest() const { return manifest_; }
  const std::string& hash() const { return hash_; }
  std::string dataset_name() const { return manifest_.name; }

  std::string path(const std::string& file) const {
    return (dir_ / file).string();
  }
  std::string variant_path(const std::string& variant,
                           const std::string& file) const {
    std::filesystem::create_directories(dir_ / variant);
    return (dir_ / variant / file).string();
  }

  Hyperparams hyperparams() const {
    Hyperparams hp = config_.hyperparams;
    hp.seed = sub_seed(config_.seed, manifest_.name + ":train");
    // quantization-aware: layer-1 trains on the unary magnitude grid
    hp.layer1_levels = config_.fixed_point.input_levels();
    return hp;
  }

  Topology topology(int num_features, int num_classes) const {
    if (manifest_.hidden > 0)
      return Topology{num_features, manifest_.hidden, num_classes};
    if (manifest_.mac_ops > 0)
      return infer_topology(num_features, num_classes, manifest_.mac_ops);
    throw validation_error(manifest_.name +
                           ": manifest needs mac_ops or hidden");
  }

  TechCoefficients coefficients() const {
    return config_.coefficients_path.empty()
               ? default_coefficients()
               : load_coefficients(config_.coefficients_path);
  }

  DatasetSnapshot load_snapshot_artifact() const {
    detail::require_artifact(path("dataset.meta.json"), "ingest");
    return load_snapshot(path("dataset.norm.csv"), path("dataset.meta.json"));
  }

  const std::string& manifest_dir() const { return manifest_dir_; }

 private:
  RunConfig config_;
  DatasetManifest manifest_;
  std::string manifest_dir_;
  std::filesystem::path dir_;
  std::string hash_;
};

/* ---- stages ---- */

inline DatasetSnapshot stage_ingest(const StageContext& ctx) {
  Dataset raw = load_csv(ctx.manifest(), ctx.manifest_dir());
  Split split = make_split(
      raw, sub_seed(ctx.config().seed, ctx.dataset_name() + ":split"));
  auto params = fit_normalization(raw, split.train_indices);
  Dataset ds = apply_normalization(raw, params);
  DatasetSnapshot snapshot{ds, split, params};
  save_snapshot(snapshot, ctx.path("dataset.norm.csv"),
                ctx.path("dataset.meta.json"));
  return snapshot;
}

inline std::pair<FloatMlp, QuantizedMlp> stage_train(const StageContext& ctx) {
  auto snapshot = ctx.load_snapshot_artifact();
  const Topology topology = ctx.topology(snapshot.dataset.num_features(),
                                         snapshot.dataset.num_classes);
  FloatMlp fm = train_float(snapshot.dataset, snapshot.split, topology,
                            ctx.hyperparams());
  QuantizedMlp qm = quantize(fm, ctx.config().fixed_point);
  save_model_file(fm, ctx.path("model.float.txt"));
  save_model_file(qm, ctx.path("model.quant.txt"));
  return {fm, qm};
}

inline HybridModel stage_hybridize(const StageContext& ctx) {
  detail::require_artifact(ctx.path("model.quant.txt"), "train");
  HybridModel hm = to_hybrid(load_quantized_model(ctx.path("model.quant.txt")));
  save_model_file(hm, ctx.path("model.hybrid.txt"));
  return hm;
}

inline ConversionStats stage_pow2(const StageContext& ctx) {
  detail::require_artifact(ctx.path("model.float.txt"), "train");
  auto snapshot = ctx.load_snapshot_artifact();
  FloatMlp fm = load_float_model(ctx.path("model.float.txt"));
  auto [model, stats] =
      pow2_retrain(fm, ctx.config().fixed_point, snapshot.dataset,
                   snapshot.split, ctx.config().pow2, ctx.hyperparams());
  QuantizedMlp qm = quantize(model, ctx.config().fixed_point);
  save_model_file(qm, ctx.path("model.pow2.quant.txt"));
  save_model_file(to_hybrid(qm), ctx.path("model.pow2.hybrid.txt"));
  std::ostringstream ss;
  ss << "ubmlp-pow2 v1\n";
  ss << "confighash " << ctx.hash() << "\n";
  ss << "converted_fraction " << detail::fixed6(stats.converted_fraction)
     << "\n";
  ss << "initial_val_accuracy " << detail::fixed6(stats.initial_val_accuracy)
     << "\n";
  ss << "final_val_accuracy " << detail::fixed6(stats.final_val_accuracy)
     << "\n";
  detail::write_text_file(ctx.path("pow2_stats.txt"), ss.str());
  return stats;
}

namespace detail {

inline std::string variant_model_file(const std::string& variant) {
  if (variant == "baseline") return "model.quant.txt";
  if (variant == "hybrid") return "model.hybrid.txt";
  if (variant == "hybrid_pow2") return "model.pow2.hybrid.txt";
  throw validation_error("unknown variant '" + variant + "'");
}

inline std::string variant_model_stage(const std::string& variant) {
  if (variant == "baseline") return "train";
  if (variant == "hybrid") return "hybridize";
  return "pow2";
}

}  // namespace detail

inline LoweredModel stage_lower(const StageContext& ctx,
                                const std::string& variant) {
  const std::string model_file = detail::variant_model_file(variant);
  detail::require_artifact(ctx.path(model_file),
                           detail::variant_model_stage(variant));
  LoweredModel lowered =
      variant == "baseline"
          ? lower_full(load_quantized_model(ctx.path(model_file)))
          : lower_full(load_hybrid_model(ctx.path(model_file)));
  lowered.netlist.name = ctx.dataset_name() + "." + variant;
  lowered.netlist.attrs["confighash"] = ctx.hash();
  save_netlist(lowered.netlist, ctx.variant_path(variant, "netlist.txt"));
  if (variant == "hybrid") {
    std::ostringstream ss;
    ss << "ubmlp-utilization v1\n";
    ss << "confighash " << ctx.hash() << "\n";
    ss << "stream_width " << lowered.utilization.stream_width << "\n";
    ss << "used_bits";
    for (int u : lowered.utilization.used_bits_per_input) ss << " " << u;
    ss << "\n";
    ss << "utilization " << detail::fixed6(lowered.utilization.utilization)
       << "\n";
    detail::write_text_file(ctx.path("utilization.txt"), ss.str());
  }
  return lowered;
}

/// Equivalence campaign plus accuracy evaluation for one variant; writes
/// equivalence.txt and accuracy.txt.
inline EquivalenceReport stage_simulate(const StageContext& ctx,
                                        const std::string& variant) {
  detail::require_artifact(ctx.variant_path(variant, "netlist.txt"), "lower");
  const std::string model_file = detail::variant_model_file(variant);
  detail::require_artifact(ctx.path(model_file),
                           detail::variant_model_stage(variant));
  Netlist nl = load_netlist_file(ctx.variant_path(variant, "netlist.txt"));
  auto snapshot = ctx.load_snapshot_artifact();
  const Dataset& ds = snapshot.dataset;
  const int levels = std::stoi(nl.attrs.at("stream_width")) + 1;
  const int inputs = std::stoi(nl.attrs.at("inputs"));

  LevelOracle oracle;
  double train_acc = 0.0, test_acc = 0.0;
  if (variant == "baseline") {
    auto model = load_quantized_model(ctx.path(model_file));
    oracle = [model, levels](const std::vector<int>& lv) {
      std::vector<double> sample(lv.size());
      for (std::size_t i = 0; i < lv.size(); ++i)
        sample[i] = double(lv[i]) / double(levels - 1);
      return forward_baseline(model, sample);
    };
    train_acc = evaluate_accuracy(model, ds, snapshot.split.train_indices);
    test_acc = evaluate_accuracy(model, ds, snapshot.split.test_indices);
  } else {
    auto model = load_hybrid_model(ctx.path(model_file));
    oracle = [model, levels](const std::vector<int>& lv) {
      std::vector<double> sample(lv.size());
      for (std::size_t i = 0; i < lv.size(); ++i)
        sample[i] = double(lv[i]) / double(levels - 1);
      return forward_hybrid(model, sample);
    };
    train_acc = evaluate_accuracy(model, ds, snapshot.split.train_indices);
    test_acc = evaluate_accuracy(model, ds, snapshot.split.test_indices);
  }

  double space = 1.0;
  for (int i = 0; i < inputs; ++i) space *= levels;
  EquivalencePlan plan;
  if (space <= double(1 << 20)) {
    plan.mode = EquivalencePlan::Mode::exhaustive;
  } else {
    plan.mode = EquivalencePlan::Mode::randomized;
    plan.seed =
        sub_seed(ctx.config().seed, ctx.dataset_name() + ":" + variant + ":equiv");
    const int count = ctx.config().equivalence_count;
    for (int r = 0; r < ds.num_samples() &&
                    static_cast<int>(plan.fixed_vectors.size()) < count;
         ++r)
      plan.fixed_vectors.push_back(
          detail::quantized_levels(ds.features[r], levels - 1));
    plan.count =
        std::max<int>(count, static_cast<int>(plan.fixed_vectors.size()));
  }
  EquivalenceReport eq = check_equivalence(nl, oracle, plan);
  {
    std::ostringstream ss;
    save_equivalence_report(eq, ss);
    ss << "confighash " << ctx.hash() << "\n";
    detail::write_text_file(ctx.variant_path(variant, "equivalence.txt"),
                            ss.str());
  }
  {
    std::ostringstream ss;
    ss << "ubmlp-accuracy v1\n";
    ss << "dataset " << ctx.dataset_name() << "\n";
    ss << "variant " << variant << "\n";
    ss << "train " << detail::fixed6(train_acc) << "\n";
    ss << "test " << detail::fixed6(test_acc) << "\n";
    ss << "confighash " << ctx.hash() << "\n";
    detail::write_text_file(ctx.variant_path(variant, "accuracy.txt"),
                            ss.str());
  }
  return eq;
}

inline CostReport stage_cost(const StageContext& ctx,
                             const std::string& variant) {
  detail::require_artifact(ctx.variant_path(variant, "netlist.txt"), "lower");
  Netlist nl = load_netlist_file(ctx.variant_path(variant, "netlist.txt"));
  CostReport r = estimate(nl, ctx.coefficients());
  std::ostringstream ss;
  save_cost_report(r, ss);
  ss << "confighash " << ctx.hash() << "\n";
  detail::write_text_file(ctx.variant_path(variant, "cost.txt"), ss.str());
  return r;
}

/* ---- report aggregation (reads artifacts back from disk) ---- */

struct VariantSummary {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double area = 0.0;
  double power = 0.0;
  bool equivalence_pass = false;
};

struct DatasetSummary {
  std::string dataset;
  std::map<std::string, VariantSummary> variants;
  double utilization = 0.0;
  double pow2_fraction = 0.0;
};

inline std::vector<DatasetSummary> aggregate_report(const RunConfig& config) {
  const std::string hash = config_hash(config);
  std::vector<DatasetSummary> out;
  for (const auto& mpath : config.manifests) {
    StageContext ctx(config, mpath);
    DatasetSummary s;
    s.dataset = ctx.dataset_name();
    for (const auto& variant : config.variants) {
      detail::require_artifact(ctx.variant_path(variant, "accuracy.txt"),
                               "simulate");
      detail::require_artifact(ctx.variant_path(variant, "cost.txt"), "cost");
      auto acc =
          detail::read_kv_file(ctx.variant_path(variant, "accuracy.txt"));
      auto cost = detail::read_kv_file(ctx.variant_path(variant, "cost.txt"));
      auto eq =
          detail::read_kv_file(ctx.variant_path(variant, "equivalence.txt"));
      for (const auto* kv : {&acc, &cost, &eq}) {
        auto it = kv->find("confighash");
        if (it == kv->end() || it->second != hash)
          throw comparison_error("artifact confighash mismatch under " +
                                 ctx.path("") + " (stale run?)");
      }
      VariantSummary vs;
      vs.train_accuracy = std::stod(acc.at("train"));
      vs.test_accuracy = std::stod(acc.at("test"));
      vs.area = std::stod(cost.at("area"));
      vs.power = std::stod(cost.at("power"));
      vs.equivalence_pass = eq.at("verdict") == "pass";
      s.variants[variant] = vs;
    }
    if (std::filesystem::exists(ctx.path("utilization.txt")))
      s.utilization = std::stod(
          detail::read_kv_file(ctx.path("utilization.txt")).at("utilization"));
    if (std::filesystem::exists(ctx.path("pow2_stats.txt")))
      s.pow2_fraction =
          std::stod(detail::read_kv_file(ctx.path("pow2_stats.txt"))
                        .at("converted_fraction"));
    out.push_back(std::move(s));
  }
  return out;
}

inline std::string summary_csv(const std::vector<DatasetSummary>& results) {
  std::ostringstream ss;
  ss << "dataset,variant,train_acc,test_acc,area,power,area_reduction,"
        "power_reduction,utilization,pow2_fraction,equivalence\n";
  for (const auto& r : results) {
    const VariantSummary* base = nullptr;
    auto bit = r.variants.find("baseline");
    if (bit != r.variants.end()) base = &bit->second;
    for (const auto& [name, v] : r.variants) {
      ss << r.dataset << "," << name << ","
         << detail::fixed6(v.train_accuracy) << ","
         << detail::fixed6(v.test_accuracy) << "," << detail::fixed6(v.area)
         << "," << detail::fixed6(v.power);
      if (base && name != "baseline" && base->area > 0 && base->power > 0)
        ss << "," << detail::fixed6(1.0 - v.area / base->area) << ","
           << detail::fixed6(1.0 - v.power / base->power);
      else
        ss << ",0.000000,0.000000";
      ss << "," << detail::fixed6(r.utilization) << ","
         << detail::fixed6(r.pow2_fraction) << ","
         << (v.equivalence_pass ? "pass" : "fail") << "\n";
    }
  }
  return ss.str();
}

/// Human-readable summary table (one row per dataset/variant).
inline std::string summary_table(const std::vector<DatasetSummary>& results) {
  std::ostringstream ss;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %-12s %8s %10s %10s %8s %8s %6s\n",
                "dataset", "variant", "test%", "area", "power", "dA%", "dP%",
                "equiv");
  ss << buf;
  for (const auto& r : results) {
    const VariantSummary* base = nullptr;
    auto bit = r.variants.find("baseline");
    if (bit != r.variants.end()) base = &bit->second;
    for (const auto& [name, v] : r.variants) {
      double da = 0.0, dp = 0.0;
      if (base && name != "baseline" && base->area > 0) {
        da = 100.0 * (1.0 - v.area / base->area);
        dp = 100.0 * (1.0 - v.power / base->power);
      }
      std::snprintf(buf, sizeof buf,
                    "%-14s %-12s %8.2f %10.1f %10.1f %8.2f %8.2f %6s\n",
                    r.dataset.c_str(), name.c_str(), 100.0 * v.test_accuracy,
                    v.area, v.power, da, dp,
                    v.equivalence_pass ? "pass" : "FAIL");
      ss << buf;
    }
  }
  return ss.str();
}

inline std::vector<DatasetSummary> stage_report(const RunConfig& config) {
  auto results = aggregate_report(config);
  detail::write_text_file(
      (std::filesystem::path(config.out_dir) / "summary.csv").string(),
      summary_csv(results));
  detail::write_text_file(
      (std::filesystem::path(config.out_dir) / "summary.txt").string(),
      summary_table(results));
  return results;
}

/* ---- full pipeline ---- */

inline void run_dataset(const RunConfig& config,
                        const std::string& manifest_path) {
  StageContext ctx(config, manifest_path);
  stage_ingest(ctx);
  stage_train(ctx);
  stage_hybridize(ctx);
  const bool want_pow2 =
      std::find(config.variants.begin(), config.variants.end(),
                "hybrid_pow2") != config.variants.end();
  if (want_pow2) stage_pow2(ctx);
  for (const auto& variant : config.variants) {
    stage_lower(ctx, variant);
    stage_simulate(ctx, variant);
    stage_cost(ctx, variant);
  }
}

inline std::vector<DatasetSummary> run_pipeline(const RunConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  detail::write_text_file(
      (fs::path(config.out_dir) / "run.stamp").string(),
      "ubmlp-run v1\nconfighash " + config_hash(config) + "\nseed " +
          std::to_string(config.seed) + "\n");
  for (const auto& m : config.manifests) run_dataset(config, m);
  return stage_report(config);
}

}  // namespace ubmlp
