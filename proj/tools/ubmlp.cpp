/* ubmlp: hybrid unary-binary MLP hardware toolchain
 *
 * Command-line driver. Stages read prior artifacts from the run directory
 * and write their own; `run` executes the whole pipeline. Exit codes:
 * 0 success, 2 validation error, 3 stage error, 4 equivalence failure.
 */

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ubmlp/pipeline.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitStage = 3;
constexpr int kExitEquivalence = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  std::string dataset_filter;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration JSON")
      ->required();
  cmd->add_option("--out", args.out_override, "run directory override");
  cmd->add_option("--seed", args.seed_override, "seed override")
      ->each([&](const std::string&) { args.has_seed = true; });
  cmd->add_option("--dataset", args.dataset_filter,
                  "restrict to one dataset by manifest name");
}

ubmlp::RunConfig make_config(const CommonArgs& args) {
  ubmlp::RunConfig config = ubmlp::load_run_config(args.config_path);
  if (!args.out_override.empty()) config.out_dir = args.out_override;
  if (args.has_seed) config.seed = args.seed_override;
  return config;
}

std::vector<std::string> selected_manifests(const ubmlp::RunConfig& config,
                                            const CommonArgs& args) {
  if (args.dataset_filter.empty()) return config.manifests;
  for (const auto& m : config.manifests)
    if (ubmlp::load_manifest(m).name == args.dataset_filter) return {m};
  throw ubmlp::validation_error("dataset '" + args.dataset_filter +
                                "' not in config");
}

std::vector<std::string> selected_variants(const ubmlp::RunConfig& config,
                                           const std::string& variant) {
  if (variant.empty()) return config.variants;
  return {variant};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid unary-binary MLP hardware toolchain"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string variant;

  auto* run = app.add_subcommand("run", "run every stage for every dataset");
  add_common(run, args);

  auto* ingest = app.add_subcommand(
      "ingest", "load CSV + manifest, normalize, split, snapshot");
  add_common(ingest, args);

  auto* train =
      app.add_subcommand("train", "train float MLP and quantize baseline");
  add_common(train, args);

  auto* hybridize = app.add_subcommand(
      "hybridize", "convert the quantized baseline to the hybrid model");
  add_common(hybridize, args);

  auto* pow2 = app.add_subcommand(
      "pow2", "layer-aware power-of-two retraining of the binary layer");
  add_common(pow2, args);

  auto* lower = app.add_subcommand("lower", "lower models to netlists");
  add_common(lower, args);
  lower->add_option("--variant", variant, "baseline|hybrid|hybrid_pow2");

  auto* simulate = app.add_subcommand(
      "simulate", "equivalence campaign + accuracy per variant");
  add_common(simulate, args);
  simulate->add_option("--variant", variant, "baseline|hybrid|hybrid_pow2");

  auto* cost =
      app.add_subcommand("cost", "area/power proxies from gate counts");
  add_common(cost, args);
  cost->add_option("--variant", variant, "baseline|hybrid|hybrid_pow2");

  auto* report = app.add_subcommand(
      "report", "aggregate completed runs into summary.csv / summary.txt");
  add_common(report, args);

  auto* export_hdl = app.add_subcommand(
      "export-hdl", "export a lowered netlist as structural Verilog");
  add_common(export_hdl, args);
  export_hdl->add_option("--variant", variant, "baseline|hybrid|hybrid_pow2");

  CLI11_PARSE(app, argc, argv);

  try {
    const ubmlp::RunConfig config = make_config(args);
    const auto manifests = selected_manifests(config, args);

    if (run->parsed()) {
      ubmlp::RunConfig c = config;
      c.manifests = manifests;
      auto results = ubmlp::run_pipeline(c);
      std::cout << ubmlp::summary_table(results);
      for (const auto& r : results)
        for (const auto& [_, v] : r.variants)
          if (!v.equivalence_pass) return kExitEquivalence;
      return 0;
    }
    if (report->parsed()) {
      ubmlp::RunConfig c = config;
      c.manifests = manifests;
      auto results = ubmlp::stage_report(c);
      std::cout << ubmlp::summary_table(results);
      return 0;
    }

    bool equivalence_ok = true;
    for (const auto& mpath : manifests) {
      ubmlp::StageContext ctx(config, mpath);
      if (ingest->parsed()) {
        ubmlp::stage_ingest(ctx);
        std::cout << ctx.dataset_name() << ": ingested\n";
      } else if (train->parsed()) {
        ubmlp::stage_train(ctx);
        std::cout << ctx.dataset_name() << ": trained\n";
      } else if (hybridize->parsed()) {
        ubmlp::stage_hybridize(ctx);
        std::cout << ctx.dataset_name() << ": hybridized\n";
      } else if (pow2->parsed()) {
        auto stats = ubmlp::stage_pow2(ctx);
        std::cout << ctx.dataset_name() << ": pow2 converted "
                  << 100.0 * stats.converted_fraction << "% of layer-2 weights\n";
      } else if (lower->parsed()) {
        for (const auto& v : selected_variants(config, variant)) {
          auto lowered = ubmlp::stage_lower(ctx, v);
          std::cout << ctx.dataset_name() << "/" << v << ": "
                    << lowered.netlist.gates.size() << " gates\n";
        }
      } else if (simulate->parsed()) {
        for (const auto& v : selected_variants(config, variant)) {
          auto eq = ubmlp::stage_simulate(ctx, v);
          std::cout << ctx.dataset_name() << "/" << v << ": "
                    << (eq.pass() ? "equivalent" : "MISMATCH") << " over "
                    << eq.samples << " vectors (" << eq.plan << ")\n";
          equivalence_ok = equivalence_ok && eq.pass();
        }
      } else if (cost->parsed()) {
        for (const auto& v : selected_variants(config, variant)) {
          auto r = ubmlp::stage_cost(ctx, v);
          std::cout << ctx.dataset_name() << "/" << v << ": area " << r.area
                    << " power " << r.power << "\n";
        }
      } else if (export_hdl->parsed()) {
        for (const auto& v : selected_variants(config, variant)) {
          const std::string in = ctx.variant_path(v, "netlist.txt");
          if (!std::filesystem::exists(in))
            throw ubmlp::validation_error("missing artifact " + in +
                                          "; run `lower` first");
          auto nl = ubmlp::load_netlist_file(in);
          std::ofstream os(ctx.variant_path(v, "netlist.v"),
                           std::ios::binary);
          ubmlp::export_verilog(nl, os);
          std::cout << ctx.dataset_name() << "/" << v << ": wrote netlist.v\n";
        }
      }
    }
    return equivalence_ok ? 0 : kExitEquivalence;
  } catch (const ubmlp::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ubmlp::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
