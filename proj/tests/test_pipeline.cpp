// End-to-end pipeline: staged artifacts, determinism, config validation,
// and stage-ordering errors.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <ubmlp/pipeline.hpp>

using namespace ubmlp;
namespace fs = std::filesystem;

namespace {

const std::string kBalanceManifest =
    std::string(UBMLP_DATA_DIR) + "/manifests/balance_scale.json";

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig fast_config(const std::string& out_dir) {
  RunConfig c;
  c.manifests = {kBalanceManifest};
  c.seed = 7;
  c.hyperparams.epochs = 150;
  c.hyperparams.patience = 40;
  c.out_dir = out_dir;
  c.equivalence_count = 200;
  return c;
}

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("run config parses and validates") {
  auto dir = fresh_dir("ubmlp_cfg");
  auto cfg_path = dir / "run.json";
  {
    std::ofstream os(cfg_path);
    os << R"({
      "datasets": [")" << kBalanceManifest << R"("],
      "seed": 5,
      "fixed_point": {"input_bits": 3, "weight_bits": 5},
      "hyperparams": {"epochs": 10},
      "variants": ["baseline", "hybrid"],
      "out": "somewhere"
    })";
  }
  RunConfig c = load_run_config(cfg_path.string());
  CHECK(c.seed == 5);
  CHECK(c.hyperparams.epochs == 10);
  CHECK(c.hyperparams.batch_size == 32);  // default survives partial config
  CHECK(c.variants == std::vector<std::string>{"baseline", "hybrid"});

  CHECK_THROWS_AS(load_run_config((dir / "missing.json").string()),
                  validation_error);
  {
    std::ofstream os(dir / "bad.json");
    os << "{broken";
  }
  CHECK_THROWS_AS(load_run_config((dir / "bad.json").string()),
                  validation_error);
  {
    std::ofstream os(dir / "badvariant.json");
    os << R"({"datasets": [")" << kBalanceManifest
       << R"("], "variants": ["mystery"]})";
  }
  CHECK_THROWS_AS(load_run_config((dir / "badvariant.json").string()),
                  validation_error);
  {
    std::ofstream os(dir / "badmanifest.json");
    os << R"({"datasets": ["/nonexistent/m.json"]})";
  }
  CHECK_THROWS_AS(load_run_config((dir / "badmanifest.json").string()),
                  validation_error);
}

TEST_CASE("config hash tracks effective settings") {
  RunConfig a = fast_config("x");
  RunConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.seed = 8;
  CHECK(config_hash(a) != config_hash(b));
  RunConfig c = a;
  c.out_dir = "elsewhere";  // output location must not affect the hash
  CHECK(config_hash(a) == config_hash(c));
}

TEST_CASE("stages demand their predecessors' artifacts") {
  auto dir = fresh_dir("ubmlp_stage_order");
  RunConfig config = fast_config(dir.string());
  StageContext ctx(config, kBalanceManifest);
  try {
    stage_train(ctx);
    FAIL("expected validation_error");
  } catch (const validation_error& e) {
    CHECK(std::string(e.what()).find("run `ingest` first") !=
          std::string::npos);
  }
  CHECK_THROWS_AS(stage_hybridize(ctx), validation_error);
  CHECK_THROWS_AS(stage_lower(ctx, "baseline"), validation_error);
  CHECK_THROWS_AS(stage_simulate(ctx, "hybrid"), validation_error);
  CHECK_THROWS_AS(stage_cost(ctx, "hybrid"), validation_error);
  CHECK_THROWS_AS(aggregate_report(config), validation_error);
}

TEST_CASE("full pipeline writes every artifact and is byte-deterministic") {
  auto dir1 = fresh_dir("ubmlp_run1");
  auto dir2 = fresh_dir("ubmlp_run2");
  RunConfig c1 = fast_config(dir1.string());
  RunConfig c2 = fast_config(dir2.string());

  auto results = run_pipeline(c1);
  REQUIRE(results.size() == 1);
  CHECK(results[0].dataset == "balance_scale");
  for (const auto& variant : c1.variants) {
    const auto& vs = results[0].variants.at(variant);
    CHECK(vs.equivalence_pass);
    CHECK(vs.area > 0);
    CHECK(vs.power > 0);
    CHECK(vs.test_accuracy > 0.5);  // sanity only; acceptance checks targets
  }

  const fs::path ds = dir1 / "balance_scale";
  for (const char* f :
       {"dataset.norm.csv", "dataset.meta.json", "model.float.txt",
        "model.quant.txt", "model.hybrid.txt", "model.pow2.quant.txt",
        "model.pow2.hybrid.txt", "pow2_stats.txt", "utilization.txt"})
    CHECK(fs::exists(ds / f));
  for (const char* v : {"baseline", "hybrid", "hybrid_pow2"})
    for (const char* f : {"netlist.txt", "equivalence.txt", "accuracy.txt",
                          "cost.txt"})
      CHECK(fs::exists(ds / v / f));
  CHECK(fs::exists(dir1 / "summary.csv"));
  CHECK(fs::exists(dir1 / "summary.txt"));

  run_pipeline(c2);
  CHECK(slurp(dir1 / "summary.csv") == slurp(dir2 / "summary.csv"));
  for (const char* v : {"baseline", "hybrid", "hybrid_pow2"})
    CHECK(slurp(dir1 / "balance_scale" / v / "netlist.txt") ==
          slurp(dir2 / "balance_scale" / v / "netlist.txt"));
  CHECK(slurp(dir1 / "balance_scale" / "model.float.txt") ==
        slurp(dir2 / "balance_scale" / "model.float.txt"));

  // report refuses stale artifacts from a different configuration
  RunConfig stale = c1;
  stale.seed = 999;
  CHECK_THROWS_AS(aggregate_report(stale), comparison_error);
}
