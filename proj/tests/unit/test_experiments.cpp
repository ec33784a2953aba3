#include "roughlab/csv.hpp"
#include "roughlab/experiments.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

using namespace roughlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Small parameter sets so every experiment runs in well under a second.
const std::map<std::string, json>& quick_params() {
  static const std::map<std::string, json> m = {
      {"pvar-oracle", {{"cases", 40}}},
      {"lift-consistency", {{"cases", 10}, {"triples", 10}}},
      {"translate-consistency", {{"cases", 10}}},
      {"nalpha-tails", {{"n", 32}, {"trials", 10000}, {"shift_trials", 10}, {"shift_n", 33}}},
      {"additive-lipschitz", {{"trials", 20}, {"n", 65}}},
      {"sobolev-ratio", {{"trials", 3}, {"n", 33}}},
      {"rde-convergence", {{"n", 1025}, {"coarse_level", 4}, {"refinements", 2}, {"tolerance", 1e-3}}},
      {"rde-shift", {{"trials", 20}, {"n", 33}}},
      {"t2-finite-dim", {{"cases", 20}}},
      {"t2-shift-path", {{"trials", 10}, {"n", 33}}},
      {"pushforward", {{"cases", 2}, {"samples", 40}, {"bootstrap", 2}}},
      {"metric-axioms", {{"triples", 2}, {"points", 6}, {"path_points", 4}, {"grid_level", 3}}},
      {"empirical-concentration", {{"n_grid", {2, 8}}, {"trials", 10}, {"reference", 16}}},
      {"fernique", {{"n", 64}, {"trials", 10000}}},
  };
  return m;
}

ExperimentConfig quick(const std::string& name, std::uint64_t seed = 1, std::size_t threads = 1) {
  return parse_config(json{{"experiment", name}, {"params", quick_params().at(name)}, {"seed", seed},
                           {"threads", threads}});
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("roughlab_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("registry") {
  const auto& list = list_experiments();
  CHECK(list.size() == 14);
  for (const auto& e : list) {
    CHECK(is_experiment(e.name));
    CHECK_FALSE(e.description.empty());
    CHECK(quick_params().count(e.name) == 1);
  }
  CHECK(nearest_experiment("pvar-oracel") == "pvar-oracle");
  CHECK(nearest_experiment("fernik") == "fernique");
}

TEST_CASE("config validation") {
  CHECK(error_of("{not json").find("malformed JSON") != std::string::npos);
  CHECK(error_of("[1, 2]").find("object") != std::string::npos);
  CHECK(error_of(R"({"params": {}})").find("experiment") != std::string::npos);
  const std::string unknown = error_of(R"({"experiment": "t2-finite-dims"})");
  CHECK(unknown.find("t2-finite-dims") != std::string::npos);
  CHECK(unknown.find("did you mean 't2-finite-dim'") != std::string::npos);
  CHECK(error_of(R"({"experiment": "fernique", "sed": 3})").find("sed") != std::string::npos);
  CHECK(error_of(R"({"experiment": "fernique", "seed": -3})").find("seed") != std::string::npos);
  CHECK(error_of(R"({"experiment": "fernique", "threads": 1.5})").find("threads") != std::string::npos);
  CHECK(error_of(R"({"experiment": "fernique", "output": ""})").find("output") != std::string::npos);

  const ExperimentConfig c = parse_config_text(R"({"experiment": "t2-finite-dim", "seed": 18446744073709551615})");
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.output == "t2-finite-dim");
  CHECK(c.threads == 0);
}

TEST_CASE("parameter validation happens before computation") {
  auto run_with = [](const std::string& name, const json& params) {
    return run_experiment(parse_config(json{{"experiment", name}, {"params", params}}));
  };
  CHECK_THROWS_AS(run_with("t2-finite-dim", {{"k", 0}}), ConfigError);
  CHECK_THROWS_AS(run_with("t2-finite-dim", {{"k", "three"}}), ConfigError);
  CHECK_THROWS_AS(run_with("t2-finite-dim", {{"kk", 3}}), ConfigError);
  CHECK_THROWS_AS(run_with("pvar-oracle", {{"max_points", 17}}), ConfigError);
  CHECK_THROWS_AS(run_with("nalpha-tails", {{"p", 3.5}}), ConfigError);
  CHECK_THROWS_AS(run_with("nalpha-tails", {{"trials", 100}}), ConfigError);
  CHECK_THROWS_AS(run_with("sobolev-ratio", {{"delta", 0.4}, {"p", 2.0}}), ConfigError);
  CHECK_THROWS_AS(run_with("empirical-concentration", {{"n_grid", {3}}, {"reference", 16}}), ConfigError);
  CHECK_THROWS_AS(run_with("fernique", {{"functional", "median"}}), ConfigError);
  CHECK_THROWS_AS(run_with("metric-axioms", {{"costs", {"hamming"}}}), ConfigError);
  CHECK_THROWS_AS(run_with("rde-shift", {{"h", {{0.0, 0.0, 0.0}, {0.5, 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(run_with("rde-shift", {{"h", {{0.0, 0.0, 0.0}, {0.5, 1.0, 0.0}}}}), ConfigError);
}

TEST_CASE("every experiment runs and holds on small parameters") {
  for (const auto& e : list_experiments()) {
    CAPTURE(e.name);
    const ExperimentResult r = run_experiment(quick(e.name));
    CHECK(r.table.rows() > 0);
    CHECK(r.holds);
  }
}

TEST_CASE("reports do not depend on the thread count") {
  for (const auto& e : list_experiments()) {
    CAPTURE(e.name);
    const std::string one = run_experiment(quick(e.name, 5, 1)).table.str();
    CHECK(run_experiment(quick(e.name, 5, 3)).table.str() == one);
    CHECK(run_experiment(quick(e.name, 5, 1)).table.str() == one);
  }
  CHECK(run_experiment(quick("pvar-oracle", 5)).table.str() != run_experiment(quick("pvar-oracle", 6)).table.str());
}

TEST_CASE("closed-form transport run") {
  const ExperimentResult r =
      run_experiment(parse_config_text(R"({"experiment": "t2-finite-dim", "params": {"k": 3, "C": 2, "cases": 100}, "seed": 7})"));
  CHECK(r.holds);
  REQUIRE(r.table.rows() == 100);
  for (std::size_t i = 0; i < r.table.rows(); ++i) CHECK(std::get<bool>(r.table.row(i)[5]));
}

TEST_CASE("user-supplied shift as breakpoints") {
  const ExperimentResult r = run_experiment(parse_config(json{
      {"experiment", "rde-shift"},
      {"params", {{"trials", 10}, {"n", 33}, {"h", {{0.0, 0.0, 0.0}, {0.5, 0.5, -0.2}, {1.0, 0.0, 0.0}}}}}}));
  CHECK(r.holds);
}

TEST_CASE("report files and exit codes") {
  TempDir tmp;
  std::ostringstream err;
  const std::string prefix = (tmp.path / "run").string();

  ExperimentConfig ok = quick("pvar-oracle");
  ok.output = prefix;
  ok.source = json{{"experiment", "pvar-oracle"}, {"output", prefix}};
  CHECK(run_and_write(ok, err) == kExitOk);
  REQUIRE(fs::exists(prefix + ".report.csv"));
  std::ifstream meta_in(prefix + ".meta.json");
  const json meta = json::parse(meta_in);
  CHECK(meta["config"]["experiment"] == "pvar-oracle");
  CHECK(meta["version"] == version_string());
  CHECK(meta["wall_time_seconds"].get<double>() >= 0.0);
  std::ifstream csv_in(prefix + ".report.csv");
  const auto rows = parse_csv(csv_in);
  CHECK(rows.front().front() == "experiment");
  CHECK(rows.size() == 41);

  // A tolerance of zero on the lift residuals cannot hold: property failure.
  ExperimentConfig fail = parse_config(json{{"experiment", "lift-consistency"},
                                            {"params", {{"cases", 5}, {"tolerance", 0.0}, {"n", 64}}},
                                            {"output", prefix + "_fail"}});
  CHECK(run_and_write(fail, err) == kExitPropertyFailure);
  CHECK(err.str().find("property failure") != std::string::npos);

  const std::string bad = (tmp.path / "bad.json").string();
  std::ofstream(bad) << "{\"experiment\": \"pvar-oracle\", ";
  CHECK(run_config_file(bad, err) == kExitConfigError);
  CHECK(run_config_file((tmp.path / "missing.json").string(), err) == kExitConfigError);

  const std::string cfg = (tmp.path / "cfg.json").string();
  std::ofstream(cfg) << json{{"experiment", "t2-finite-dim"}, {"params", {{"cases", 4}}},
                             {"output", (tmp.path / "thr").string()}, {"threads", 1}}
                            .dump();
  CHECK(run_config_file(cfg, err, 2) == kExitOk);
  std::ifstream thr(tmp.path / "thr.meta.json");
  CHECK(json::parse(thr)["threads"] == 2);
  CHECK(version_string().rfind("v", 0) == 0);
}
