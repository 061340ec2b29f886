#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "mfnet/catalog.hpp"
#include "mfnet/driver.hpp"
#include "mfnet/errors.hpp"
#include "mfnet/io.hpp"

namespace fs = std::filesystem;
using mfnet::Json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mfnet_driver" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every file except the manifest must match byte for byte.
void check_same_outputs(const fs::path& a, const fs::path& b) {
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "manifest.json") continue;
    INFO(name.string());
    REQUIRE(fs::exists(b / name));
    CHECK(slurp(entry.path()) == slurp(b / name));
    ++compared;
  }
  CHECK(compared >= 2);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MFNET_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("driver") {
  TEST_CASE("defaults per experiment") {
    for (const auto& name : mfnet::experiment_names()) {
      INFO(name);
      const auto cfg = mfnet::parse_config(Json::object(), name);
      CHECK(cfg.experiment == name);
      CHECK(cfg.seed == 1);
      CHECK(cfg.replicas >= 1);
    }
    CHECK(mfnet::parse_config(Json::object(), "beta_comparison").model_source == "comparison");
  }

  TEST_CASE("malformed configs are validation errors") {
    CHECK_THROWS_AS(mfnet::parse_config(Json::object(), "nope"), mfnet::ValidationError);
    CHECK_THROWS_AS(mfnet::parse_config({{"sweep", {{"n", Json::array()}}}}, "simulate"), mfnet::ValidationError);
    CHECK_THROWS_AS(mfnet::parse_config({{"replicas", 0}}, "lln_rate_accel"), mfnet::ValidationError);
    CHECK_THROWS_AS(mfnet::parse_config({{"model", "missing_model"}}, "simulate"), mfnet::ValidationError);
    auto bad = mfnet::model_to_json(mfnet::default_test_model());
    bad["mu0"] = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(mfnet::parse_config({{"model", bad}}, "simulate"), mfnet::ValidationError);
    CHECK_THROWS_AS(mfnet::parse_config({{"functionals", {{{"a", {1, 1}}, {"t", {0.5, 0.2}}}}}}, "clt"),
                    mfnet::ValidationError);
  }

  TEST_CASE("overrides win over the document") {
    const auto cfg = mfnet::parse_config({{"seed", 3}}, "simulate", {.seed = 9, .out = "x", .budget = 7.0});
    CHECK(cfg.seed == 9);
    CHECK(cfg.out == "x");
    CHECK(cfg.event_budget == 7.0);
  }

  TEST_CASE("dry run recovers the -1/2 slope") {
    const auto dir = scratch("dry");
    const auto cfg = mfnet::parse_config({{"dry_run", {{"c", 0.7}}}, {"out", dir.string()}}, "lln_rate_accel");
    const auto report = mfnet::run_experiment(cfg);
    CHECK(report.at("slope").get<double>() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(fs::exists(dir / "rate.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
  }

  TEST_CASE("zero kernels give constant trajectories") {
    auto spec = mfnet::default_test_model();
    spec.gamma = mfnet::NodeKernel(2, 3, 2);
    spec.gamma.envelope = {1.0, 1.0};
    spec.gamma_tilde = mfnet::EdgeKernel(2, 3, 2);
    const auto dir = scratch("frozen");
    const auto cfg = mfnet::parse_config(
        {{"model", mfnet::model_to_json(spec)}, {"sweep", {{"n", {30}}}}, {"out", dir.string()}}, "simulate");
    const auto report = mfnet::run_experiment(cfg);
    CHECK(report.at("node_accepted").get<int>() == 0);
    std::ifstream in(dir / "empirical.csv");
    std::string header, first, line, last;
    std::getline(in, header);
    std::getline(in, first);
    while (std::getline(in, line)) last = line;
    CHECK(first.substr(first.find(',')) == last.substr(last.find(',')));
  }

  TEST_CASE("budget guard") {
    const auto cfg = mfnet::parse_config({{"event_budget", 10}, {"out", scratch("budget").string()}}, "simulate");
    CHECK_THROWS_AS(mfnet::run_experiment(cfg), mfnet::BudgetError);
  }

  TEST_CASE("reruns are byte identical") {
    const std::vector<std::pair<std::string, Json>> cases = {
        {"simulate", {{"sweep", {{"n", {40}}}}, {"log_edges", true}}},
        {"lln_rate_accel", {{"sweep", {{"n", {10, 20, 30, 40}}}}, {"replicas", 3}}},
        {"lln_rate_fixed_beta", {{"sweep", {{"n", {10, 20, 30, 40}}}}, {"replicas", 2}, {"n_ref", 160}}},
        {"lln_rate_iid", {{"sweep", {{"n", {10, 20, 30, 40}}}}, {"replicas", 3}}},
        {"poc", {{"sweep", {{"n", {20, 40}}}}, {"replicas", 20}, {"bootstrap", 20}}},
        {"beta_comparison", {{"sweep", {{"beta", {2.0, 4.0}}}}, {"n_ref", 30}, {"replicas", 3}}},
        {"riccati", {{"sweep", {{"n", {40}}}}, {"replicas", 3}}},
        {"clt", {{"sweep", {{"n", {30}}}}, {"replicas", 50}, {"mc_chains", 2000},
                 {"functionals", {{{"a", {1.0}}, {"t", {1.0}}}, {{"a", {1.0, -0.5}}, {"t", {0.5, 1.0}}}}}}},
        {"clt_mixture", {{"sweep", {{"n", {30}}}}, {"replicas", 100}}},
        {"trace", {{"n_mc", 500}}},
    };
    for (const auto& [name, doc] : cases) {
      INFO(name);
      const auto a = scratch(name + "_a"), b = scratch(name + "_b");
      auto da = doc, db = doc;
      da["out"] = a.string();
      db["out"] = b.string();
      mfnet::run_experiment(mfnet::parse_config(da, name));
      mfnet::run_experiment(mfnet::parse_config(db, name, {.threads = 3}));
      check_same_outputs(a, b);
      const auto ma = mfnet::load_json((a / "manifest.json").string());
      const auto mb = mfnet::load_json((b / "manifest.json").string());
      CHECK(ma.at("model_source") == mb.at("model_source"));
    }
  }

  TEST_CASE("config hash is stable and sensitive") {
    const Json a = {{"x", 1}, {"y", {1, 2}}};
    CHECK(mfnet::config_hash(a) == mfnet::config_hash(Json::parse(a.dump())));
    CHECK(mfnet::config_hash(a) != mfnet::config_hash({{"x", 2}, {"y", {1, 2}}}));
  }

  TEST_CASE("cli exit codes") {
    const auto dir = scratch("cli");
    std::ofstream(dir / "ok.json") << R"({"experiment": "simulate", "sweep": {"n": [10]}, "out": ")"
                                   << (dir / "out").string() << "\"}";
    std::ofstream(dir / "bad.json") << R"({"experiment": "simulate", "model": {"catalog": "nope"}})";
    std::ofstream(dir / "wrong.json") << R"({"experiment": "poc"})";
    CHECK(run_cli("simulate --config " + (dir / "ok.json").string()) == 0);
    CHECK(run_cli("validate --config " + (dir / "ok.json").string()) == 0);
    CHECK(run_cli("validate --config " + (dir / "bad.json").string()) == 2);
    CHECK(run_cli("simulate --config " + (dir / "wrong.json").string()) == 2);
    CHECK(run_cli("simulate --config " + (dir / "ok.json").string() + " --budget 10") == 3);
    CHECK(run_cli("model --name default --out " + (dir / "m.json").string()) == 0);
    CHECK(fs::exists(dir / "m.json"));
  }
}
