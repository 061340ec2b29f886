#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mfnet/catalog.hpp"
#include "mfnet/errors.hpp"
#include "mfnet/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mfnet_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("model json round trip") {
    for (const auto& name : mfnet::catalog_names()) {
      INFO(name);
      const auto spec = mfnet::catalog_model(name);
      const auto doc = mfnet::model_to_json(spec);
      const auto back = mfnet::model_from_json(doc);
      CHECK(mfnet::model_to_json(back) == doc);
      CHECK(back.gamma.table() == spec.gamma.table());
      CHECK(back.gamma_tilde.table() == spec.gamma_tilde.table());
      CHECK(back.clt.has_value() == spec.clt.has_value());
    }
  }

  TEST_CASE("model files round trip") {
    const auto path = scratch("default.json").string();
    mfnet::save_model(mfnet::default_test_model(), path);
    CHECK(mfnet::model_to_json(mfnet::load_model(path)) == mfnet::model_to_json(mfnet::default_test_model()));
  }

  TEST_CASE("malformed model documents") {
    auto doc = mfnet::model_to_json(mfnet::default_test_model());
    CHECK_THROWS_AS(mfnet::model_from_json(mfnet::Json::array()), mfnet::ValidationError);
    auto missing = doc;
    missing.erase("T");
    CHECK_THROWS_AS(mfnet::model_from_json(missing), mfnet::ValidationError);
    auto shape = doc;
    shape["mu0"] = "abc";
    CHECK_THROWS_AS(mfnet::model_from_json(shape), mfnet::ValidationError);
    const auto bad = scratch("bad.json");
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_AS(mfnet::load_json(bad.string()), mfnet::ValidationError);
  }

  TEST_CASE("csv format") {
    const auto path = scratch("t.csv");
    {
      mfnet::CsvWriter w(path.string(), {"a", "b"});
      w.row(1, 0.1);
      w.row(std::vector<double>{2.5, 1.0 / 3.0});
    }
    CHECK(slurp(path) == "a,b\n1,0.10000000000000001\n2.5,0.33333333333333331\n");
  }

  TEST_CASE("json output has sorted keys") {
    const auto path = scratch("s.json");
    mfnet::save_json({{"zeta", 1}, {"alpha", 2}}, path.string());
    const auto text = slurp(path);
    CHECK(text.find("alpha") < text.find("zeta"));
    CHECK(text.back() == '\n');
  }

  TEST_CASE("trajectory csv") {
    mfnet::TrajectoryLog log;
    log.nodes.resize(2);
    log.nodes[1].initial = 1;
    log.nodes[1].jumps = {{0.5, 2}};
    log.edges.push_back({0, 1, 0.25, 1});
    const auto path = scratch("traj.csv");
    mfnet::write_trajectory_csv(log, path.string());
    const auto text = slurp(path);
    CHECK(text.rfind("entity_kind,i,j,time,new_state\n", 0) == 0);
    CHECK(text.find("node,2,") != std::string::npos);
    CHECK(text.find("edge,1,2,0.25,1") != std::string::npos);
  }
}
