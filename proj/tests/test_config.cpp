#include <doctest.h>

#include <filesystem>

#include "config.hpp"
#include "error.hpp"
#include "oracles.hpp"

using namespace pcmc;

namespace {

const char* kMinimal = R"({"n_cells": 10, "crosswalk_cell": 8, "v_max": 2, "cell_length_m": 10,
                          "v0": 1, "mode": "prop", "env": ["ped"], "cm_path": "x.cm"})";

std::string error_of(const std::string& json) {
  try {
    parse_config(json, "/base");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    return e.what();
  }
  FAIL("expected a validation error");
  return {};
}

}  // namespace

TEST_CASE("minimal config with defaults") {
  auto rc = parse_config(kMinimal, "/base");
  CHECK(rc.scenario.mode == CmMode::prop_labeled);
  CHECK(rc.scenario.env.objects == std::vector<std::string>{"ped"});
  CHECK(rc.scenario.cm_path == "/base/x.cm");
  CHECK(rc.scenario.cruise() == 2);
  CHECK(rc.seed == 2021);
  CHECK_FALSE(rc.has_sweep);
}

TEST_CASE("bundled configs load and point at existing fixtures") {
  for (auto name : {"car_ped.json", "car_ped_prop.json", "identity.json", "sweep.json"}) {
    auto rc = load_config(oracle::config(name));
    CHECK(std::filesystem::exists(rc.scenario.cm_path));
  }
  auto sw = load_config(oracle::config("sweep.json"));
  CHECK(sw.has_sweep);
  CHECK(sw.sweep.v_max_values == std::vector<int>{1, 2, 3});
  CHECK(sw.sweep.envs.size() == 2);
  CHECK(sw.sweep.envs[1].empty());
  CHECK(std::filesystem::exists(sw.sweep.prop_cm_path));
}

TEST_CASE("out-of-range values are all reported") {
  auto msg = error_of(R"({"n_cells": 10, "crosswalk_cell": 11, "v_max": 2, "cell_length_m": 10,
                          "v0": 3, "mode": "class", "env": []})");
  CHECK(msg.find("crosswalk_cell") != std::string::npos);
  CHECK(msg.find("v0") != std::string::npos);
}

TEST_CASE("type errors, unknown and missing keys are reported together") {
  auto msg = error_of(R"({"n_cells": "ten", "crosswalk_cell": 8, "v_max": 2, "cell_length_m": 10,
                          "mode": "class", "env": [], "speed_limit": 3, "sweep": {"vmax": [1]}})");
  CHECK(msg.find("n_cells") != std::string::npos);
  CHECK(msg.find("speed_limit") != std::string::npos);
  CHECK(msg.find("v0") != std::string::npos);
  CHECK(msg.find("sweep.vmax") != std::string::npos);
}

TEST_CASE("bad mode and malformed JSON") {
  CHECK(error_of(R"({"n_cells": 10, "crosswalk_cell": 8, "v_max": 2, "cell_length_m": 10,
                     "v0": 1, "mode": "both", "env": []})")
            .find("mode") != std::string::npos);
  try {
    parse_config("{ not json", ".");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
  }
  try {
    load_config("/nonexistent/config.json");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}
