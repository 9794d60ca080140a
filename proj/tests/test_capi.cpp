#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "pcmc/pcmc.h"

namespace {

std::string fixture(const char* name) { return std::string(PCMC_FIXTURE_DIR) + "/" + name; }
std::string config(const char* name) { return std::string(PCMC_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST_CASE("version and empty error") {
  CHECK(std::strlen(pcmc_version()) > 0);
  pcmc_cm* cm = nullptr;
  REQUIRE(pcmc_cm_load(fixture("identity_class.cm").c_str(), PCMC_MODE_CLASS, &cm) == PCMC_OK);
  CHECK(std::string(pcmc_last_error()).empty());
  pcmc_cm_free(cm);
}

TEST_CASE("status codes map error kinds") {
  pcmc_cm* cm = nullptr;
  CHECK(pcmc_cm_load("/nonexistent.cm", PCMC_MODE_CLASS, &cm) == PCMC_ERR_IO);
  CHECK(std::string(pcmc_last_error()).find("nonexistent") != std::string::npos);
  CHECK(pcmc_cm_load(fixture("cam_front_class.cm").c_str(), PCMC_MODE_PROP, &cm) == PCMC_ERR_PARSE);
  CHECK(pcmc_cm_load(nullptr, PCMC_MODE_CLASS, &cm) == PCMC_ERR_INVALID_ARGUMENT);

  pcmc_config* cfg = nullptr;
  CHECK(pcmc_config_parse(R"({"n_cells": 10, "crosswalk_cell": 12, "v_max": 1, "cell_length_m": 10,
                              "v0": 1, "mode": "class", "env": []})",
                          ".", &cfg) == PCMC_ERR_VALIDATION);
  CHECK(std::string(pcmc_last_error()).find("crosswalk_cell") != std::string::npos);
  CHECK(pcmc_config_parse("{", ".", &cfg) == PCMC_ERR_PARSE);
  CHECK(cfg == nullptr);
}

TEST_CASE("fixture access through handles") {
  pcmc_cm* cm = nullptr;
  REQUIRE(pcmc_cm_load(fixture("cam_front_class.cm").c_str(), PCMC_MODE_CLASS, &cm) == PCMC_OK);
  CHECK(pcmc_cm_num_labels(cm) == 3);
  CHECK(pcmc_cm_num_bands(cm) == 10);
  CHECK(std::string(pcmc_cm_label(cm, 2)) == "emp");
  CHECK(pcmc_cm_label(cm, 3) == nullptr);
  int64_t n = 0;
  REQUIRE(pcmc_cm_count(cm, 0, 2, 1, &n) == PCMC_OK);
  CHECK(n == 734);
  CHECK(pcmc_cm_count(cm, 10, 0, 0, &n) == PCMC_ERR_INVALID_ARGUMENT);
  std::vector<double> col(3);
  REQUIRE(pcmc_cm_column(cm, 0, 0, 0, col.data(), col.size()) == PCMC_OK);
  CHECK(col[0] == doctest::Approx(31.0 / 158));
  CHECK(pcmc_cm_column(cm, 0, 0, 0, col.data(), 2) == PCMC_ERR_INVALID_ARGUMENT);

  pcmc_cm* agg = nullptr;
  REQUIRE(pcmc_cm_aggregate(cm, &agg) == PCMC_OK);
  CHECK(pcmc_cm_num_bands(agg) == 1);
  REQUIRE(pcmc_cm_count(agg, 0, 2, 2, &n) == PCMC_OK);
  CHECK(n == 24884);

  char* text = nullptr;
  REQUIRE(pcmc_cm_render_tables(cm, &text) == PCMC_OK);
  CHECK(std::string(text).find("3227") != std::string::npos);
  pcmc_string_free(text);
  pcmc_cm_free(agg);
  pcmc_cm_free(cm);
}

TEST_CASE("eval, simulate, export and sweep through the C API") {
  pcmc_config* cfg = nullptr;
  REQUIRE(pcmc_config_load(config("car_ped.json").c_str(), &cfg) == PCMC_OK);
  CHECK(pcmc_config_mode(cfg) == PCMC_MODE_CLASS);
  CHECK(std::string(pcmc_config_env(cfg)) == "ped");
  pcmc_cm* cm = nullptr;
  REQUIRE(pcmc_cm_load(pcmc_config_cm_path(cfg), pcmc_config_mode(cfg), &cm) == PCMC_OK);
  pcmc_chain* chain = nullptr;
  REQUIRE(pcmc_chain_build(cfg, cm, &chain) == PCMC_OK);
  CHECK(pcmc_chain_num_states(chain) > 0);
  CHECK(pcmc_chain_max_row_defect(chain) <= 1e-9);

  pcmc_check_result all{}, phi1{};
  REQUIRE(pcmc_chain_check(chain, PCMC_SPEC_ALL, &all) == PCMC_OK);
  REQUIRE(pcmc_chain_check(chain, PCMC_SPEC_PHI1, &phi1) == PCMC_OK);
  CHECK(all.probability > 0.0);
  CHECK(all.probability < 1.0);
  CHECK(phi1.guard_mismatch == 1);
  CHECK(pcmc_chain_check(chain, static_cast<pcmc_spec>(9), &all) == PCMC_ERR_INVALID_ARGUMENT);

  pcmc_sim_result sim{};
  REQUIRE(pcmc_simulate(cfg, cm, PCMC_SPEC_ALL, 20000, 3, &sim) == PCMC_OK);
  CHECK(std::abs(sim.estimate - all.probability) <= 3 * sim.std_error);
  CHECK(pcmc_simulate(cfg, cm, PCMC_SPEC_ALL, 0, 3, &sim) == PCMC_ERR_INVALID_ARGUMENT);

  auto dir = (std::filesystem::temp_directory_path() / "pcmc_capi_export").string();
  std::filesystem::remove_all(dir);
  REQUIRE(pcmc_chain_export(chain, PCMC_SPEC_ALL, dir.c_str()) == PCMC_OK);
  CHECK(std::filesystem::exists(dir + "/model.tra"));
  CHECK(std::filesystem::exists(dir + "/model.lab"));
  CHECK(std::filesystem::exists(dir + "/model.states"));

  pcmc_sweep* sw = nullptr;
  CHECK(pcmc_sweep_run(cfg, 0, 1, 1, &sw) == PCMC_ERR_VALIDATION);  // no sweep block
  pcmc_chain_free(chain);
  pcmc_cm_free(cm);
  pcmc_config_free(cfg);

  REQUIRE(pcmc_config_load(config("sweep.json").c_str(), &cfg) == PCMC_OK);
  CHECK(pcmc_config_has_sweep(cfg) == 1);
  REQUIRE(pcmc_sweep_run(cfg, 0, 1, 2, &sw) == PCMC_OK);
  std::string csv = pcmc_sweep_csv(sw);
  CHECK(csv.rfind("variant,env,v_max,v0,prob\n", 0) == 0);
  CHECK(std::string(pcmc_sweep_summary(sw)).find("phi_all") != std::string::npos);
  pcmc_sweep_free(sw);
  pcmc_config_free(cfg);
}

TEST_CASE("building matrices from CSV files") {
  pcmc_cm* cm = nullptr;
  const double bands[] = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  REQUIRE(pcmc_cm_build(fixture("synthetic_gt.csv").c_str(), fixture("synthetic_pred.csv").c_str(), PCMC_MODE_PROP,
                        "ped,obs", bands, 10, 0.5, &cm) == PCMC_OK);
  CHECK(pcmc_cm_num_labels(cm) == 4);
  int64_t n = 0;
  REQUIRE(pcmc_cm_count(cm, 0, 0, 0, &n) == PCMC_OK);
  CHECK(n == 1);
  auto path = (std::filesystem::temp_directory_path() / "pcmc_capi_built.cm").string();
  REQUIRE(pcmc_cm_save(cm, path.c_str()) == PCMC_OK);
  pcmc_cm* back = nullptr;
  REQUIRE(pcmc_cm_load(path.c_str(), PCMC_MODE_PROP, &back) == PCMC_OK);
  char *a = nullptr, *b = nullptr;
  REQUIRE(pcmc_cm_render_fixture(cm, &a) == PCMC_OK);
  REQUIRE(pcmc_cm_render_fixture(back, &b) == PCMC_OK);
  CHECK(std::string(a) == std::string(b));
  pcmc_string_free(a);
  pcmc_string_free(b);
  pcmc_cm_free(back);
  pcmc_cm_free(cm);

  CHECK(pcmc_cm_build(fixture("synthetic_gt.csv").c_str(), fixture("synthetic_pred.csv").c_str(), PCMC_MODE_CLASS,
                      "ped,obs", bands, 10, 0.0, &cm) == PCMC_ERR_INVALID_ARGUMENT);
  const double unsorted[] = {20, 10};
  CHECK(pcmc_cm_build(fixture("synthetic_gt.csv").c_str(), fixture("synthetic_pred.csv").c_str(), PCMC_MODE_CLASS,
                      "ped,obs", unsorted, 2, 0.5, &cm) != PCMC_OK);
}

TEST_CASE("null handles are harmless") {
  pcmc_config_free(nullptr);
  pcmc_cm_free(nullptr);
  pcmc_chain_free(nullptr);
  pcmc_sweep_free(nullptr);
  pcmc_string_free(nullptr);
  CHECK(pcmc_chain_num_states(nullptr) == 0);
  CHECK(std::string(pcmc_sweep_csv(nullptr)).empty());
}
