#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agent_env.hpp"

namespace pcmc {

/// Grid evaluated by the sweep command.
struct SweepSettings {
  std::vector<int> v_max_values{1, 2, 3};
  std::vector<EnvState> envs{EnvState{{"ped"}}, EnvState{}};
  std::string class_cm_path;
  std::string prop_cm_path;
};

struct RunConfig {
  ScenarioConfig scenario;
  SweepSettings sweep;
  bool has_sweep = false;
  std::uint64_t seed = 2021;
  std::uint64_t trials = 0;
  std::string source_path;
};

/// Parses a JSON config. Relative fixture paths resolve against base_dir.
/// Every unknown key, wrong type, or out-of-range value is reported at once.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir);
RunConfig load_config(const std::string& path);

}  // namespace pcmc
