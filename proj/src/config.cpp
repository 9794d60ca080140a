#include "config.hpp"

#include <filesystem>
#include <set>

#include <json.hpp>

#include "error.hpp"
#include "text_util.hpp"

namespace pcmc {

namespace {

using nlohmann::json;

const std::set<std::string> kScenarioKeys = {
    "n_cells", "crosswalk_cell", "v_max", "cell_length_m", "v0", "mode", "band_edges_m", "env",
    "cm_path", "zero_column_fallback", "cruise_speed", "pedestrian_class", "seed", "trials", "sweep"};
const std::set<std::string> kSweepKeys = {"v_max", "envs", "class_cm_path", "prop_cm_path"};

class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  template <typename T>
  void get(const json& obj, const std::string& key, T& out, const std::string& prefix = "") {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      problems_.push_back(prefix + key + " (wrong type: " + std::string(obj.at(key).type_name()) + ")");
    }
  }

  void require(const json& obj, const std::string& key) {
    if (!obj.contains(key)) problems_.push_back(key + " (missing)");
  }

  void unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix = "") {
    for (const auto& [k, v] : obj.items())
      if (!known.count(k)) problems_.push_back(prefix + k + " (unknown key)");
  }

 private:
  std::vector<std::string>& problems_;
};

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path.lexically_normal().string();
  return (std::filesystem::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::parse, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(ErrorKind::validation, "config must be a JSON object");

  std::vector<std::string> problems;
  Reader r(problems);
  RunConfig rc;
  auto& s = rc.scenario;

  r.unknown(root, kScenarioKeys);
  for (const char* key : {"n_cells", "crosswalk_cell", "v_max", "cell_length_m", "v0", "mode", "env"})
    r.require(root, key);
  r.get(root, "n_cells", s.n_cells);
  r.get(root, "crosswalk_cell", s.crosswalk_cell);
  r.get(root, "v_max", s.v_max);
  r.get(root, "cell_length_m", s.cell_length_m);
  r.get(root, "v0", s.v0);
  r.get(root, "cruise_speed", s.cruise_speed);
  r.get(root, "band_edges_m", s.band_edges_m);
  r.get(root, "env", s.env.objects);
  r.get(root, "cm_path", s.cm_path);
  r.get(root, "zero_column_fallback", s.zero_column_fallback);
  r.get(root, "pedestrian_class", s.pedestrian_class);
  r.get(root, "seed", rc.seed);
  r.get(root, "trials", rc.trials);
  std::string mode = "class";
  r.get(root, "mode", mode);
  try {
    s.mode = parse_mode(mode);
  } catch (const Error& e) {
    problems.push_back(std::string("mode (") + e.what() + ")");
  }
  s.cm_path = resolve(base_dir, s.cm_path);

  if (root.contains("sweep")) {
    const auto& sw = root.at("sweep");
    if (!sw.is_object()) {
      problems.push_back("sweep (must be an object)");
    } else {
      rc.has_sweep = true;
      r.unknown(sw, kSweepKeys, "sweep.");
      r.get(sw, "v_max", rc.sweep.v_max_values, "sweep.");
      std::vector<std::vector<std::string>> envs;
      if (sw.contains("envs")) {
        r.get(sw, "envs", envs, "sweep.");
        rc.sweep.envs.clear();
        for (auto& e : envs) rc.sweep.envs.push_back(EnvState{std::move(e)});
      }
      r.get(sw, "class_cm_path", rc.sweep.class_cm_path, "sweep.");
      r.get(sw, "prop_cm_path", rc.sweep.prop_cm_path, "sweep.");
      rc.sweep.class_cm_path = resolve(base_dir, rc.sweep.class_cm_path);
      rc.sweep.prop_cm_path = resolve(base_dir, rc.sweep.prop_cm_path);
      if (rc.sweep.v_max_values.empty()) problems.push_back("sweep.v_max (must not be empty)");
      for (int v : rc.sweep.v_max_values)
        if (v < 1) problems.push_back("sweep.v_max (entries must be >= 1)");
      if (rc.sweep.envs.empty()) problems.push_back("sweep.envs (must not be empty)");
    }
  }

  if (problems.empty()) {
    try {
      validate(s);
    } catch (const Error& e) {
      fail(ErrorKind::validation, e.what());
    }
  } else {
    // Report range problems alongside type problems where the fields parsed.
    try {
      validate(s);
    } catch (const Error& e) {
      auto lines = text::split(e.what(), '\n');
      for (std::size_t i = 1; i < lines.size(); ++i) problems.emplace_back(text::trim(lines[i]));
    }
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorKind::validation, msg);
  }
  return rc;
}

RunConfig load_config(const std::string& path) {
  const auto content = text::read_file(path);
  auto base = std::filesystem::path(path).parent_path().string();
  try {
    auto rc = parse_config(content, base);
    rc.source_path = path;
    return rc;
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace pcmc
