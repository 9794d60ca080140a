#include "agent_env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "error.hpp"
#include "text_util.hpp"

namespace pcmc {

bool EnvState::contains(std::string_view object_class) const {
  return std::find(objects.begin(), objects.end(), object_class) != objects.end();
}

std::string EnvState::name() const {
  if (objects.empty()) return std::string(kEmptyLabel);
  std::string out;
  for (const auto& o : objects) {
    if (!out.empty()) out += kPropJoiner;
    out += o;
  }
  return out;
}

EnvState EnvState::from_name(std::string_view name) {
  EnvState env;
  name = text::trim(name);
  if (name.empty() || name == kEmptyLabel) return env;
  for (auto part : text::split(name, kPropJoiner)) {
    auto p = text::trim(part);
    if (p.empty() || p == kEmptyLabel) fail(ErrorKind::parse, "bad environment '" + std::string(name) + "'");
    env.objects.emplace_back(p);
  }
  return env;
}

void validate(const ScenarioConfig& cfg) {
  std::vector<std::string> problems;
  auto bad = [&](const std::string& key, const std::string& why) { problems.push_back(key + " (" + why + ")"); };

  if (cfg.n_cells < 3) bad("n_cells", "must be >= 3, got " + std::to_string(cfg.n_cells));
  if (cfg.crosswalk_cell < 3 || cfg.crosswalk_cell > cfg.n_cells)
    bad("crosswalk_cell", "must lie in 3..n_cells=" + std::to_string(cfg.n_cells) + ", got " +
                              std::to_string(cfg.crosswalk_cell));
  if (cfg.v_max < 1) bad("v_max", "must be >= 1, got " + std::to_string(cfg.v_max));
  if (cfg.v0 < 1 || cfg.v0 > cfg.v_max)
    bad("v0", "must lie in 1..v_max=" + std::to_string(cfg.v_max) + ", got " + std::to_string(cfg.v0));
  if (cfg.cruise_speed < 0 || cfg.cruise_speed > cfg.v_max)
    bad("cruise_speed", "must lie in 1..v_max (0 selects v_max), got " + std::to_string(cfg.cruise_speed));
  if (!(cfg.cell_length_m > 0) || !std::isfinite(cfg.cell_length_m))
    bad("cell_length_m", "must be a positive number");
  if (!cfg.band_edges_m.empty()) {
    try {
      DistanceBands b(cfg.band_edges_m);
    } catch (const Error& e) {
      bad("band_edges_m", e.what());
    }
  }
  for (const auto& o : cfg.env.objects)
    if (o.empty() || o == kEmptyLabel) bad("env", "entries must be object class names; use [] for an empty scene");
  if (cfg.pedestrian_class.empty()) bad("pedestrian_class", "must not be empty");

  if (!problems.empty()) {
    std::string msg = "invalid scenario config:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorKind::validation, msg);
  }
}

AgentState step_dynamics(const AgentState& agent, Accel accel, const ScenarioConfig& cfg) {
  AgentState next;
  next.cell = std::min(agent.cell + agent.speed, cfg.n_cells);
  next.speed = std::clamp(agent.speed + accel, 0, cfg.v_max);
  return next;
}

std::vector<std::size_t> true_labels(const LabelSet& labels, const EnvState& env) {
  for (const auto& o : env.objects)
    if (!labels.class_index(o))
      fail(ErrorKind::validation, "environment object '" + o + "' is not a class of the confusion matrix");

  if (labels.mode() == CmMode::prop_labeled) {
    std::uint32_t mask = 0;
    for (const auto& o : env.objects) mask |= labels.class_bit(o);
    return {labels.index_of_objects(mask)};
  }
  if (env.empty()) return {labels.empty_index()};
  std::vector<std::size_t> out;
  for (const auto& o : env.objects) out.push_back(labels.index_of(o));
  return out;
}

std::vector<std::vector<std::size_t>> observation_space(const LabelSet& labels, const EnvState& env) {
  const auto arity = true_labels(labels, env).size();
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> tuple(arity, 0);
  // Odometer over labels^arity; last position varies fastest.
  while (true) {
    out.push_back(tuple);
    std::size_t pos = arity;
    while (pos > 0) {
      --pos;
      if (++tuple[pos] < labels.size()) break;
      tuple[pos] = 0;
      if (pos == 0) return out;
    }
    if (arity == 0) return out;
  }
}

Observation observe(const LabelSet& labels, std::span<const std::size_t> outcome) {
  Observation o;
  for (auto i : outcome) o.detected |= labels.objects(i);
  return o;
}

namespace {

bool is_stop_target(const AgentState& s, const ScenarioConfig& cfg) {
  return s.cell == cfg.crosswalk_cell - 1 && s.speed == 0;
}

// States a stopping plan may pass through before reaching the target.
bool admissible_en_route(const AgentState& s, const ScenarioConfig& cfg) {
  const int k = cfg.crosswalk_cell;
  if (s.cell >= k) return false;
  if (s.speed == 0 && s.cell < k - 1) return false;
  return true;
}

constexpr Accel kBrakeFirst[] = {-1, 0, +1};

}  // namespace

bool stop_feasible(const AgentState& agent, const ScenarioConfig& cfg) {
  if (is_stop_target(agent, cfg)) return true;
  if (!admissible_en_route(agent, cfg)) return false;

  const int width = cfg.v_max + 1;
  std::vector<bool> visited(static_cast<std::size_t>((cfg.n_cells + 1) * width), false);
  std::deque<AgentState> frontier{agent};
  visited[agent.cell * width + agent.speed] = true;
  while (!frontier.empty()) {
    const auto s = frontier.front();
    frontier.pop_front();
    for (auto a : kBrakeFirst) {
      const auto n = step_dynamics(s, a, cfg);
      if (is_stop_target(n, cfg)) return true;
      if (!admissible_en_route(n, cfg)) continue;
      auto idx = static_cast<std::size_t>(n.cell * width + n.speed);
      if (visited[idx]) continue;
      visited[idx] = true;
      frontier.push_back(n);
    }
  }
  return false;
}

bool is_terminal(const AgentState& agent, const ScenarioConfig& cfg) {
  if (is_stop_target(agent, cfg)) return true;
  if (agent.cell >= cfg.n_cells) return true;
  return agent.cell >= cfg.crosswalk_cell && agent.speed == 0;
}

namespace {

template <typename Feasible>
Accel decide(const AgentState& agent, bool pedestrian_reported, const ScenarioConfig& cfg,
             Feasible&& feasible) {
  const int k = cfg.crosswalk_cell;
  if (agent.cell >= k || is_stop_target(agent, cfg)) return 0;

  if (pedestrian_reported) {
    for (auto a : kBrakeFirst) {
      const auto n = step_dynamics(agent, a, cfg);
      if (is_stop_target(n, cfg) || (admissible_en_route(n, cfg) && feasible(n))) return a;
    }
    return -1;  // no stopping plan left; brake as hard as possible
  }

  const int cruise = cfg.cruise();
  if (agent.speed < cruise) return +1;
  if (agent.speed > cruise && agent.speed - 1 >= 1) return -1;
  return 0;
}

}  // namespace

Accel controller(const AgentState& agent, bool pedestrian_reported, const ScenarioConfig& cfg) {
  return decide(agent, pedestrian_reported, cfg,
                [&](const AgentState& s) { return stop_feasible(s, cfg); });
}

StopController::StopController(const ScenarioConfig& cfg, std::uint32_t pedestrian_mask)
    : cfg_(cfg), pedestrian_mask_(pedestrian_mask) {
  const int width = cfg_.v_max + 1;
  feasible_.assign(static_cast<std::size_t>((cfg_.n_cells + 1) * width), false);
  for (int c = 1; c <= cfg_.n_cells; ++c)
    for (int v = 0; v <= cfg_.v_max; ++v) feasible_[c * width + v] = stop_feasible({c, v}, cfg_);
}

bool StopController::feasible(const AgentState& agent) const {
  return feasible_.at(static_cast<std::size_t>(agent.cell * (cfg_.v_max + 1) + agent.speed));
}

Accel StopController::operator()(const AgentState& agent, const Observation& obs) const {
  return decide(agent, (obs.detected & pedestrian_mask_) != 0, cfg_,
                [this](const AgentState& s) { return feasible(s); });
}

}  // namespace pcmc
