#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cm_core.hpp"

namespace pcmc {

/// Car on a 1-D strip of cells C_1..C_N with an integer speed in cells/step.
struct AgentState {
  int cell = 1;
  int speed = 0;

  auto operator<=>(const AgentState&) const = default;
};

using Accel = int;

/// Objects at the crosswalk cell. Class mode treats this as a tuple (repeats
/// allowed); proposition mode only looks at which classes occur.
struct EnvState {
  std::vector<std::string> objects;

  bool empty() const noexcept { return objects.empty(); }
  bool contains(std::string_view object_class) const;
  /// "emp" for an empty environment, otherwise objects joined by '+'.
  std::string name() const;
  static EnvState from_name(std::string_view name);

  bool operator==(const EnvState&) const = default;
};

struct ScenarioConfig {
  int n_cells = 10;
  int crosswalk_cell = 8;
  int v_max = 3;
  double cell_length_m = 10.0;
  int v0 = 1;
  int cruise_speed = 0;  // 0 means v_max
  CmMode mode = CmMode::class_labeled;
  std::vector<double> band_edges_m;
  EnvState env;
  std::string cm_path;
  bool zero_column_fallback = false;
  std::string pedestrian_class = "ped";

  int cruise() const noexcept { return cruise_speed > 0 ? cruise_speed : v_max; }
  ZeroColumnPolicy zero_column_policy() const noexcept {
    return zero_column_fallback ? ZeroColumnPolicy::fallback_empty : ZeroColumnPolicy::strict;
  }
};

/// Throws Error(validation) naming every offending field.
void validate(const ScenarioConfig& cfg);

/// Move at the current speed, then apply the acceleration.
AgentState step_dynamics(const AgentState& agent, Accel accel, const ScenarioConfig& cfg);

/// What the planner receives: the set of object classes reported present.
struct Observation {
  std::uint32_t detected = 0;

  bool operator==(const Observation&) const = default;
};

/// True labels of env as indices into labels: one entry per object in class
/// mode ({emp} when empty), a single proposition-set label in prop mode.
std::vector<std::size_t> true_labels(const LabelSet& labels, const EnvState& env);

/// Every possible perception outcome for env, as label tuples.
std::vector<std::vector<std::size_t>> observation_space(const LabelSet& labels, const EnvState& env);

Observation observe(const LabelSet& labels, std::span<const std::size_t> outcome);

/// A stop exactly at (k-1, 0) is reachable without stopping early or
/// entering the crosswalk.
bool stop_feasible(const AgentState& agent, const ScenarioConfig& cfg);

/// Stopped at the crosswalk, at the end of the road, or halted past it.
bool is_terminal(const AgentState& agent, const ScenarioConfig& cfg);

using Controller = std::function<Accel(const AgentState&, const Observation&)>;

/// Deterministic acceleration rule for a single observation outcome.
Accel controller(const AgentState& agent, bool pedestrian_reported, const ScenarioConfig& cfg);

/// The shipped controller with a precomputed stop-feasibility table.
class StopController {
 public:
  StopController(const ScenarioConfig& cfg, std::uint32_t pedestrian_mask);

  Accel operator()(const AgentState& agent, const Observation& obs) const;
  bool feasible(const AgentState& agent) const;

 private:
  ScenarioConfig cfg_;
  std::uint32_t pedestrian_mask_;
  std::vector<bool> feasible_;  // [cell * (v_max+1) + speed]
};

}  // namespace pcmc
