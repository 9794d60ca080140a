#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "agent_env.hpp"
#include "cm_core.hpp"

namespace pcmc {

struct SystemState {
  AgentState agent;
  EnvState env;

  bool operator==(const SystemState&) const = default;
};

// Atomic propositions attached to chain states.
enum StateFlag : std::uint8_t {
  kStoppedAtCrosswalk = 1u << 0,  // stopped_at_cw
  kPedestrianEnv = 1u << 1,       // ped_env
  kPastCrosswalk = 1u << 2,       // past_cw
  kStoppedEarly = 1u << 3,        // stopped_early
};

std::uint8_t state_flags(const AgentState& agent, bool pedestrian_env, int crosswalk_cell);
std::vector<std::string> flag_names(std::uint8_t flags);

struct Transition {
  std::size_t target = 0;
  double prob = 0;

  bool operator==(const Transition&) const = default;
};

/// Explicit-state DTMC with a point initial distribution.
struct MarkovChain {
  std::vector<SystemState> states;
  std::vector<std::vector<Transition>> trans;
  std::size_t init = 0;
  std::vector<std::uint8_t> flags;
  int n_cells = 0;
  int crosswalk_cell = 0;
  bool pedestrian_env = false;

  std::size_t size() const noexcept { return trans.size(); }
  /// Largest |1 - row sum| over all states.
  double max_row_defect() const;

  bool operator==(const MarkovChain&) const = default;
};

/// Perception outcomes and their probabilities for a fixed environment, per band.
class ObservationModel {
 public:
  struct Outcome {
    std::vector<std::size_t> labels;
    Observation obs;
    double prob = 0;
  };

  ObservationModel(const DistanceParamCM& cm, const EnvState& env, ZeroColumnPolicy policy);

  const LabelSet& labels() const noexcept { return labels_; }
  std::size_t band_count() const noexcept { return outcomes_.size(); }
  const std::vector<Outcome>& outcomes(std::size_t band) const { return outcomes_.at(band); }
  /// One column distribution per object position (a single one in prop mode).
  const std::vector<ColumnDistribution>& columns(std::size_t band) const { return columns_.at(band); }

 private:
  LabelSet labels_;
  std::vector<std::vector<ColumnDistribution>> columns_;
  std::vector<std::vector<Outcome>> outcomes_;
};

/// Ego-to-crosswalk distance, max(k - cell, 1) * cell_length, in meters.
double crosswalk_distance_m(const AgentState& agent, const ScenarioConfig& cfg);

/// Band of the crosswalk objects as seen from agent, using cfg.band_edges_m.
std::size_t relevant_band(const AgentState& agent, const ScenarioConfig& cfg);

/// Band used for cm: relevant_band for distance-parametrized matrices, 0 otherwise.
std::size_t band_index(const DistanceParamCM& cm, const AgentState& agent, const ScenarioConfig& cfg);

/// Pr(s1, s2) for proposition-labeled matrices: sum of mu_k(P_i, P_j) over
/// the observations P_i steering s1 to s2.
double transition_prob_prop(const SystemState& s1, const SystemState& s2, const DistanceParamCM& cm,
                            const ScenarioConfig& cfg, const Controller& ctrl);

/// Pr(s1, s2) for class-labeled matrices: sum over observation tuples
/// steering s1 to s2 of the product of per-object mu_k.
double transition_prob_class(const SystemState& s1, const SystemState& s2, const DistanceParamCM& cm,
                             const ScenarioConfig& cfg, const Controller& ctrl);

/// The shipped controller for cfg over cm's labels.
StopController default_controller(const ScenarioConfig& cfg, const LabelSet& labels);

/// Breadth-first construction from (cell 1, v0, env). Terminal states
/// self-loop with probability 1.
MarkovChain build_chain(const ScenarioConfig& cfg, const DistanceParamCM& cm, const Controller& ctrl);
MarkovChain build_chain(const ScenarioConfig& cfg, const DistanceParamCM& cm);

}  // namespace pcmc
