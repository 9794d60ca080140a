#include "chain.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "error.hpp"

namespace pcmc {

std::uint8_t state_flags(const AgentState& agent, bool pedestrian_env, int crosswalk_cell) {
  std::uint8_t f = 0;
  if (agent.cell == crosswalk_cell - 1 && agent.speed == 0) f |= kStoppedAtCrosswalk;
  if (pedestrian_env) f |= kPedestrianEnv;
  if (agent.cell >= crosswalk_cell) f |= kPastCrosswalk;
  if (agent.speed == 0 && agent.cell <= crosswalk_cell - 2) f |= kStoppedEarly;
  return f;
}

std::vector<std::string> flag_names(std::uint8_t flags) {
  std::vector<std::string> out;
  if (flags & kStoppedAtCrosswalk) out.emplace_back("stopped_at_cw");
  if (flags & kPedestrianEnv) out.emplace_back("ped_env");
  if (flags & kPastCrosswalk) out.emplace_back("past_cw");
  if (flags & kStoppedEarly) out.emplace_back("stopped_early");
  return out;
}

double MarkovChain::max_row_defect() const {
  double worst = 0;
  for (const auto& row : trans) {
    double s = 0;
    for (const auto& t : row) s += t.prob;
    worst = std::max(worst, std::abs(1.0 - s));
  }
  return worst;
}

ObservationModel::ObservationModel(const DistanceParamCM& cm, const EnvState& env,
                                   ZeroColumnPolicy policy)
    : labels_(cm.labels()) {
  cm.validate();
  const auto truth = true_labels(labels_, env);
  const auto space = observation_space(labels_, env);
  for (const auto& m : cm.per_band) {
    std::vector<ColumnDistribution> cols;
    for (auto t : truth) cols.push_back(normalize_column(m, t, policy));
    std::vector<Outcome> outs;
    outs.reserve(space.size());
    for (const auto& tuple : space) {
      double p = 1.0;
      for (std::size_t i = 0; i < tuple.size(); ++i) p *= cols[i].probs[tuple[i]];
      outs.push_back({tuple, observe(labels_, tuple), p});
    }
    columns_.push_back(std::move(cols));
    outcomes_.push_back(std::move(outs));
  }
}

double crosswalk_distance_m(const AgentState& agent, const ScenarioConfig& cfg) {
  return std::max(cfg.crosswalk_cell - agent.cell, 1) * cfg.cell_length_m;
}

std::size_t relevant_band(const AgentState& agent, const ScenarioConfig& cfg) {
  if (cfg.band_edges_m.empty()) fail(ErrorKind::validation, "band_edges_m is required for distance bands");
  return DistanceBands(cfg.band_edges_m).band_for(crosswalk_distance_m(agent, cfg));
}

std::size_t band_index(const DistanceParamCM& cm, const AgentState& agent, const ScenarioConfig& cfg) {
  if (!cm.bands) return 0;
  return cm.bands->band_for(crosswalk_distance_m(agent, cfg));
}

namespace {

void check_compatible(const ScenarioConfig& cfg, const DistanceParamCM& cm) {
  validate(cfg);
  cm.validate();
  if (cm.labels().mode() != cfg.mode)
    fail(ErrorKind::validation, "confusion matrix mode '" + std::string(to_string(cm.labels().mode())) +
                                    "' does not match config mode '" + std::string(to_string(cfg.mode)) + "'");
  if (cm.bands && !cfg.band_edges_m.empty() && cm.bands->edges() != cfg.band_edges_m)
    fail(ErrorKind::validation, "band_edges_m does not match the confusion matrix bands");
}

double transition_prob(const SystemState& s1, const SystemState& s2, const DistanceParamCM& cm,
                       const ScenarioConfig& cfg, const Controller& ctrl, CmMode expected) {
  if (cm.labels().mode() != expected)
    fail(ErrorKind::invalid_argument, "confusion matrix has the wrong labeling mode");
  if (!(s1.env == s2.env)) return 0.0;
  const auto& labels = cm.labels();
  const auto& m = cm.per_band.at(band_index(cm, s1.agent, cfg));
  const auto truth = true_labels(labels, s1.env);
  std::vector<ColumnDistribution> cols;
  for (auto t : truth) cols.push_back(normalize_column(m, t, cfg.zero_column_policy()));

  double total = 0.0;
  for (const auto& y : observation_space(labels, s1.env)) {
    if (step_dynamics(s1.agent, ctrl(s1.agent, observe(labels, y)), cfg) != s2.agent) continue;
    double p = 1.0;
    for (std::size_t i = 0; i < y.size(); ++i) p *= cols[i].probs[y[i]];
    total += p;
  }
  return total;
}

}  // namespace

double transition_prob_prop(const SystemState& s1, const SystemState& s2, const DistanceParamCM& cm,
                            const ScenarioConfig& cfg, const Controller& ctrl) {
  return transition_prob(s1, s2, cm, cfg, ctrl, CmMode::prop_labeled);
}

double transition_prob_class(const SystemState& s1, const SystemState& s2, const DistanceParamCM& cm,
                             const ScenarioConfig& cfg, const Controller& ctrl) {
  return transition_prob(s1, s2, cm, cfg, ctrl, CmMode::class_labeled);
}

StopController default_controller(const ScenarioConfig& cfg, const LabelSet& labels) {
  return StopController(cfg, labels.class_bit(cfg.pedestrian_class));
}

MarkovChain build_chain(const ScenarioConfig& cfg, const DistanceParamCM& cm, const Controller& ctrl) {
  check_compatible(cfg, cm);
  const ObservationModel model(cm, cfg.env, cfg.zero_column_policy());

  MarkovChain chain;
  chain.n_cells = cfg.n_cells;
  chain.crosswalk_cell = cfg.crosswalk_cell;
  chain.pedestrian_env = cfg.env.contains(cfg.pedestrian_class);

  const std::size_t bound = static_cast<std::size_t>(cfg.n_cells) * (cfg.v_max + 1);
  std::map<AgentState, std::size_t> index;
  auto intern = [&](const AgentState& a) {
    auto [it, inserted] = index.emplace(a, chain.states.size());
    if (inserted) {
      if (chain.states.size() >= bound)
        fail(ErrorKind::numeric, "state space exceeds n_cells * (v_max + 1) = " + std::to_string(bound));
      chain.states.push_back({a, cfg.env});
      chain.flags.push_back(state_flags(a, chain.pedestrian_env, cfg.crosswalk_cell));
      chain.trans.emplace_back();
    }
    return it->second;
  };

  chain.init = intern({1, cfg.v0});
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    const auto agent = chain.states[i].agent;
    if (is_terminal(agent, cfg)) {
      chain.trans[i] = {{i, 1.0}};
      continue;
    }
    std::vector<Transition> row;
    for (const auto& out : model.outcomes(band_index(cm, agent, cfg))) {
      if (out.prob == 0.0) continue;
      const auto next = step_dynamics(agent, ctrl(agent, out.obs), cfg);
      const auto j = intern(next);
      auto it = std::find_if(row.begin(), row.end(), [&](const Transition& t) { return t.target == j; });
      if (it == row.end())
        row.push_back({j, out.prob});
      else
        it->prob += out.prob;
    }
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.target < b.target; });
    chain.trans[i] = std::move(row);
  }
  return chain;
}

MarkovChain build_chain(const ScenarioConfig& cfg, const DistanceParamCM& cm) {
  check_compatible(cfg, cm);
  const auto ctrl = default_controller(cfg, cm.labels());
  return build_chain(cfg, cm, Controller(ctrl));
}

}  // namespace pcmc
