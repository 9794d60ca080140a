#include "mc_oracle.hpp"

#include <cmath>

#include "error.hpp"

namespace pcmc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

TrialStream::TrialStream(std::uint64_t seed, std::uint64_t trial)
    : engine_(splitmix64(splitmix64(seed) ^ trial)) {}

std::size_t TrialStream::categorical(std::span<const double> probs) {
  const double u = uniform();
  double cdf = 0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    last_positive = i;
    cdf += probs[i];
    if (u < cdf) return i;
  }
  return last_positive;  // u landed in the rounding gap above the final cdf
}

namespace {

SimEstimate finish(std::uint64_t trials, std::uint64_t successes, std::uint64_t seed, std::uint64_t hits) {
  SimEstimate e;
  e.trials = trials;
  e.successes = successes;
  e.seed = seed;
  e.horizon_hits = hits;
  e.estimate = static_cast<double>(successes) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials));
  return e;
}

template <typename Ctrl>
SimEstimate run(const ScenarioConfig& cfg, const DistanceParamCM& cm, SafetySpec spec, std::uint64_t trials,
                std::uint64_t seed, const Ctrl& ctrl) {
  if (trials < 1) fail(ErrorKind::invalid_argument, "simulation needs at least one trial");
  validate(cfg);
  cm.validate();
  if (cm.labels().mode() != cfg.mode)
    fail(ErrorKind::validation, "confusion matrix mode does not match config mode");

  const ObservationModel model(cm, cfg.env, cfg.zero_column_policy());
  const auto& labels = model.labels();
  const bool ped_env = cfg.env.contains(cfg.pedestrian_class);
  const int k = cfg.crosswalk_cell;
  const std::uint64_t horizon = 10ull * static_cast<std::uint64_t>(cfg.n_cells);

  std::uint64_t successes = 0, hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    TrialStream rng(seed, t);
    AgentState agent{1, cfg.v0};
    bool safe = !is_bad(agent, spec, ped_env, k);
    std::uint64_t steps = 0;
    while (safe && !is_terminal(agent, cfg)) {
      if (steps == horizon) {
        ++hits;
        break;
      }
      Observation obs;
      for (const auto& col : model.columns(band_index(cm, agent, cfg)))
        obs.detected |= labels.objects(rng.categorical(col.probs));
      agent = step_dynamics(agent, ctrl(agent, obs), cfg);
      safe = !is_bad(agent, spec, ped_env, k);
      ++steps;
    }
    if (safe) ++successes;
  }
  return finish(trials, successes, seed, hits);
}

}  // namespace

SimEstimate simulate(const ScenarioConfig& cfg, const DistanceParamCM& cm, SafetySpec spec,
                     std::uint64_t trials, std::uint64_t seed) {
  validate(cfg);
  return run(cfg, cm, spec, trials, seed, default_controller(cfg, cm.labels()));
}

SimEstimate simulate(const ScenarioConfig& cfg, const DistanceParamCM& cm, SafetySpec spec,
                     std::uint64_t trials, std::uint64_t seed, const Controller& ctrl) {
  return run(cfg, cm, spec, trials, seed, ctrl);
}

SimEstimate simulate_chain(const MarkovChain& chain, const std::vector<bool>& bad, std::uint64_t trials,
                           std::uint64_t seed, std::uint64_t max_steps) {
  if (trials < 1) fail(ErrorKind::invalid_argument, "simulation needs at least one trial");
  if (bad.size() != chain.size()) fail(ErrorKind::invalid_argument, "bad-state mask has the wrong size");
  std::vector<std::vector<double>> probs(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i)
    for (const auto& t : chain.trans[i]) probs[i].push_back(t.prob);

  std::uint64_t successes = 0, hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    TrialStream rng(seed, t);
    std::size_t s = chain.init;
    bool safe = !bad[s];
    for (std::uint64_t step = 0; safe; ++step) {
      const auto& row = chain.trans[s];
      if (row.size() == 1 && row[0].target == s) break;
      if (step == max_steps) {
        ++hits;
        break;
      }
      s = row[rng.categorical(probs[s])].target;
      safe = !bad[s];
    }
    if (safe) ++successes;
  }
  return finish(trials, successes, seed, hits);
}

}  // namespace pcmc
