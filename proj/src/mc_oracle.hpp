#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "chain.hpp"
#include "safety.hpp"

namespace pcmc {

struct SimEstimate {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double estimate = 0;
  double std_error = 0;
  std::uint64_t seed = 0;
  std::uint64_t horizon_hits = 0;  // trials cut off at the step cap

  bool operator==(const SimEstimate&) const = default;
};

/// Random stream of one trial. Each trial owns an mt19937_64 seeded from a
/// SplitMix64 mix of (seed, trial index), so results do not depend on the
/// order trials run in. Uniforms take the top 53 bits of each draw.
class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t trial);

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Inverse-CDF draw over probs in index order.
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Samples closed-loop traces from (cell 1, v0, env) with a fresh perception
/// draw per step. A trial succeeds when it never visits a bad state.
/// Trials stop at terminal states or after 10 * n_cells steps.
SimEstimate simulate(const ScenarioConfig& cfg, const DistanceParamCM& cm, SafetySpec spec,
                     std::uint64_t trials, std::uint64_t seed);
SimEstimate simulate(const ScenarioConfig& cfg, const DistanceParamCM& cm, SafetySpec spec,
                     std::uint64_t trials, std::uint64_t seed, const Controller& ctrl);

/// Samples paths of an explicit chain until a bad state or a probability-1
/// self-loop; max_steps caps each path.
SimEstimate simulate_chain(const MarkovChain& chain, const std::vector<bool>& bad, std::uint64_t trials,
                           std::uint64_t seed, std::uint64_t max_steps = 100000);

}  // namespace pcmc
