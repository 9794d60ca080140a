#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "chain.hpp"

namespace pcmc {

/// Invariant specifications of the form "always not bad".
///   phi1: no pedestrian  -> never stopped at C_{k-1}
///   phi2: pedestrian     -> never at/after C_{k-1} unless stopped at C_{k-1}
///   phi3: never stopped at any of C_1..C_{k-2}
enum class SafetySpec { phi1, phi2, phi3, all };

std::string_view to_string(SafetySpec spec);
SafetySpec parse_spec(std::string_view text);
inline constexpr SafetySpec kAllSpecs[] = {SafetySpec::phi1, SafetySpec::phi2, SafetySpec::phi3,
                                           SafetySpec::all};

bool is_bad(const AgentState& agent, SafetySpec spec, bool pedestrian_env, int crosswalk_cell);

struct BadStates {
  std::vector<bool> bad;
  std::size_t count = 0;
  std::string warning;  // set when the spec's guard excludes the chain's environment
};

BadStates bad_states(const MarkovChain& chain, SafetySpec spec);

enum class SolveMethod { automatic, gaussian, value_iteration };

struct SatisfactionResult {
  double probability = 1.0;
  double residual = 0.0;
  std::size_t transient_states = 0;
  std::size_t absorbing_states = 0;
  std::size_t unknowns = 0;
  SolveMethod method = SolveMethod::automatic;
};

inline constexpr std::size_t kDenseSolveLimit = 2000;
inline constexpr double kSolveTolerance = 1e-12;
inline constexpr double kStochasticTolerance = 1e-9;

/// 1 - P(eventually bad) from the initial state.
SatisfactionResult prob_safe(const MarkovChain& chain, const std::vector<bool>& bad,
                             SolveMethod method = SolveMethod::automatic);

}  // namespace pcmc
