#pragma once

#include <string>
#include <vector>

#include "chain.hpp"

namespace pcmc {

// Explicit DTMC files readable by external probabilistic model checkers:
//   model.tra     "dtmc" then one "src dst prob" line per transition
//   model.lab     "#DECLARATION" / "init bad" / "#END" then "state label..." lines
//   model.states  "index cell speed env" per state
inline constexpr const char* kTransitionsFile = "model.tra";
inline constexpr const char* kLabelsFile = "model.lab";
inline constexpr const char* kStateMapFile = "model.states";

struct ExplicitModel {
  MarkovChain chain;
  std::vector<bool> bad;
};

std::string render_transitions(const MarkovChain& chain);
std::string render_labels(const MarkovChain& chain, const std::vector<bool>& bad);
std::string render_state_map(const MarkovChain& chain);

void write_explicit(const MarkovChain& chain, const std::vector<bool>& bad, const std::string& dir);

/// Reads the three files back. Geometry and the pedestrian class are not in
/// the files and come from the scenario.
ExplicitModel read_explicit(const std::string& dir, int n_cells, int crosswalk_cell,
                            const std::string& pedestrian_class = "ped");

}  // namespace pcmc
