#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "mc_oracle.hpp"

namespace pcmc {

/// The four matrix variants compared by the sweep, in output order.
inline constexpr const char* kVariants[] = {"class", "class_dist", "prop", "prop_dist"};

struct SweepRow {
  std::string variant;
  std::string env;
  int v_max = 0;
  int v0 = 0;
  double prob = 0;
  double residual = 0;
  std::size_t states = 0;
  std::optional<SimEstimate> mc;
};

struct DistanceRatio {
  std::string family;  // "class" or "prop"
  std::string env;
  int v_max = 0;
  double distance = 0;
  double aggregated = 0;
  double ratio = 0;  // distance / aggregated; +inf when aggregated is 0
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool with_mc = false;
  std::vector<std::string> skipped;  // infeasible (v_max, v0) pairs

  const SweepRow* find(const std::string& variant, const std::string& env, int v_max, int v0) const;

  /// CSV with header variant,env,v_max,v0,prob[,mc_estimate,mc_stderr].
  std::string csv() const;
  std::string summary() const;

  /// Places where probability rises with v0 by more than tol.
  std::vector<std::string> monotonicity_violations(double tol = 1e-12) const;
  /// Grid points where a proposition variant falls below its class counterpart.
  std::vector<std::string> prop_below_class(double tol = 1e-12) const;
  /// Distance-parametrized over aggregated probability at v0 = 1.
  std::vector<DistanceRatio> distance_ratios() const;
  /// Rows whose Monte Carlo estimate is more than k standard errors away.
  std::vector<std::string> mc_disagreements(double k = 3.0) const;
};

struct SweepOptions {
  std::uint64_t trials = 0;  // 0 disables the Monte Carlo columns
  std::uint64_t seed = 2021;
  unsigned threads = 0;      // 0 = hardware concurrency
};

/// Evaluates phi_all over variants x envs x v_max x feasible v0.
/// Rows come out in that nesting order regardless of thread count.
SweepResult sweep(const ScenarioConfig& base, const SweepSettings& grid, const DistanceParamCM& class_cm,
                  const DistanceParamCM& prop_cm, const SweepOptions& options = {});

}  // namespace pcmc
