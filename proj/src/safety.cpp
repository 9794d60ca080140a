#include "safety.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "error.hpp"

namespace pcmc {

std::string_view to_string(SafetySpec spec) {
  switch (spec) {
    case SafetySpec::phi1: return "phi1";
    case SafetySpec::phi2: return "phi2";
    case SafetySpec::phi3: return "phi3";
    case SafetySpec::all: return "phi_all";
  }
  return "?";
}

SafetySpec parse_spec(std::string_view text) {
  for (auto s : kAllSpecs)
    if (to_string(s) == text) return s;
  if (text == "all") return SafetySpec::all;
  fail(ErrorKind::invalid_argument, "unknown spec '" + std::string(text) + "' (phi1, phi2, phi3, phi_all)");
}

bool is_bad(const AgentState& a, SafetySpec spec, bool pedestrian_env, int k) {
  const bool stopped_at_cw = a.cell == k - 1 && a.speed == 0;
  switch (spec) {
    case SafetySpec::phi1: return !pedestrian_env && stopped_at_cw;
    case SafetySpec::phi2: return pedestrian_env && a.cell >= k - 1 && !stopped_at_cw;
    case SafetySpec::phi3: return a.speed == 0 && a.cell <= k - 2;
    case SafetySpec::all:
      return is_bad(a, SafetySpec::phi1, pedestrian_env, k) || is_bad(a, SafetySpec::phi2, pedestrian_env, k) ||
             is_bad(a, SafetySpec::phi3, pedestrian_env, k);
  }
  return false;
}

BadStates bad_states(const MarkovChain& chain, SafetySpec spec) {
  BadStates out;
  out.bad.assign(chain.size(), false);
  if (spec == SafetySpec::phi1 && chain.pedestrian_env)
    out.warning = "phi1 only constrains environments without a pedestrian; no bad states";
  if (spec == SafetySpec::phi2 && !chain.pedestrian_env)
    out.warning = "phi2 only constrains environments with a pedestrian; no bad states";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (is_bad(chain.states[i].agent, spec, chain.pedestrian_env, chain.crosswalk_cell)) {
      out.bad[i] = true;
      ++out.count;
    }
  }
  return out;
}

namespace {

void check_preconditions(const MarkovChain& chain, const std::vector<bool>& bad) {
  if (chain.size() == 0) fail(ErrorKind::invalid_argument, "empty Markov chain");
  if (chain.init >= chain.size()) fail(ErrorKind::invalid_argument, "initial state out of range");
  if (bad.size() != chain.size()) fail(ErrorKind::invalid_argument, "bad-state mask has the wrong size");
  for (std::size_t i = 0; i < chain.size(); ++i) {
    double s = 0;
    for (const auto& t : chain.trans[i]) {
      if (t.target >= chain.size()) fail(ErrorKind::invalid_argument, "transition target out of range");
      if (!(t.prob >= 0.0 && t.prob <= 1.0))
        fail(ErrorKind::invalid_argument, "transition probability outside [0,1] at state " + std::to_string(i));
      s += t.prob;
    }
    if (std::abs(s - 1.0) > kStochasticTolerance)
      fail(ErrorKind::invalid_argument,
           "chain is not row-stochastic at state " + std::to_string(i) + " (sum " + std::to_string(s) + ")");
  }
}

// Dense (I - A) x = b with partial pivoting.
std::vector<double> solve_gaussian(std::vector<double> m, std::vector<double> rhs, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r * n + col]) > std::abs(m[piv * n + col])) piv = r;
    if (std::abs(m[piv * n + col]) < 1e-300) fail(ErrorKind::numeric, "singular reachability system");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m[piv * n + c], m[col * n + c]);
      std::swap(rhs[piv], rhs[col]);
    }
    const double d = m[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r * n + col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= m[r * n + c] * x[c];
    x[r] = s / m[r * n + r];
  }
  return x;
}

struct SparseSystem {
  std::size_t n = 0;
  std::vector<std::vector<Transition>> rows;  // targets are unknown indices
  std::vector<double> b;
};

std::vector<double> solve_value_iteration(const SparseSystem& sys) {
  std::vector<double> x(sys.n, 0.0), next(sys.n, 0.0);
  constexpr std::size_t kMaxIterations = 50'000'000;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    double delta = 0;
    for (std::size_t i = 0; i < sys.n; ++i) {
      double v = sys.b[i];
      for (const auto& t : sys.rows[i]) v += t.prob * x[t.target];
      delta = std::max(delta, std::abs(v - x[i]));
      next[i] = v;
    }
    x.swap(next);
    if (delta < kSolveTolerance) return x;
  }
  fail(ErrorKind::numeric, "value iteration did not converge");
}

}  // namespace

SatisfactionResult prob_safe(const MarkovChain& chain, const std::vector<bool>& bad, SolveMethod method) {
  check_preconditions(chain, bad);
  const std::size_t n = chain.size();

  SatisfactionResult res;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = chain.trans[i];
    if (row.size() == 1 && row[0].target == i) ++res.absorbing_states;
  }
  res.transient_states = n - res.absorbing_states;
  res.method = method;

  if (bad[chain.init]) {
    res.probability = 0.0;
    return res;
  }

  // States that reach a bad state with positive probability.
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& t : chain.trans[i])
      if (t.prob > 0) pred[t.target].push_back(i);
  std::vector<bool> reaches(bad);
  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i)
    if (bad[i]) frontier.push_back(i);
  while (!frontier.empty()) {
    auto s = frontier.front();
    frontier.pop_front();
    for (auto p : pred[s])
      if (!reaches[p]) {
        reaches[p] = true;
        frontier.push_back(p);
      }
  }
  if (!reaches[chain.init]) {
    res.probability = 1.0;
    return res;
  }

  std::vector<std::size_t> unknown_index(n, n);
  std::vector<std::size_t> unknowns;
  for (std::size_t i = 0; i < n; ++i)
    if (reaches[i] && !bad[i]) {
      unknown_index[i] = unknowns.size();
      unknowns.push_back(i);
    }

  SparseSystem sys;
  sys.n = unknowns.size();
  sys.rows.resize(sys.n);
  sys.b.assign(sys.n, 0.0);
  for (std::size_t u = 0; u < sys.n; ++u)
    for (const auto& t : chain.trans[unknowns[u]]) {
      if (bad[t.target])
        sys.b[u] += t.prob;
      else if (unknown_index[t.target] != n)
        sys.rows[u].push_back({unknown_index[t.target], t.prob});
    }
  res.unknowns = sys.n;

  if (method == SolveMethod::automatic)
    method = sys.n <= kDenseSolveLimit ? SolveMethod::gaussian : SolveMethod::value_iteration;
  res.method = method;

  std::vector<double> x;
  if (method == SolveMethod::gaussian) {
    std::vector<double> m(sys.n * sys.n, 0.0);
    for (std::size_t u = 0; u < sys.n; ++u) {
      m[u * sys.n + u] += 1.0;
      for (const auto& t : sys.rows[u]) m[u * sys.n + t.target] -= t.prob;
    }
    x = solve_gaussian(std::move(m), sys.b, sys.n);
  } else {
    x = solve_value_iteration(sys);
  }

  for (std::size_t u = 0; u < sys.n; ++u) {
    double r = x[u] - sys.b[u];
    for (const auto& t : sys.rows[u]) r -= t.prob * x[t.target];
    res.residual = std::max(res.residual, std::abs(r));
  }

  const double reach = x[unknown_index[chain.init]];
  res.probability = std::clamp(1.0 - reach, 0.0, 1.0);
  return res;
}

}  // namespace pcmc
