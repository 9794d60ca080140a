#include "sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "error.hpp"
#include "text_util.hpp"

namespace pcmc {

namespace {

struct Variant {
  std::string name;
  CmMode mode;
  DistanceParamCM cm;
};

std::string key(const SweepRow& r) {
  return r.variant + " env=" + r.env + " v_max=" + std::to_string(r.v_max) + " v0=" + std::to_string(r.v0);
}

}  // namespace

SweepResult sweep(const ScenarioConfig& base, const SweepSettings& grid, const DistanceParamCM& class_cm,
                  const DistanceParamCM& prop_cm, const SweepOptions& options) {
  if (class_cm.labels().mode() != CmMode::class_labeled)
    fail(ErrorKind::validation, "sweep class matrix is not class-labeled");
  if (prop_cm.labels().mode() != CmMode::prop_labeled)
    fail(ErrorKind::validation, "sweep proposition matrix is not proposition-labeled");

  std::vector<Variant> variants = {
      {"class", CmMode::class_labeled, without_distance(aggregate(class_cm))},
      {"class_dist", CmMode::class_labeled, class_cm},
      {"prop", CmMode::prop_labeled, without_distance(aggregate(prop_cm))},
      {"prop_dist", CmMode::prop_labeled, prop_cm},
  };

  struct Job {
    std::size_t variant;
    ScenarioConfig cfg;
  };
  std::vector<Job> jobs;
  SweepResult result;
  result.with_mc = options.trials > 0;

  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    for (const auto& env : grid.envs) {
      for (int v_max : grid.v_max_values) {
        for (int v0 = 1; v0 <= v_max; ++v0) {
          ScenarioConfig cfg = base;
          cfg.mode = variants[vi].mode;
          cfg.env = env;
          cfg.v_max = v_max;
          cfg.v0 = v0;
          if (cfg.cruise_speed > v_max) cfg.cruise_speed = 0;
          cfg.band_edges_m = variants[vi].cm.bands ? variants[vi].cm.bands->edges() : std::vector<double>{};
          validate(cfg);
          if (!stop_feasible({1, v0}, cfg)) {
            if (vi == 0 && &env == &grid.envs.front())
              result.skipped.push_back("v_max=" + std::to_string(v_max) + " v0=" + std::to_string(v0));
            continue;
          }
          jobs.push_back({vi, cfg});
          SweepRow row;
          row.variant = variants[vi].name;
          row.env = env.name();
          row.v_max = v_max;
          row.v0 = v0;
          result.rows.push_back(row);
        }
      }
    }
  }

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const auto& job = jobs[i];
        const auto& cm = variants[job.variant].cm;
        const auto chain = build_chain(job.cfg, cm);
        const auto sat = prob_safe(chain, bad_states(chain, SafetySpec::all).bad);
        auto& row = result.rows[i];
        row.prob = sat.probability;
        row.residual = sat.residual;
        row.states = chain.size();
        if (options.trials > 0)
          row.mc = simulate(job.cfg, cm, SafetySpec::all, options.trials, splitmix64(options.seed + i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return result;
}

const SweepRow* SweepResult::find(const std::string& variant, const std::string& env, int v_max, int v0) const {
  for (const auto& r : rows)
    if (r.variant == variant && r.env == env && r.v_max == v_max && r.v0 == v0) return &r;
  return nullptr;
}

std::string SweepResult::csv() const {
  std::ostringstream os;
  os << "variant,env,v_max,v0,prob";
  if (with_mc) os << ",mc_estimate,mc_stderr";
  os << '\n';
  for (const auto& r : rows) {
    os << r.variant << ',' << r.env << ',' << r.v_max << ',' << r.v0 << ',' << text::format_prob(r.prob);
    if (with_mc) {
      if (r.mc)
        os << ',' << text::format_prob(r.mc->estimate) << ',' << text::format_prob(r.mc->std_error);
      else
        os << ",,";
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> SweepResult::monotonicity_violations(double tol) const {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    if (a.variant == b.variant && a.env == b.env && a.v_max == b.v_max && b.v0 == a.v0 + 1 &&
        b.prob > a.prob + tol) {
      std::ostringstream os;
      os << key(b) << ": " << text::format_prob(b.prob) << " > " << text::format_prob(a.prob) << " at v0="
         << a.v0;
      out.push_back(os.str());
    }
  }
  return out;
}

std::vector<std::string> SweepResult::prop_below_class(double tol) const {
  std::vector<std::string> out;
  const std::pair<const char*, const char*> pairs[] = {{"class", "prop"}, {"class_dist", "prop_dist"}};
  for (const auto& r : rows) {
    for (const auto& [cls, prop] : pairs) {
      if (r.variant != cls) continue;
      const auto* p = find(prop, r.env, r.v_max, r.v0);
      if (p && p->prob + tol < r.prob) {
        std::ostringstream os;
        os << key(*p) << ": " << text::format_prob(p->prob) << " < " << cls << " " << text::format_prob(r.prob);
        out.push_back(os.str());
      }
    }
  }
  return out;
}

std::vector<DistanceRatio> SweepResult::distance_ratios() const {
  std::vector<DistanceRatio> out;
  for (const auto& r : rows) {
    if (r.v0 != 1 || (r.variant != "class" && r.variant != "prop")) continue;
    const auto* d = find(r.variant + "_dist", r.env, r.v_max, 1);
    if (!d) continue;
    DistanceRatio q;
    q.family = r.variant;
    q.env = r.env;
    q.v_max = r.v_max;
    q.distance = d->prob;
    q.aggregated = r.prob;
    q.ratio = r.prob > 0 ? d->prob / r.prob : std::numeric_limits<double>::infinity();
    out.push_back(q);
  }
  return out;
}

std::vector<std::string> SweepResult::mc_disagreements(double k) const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (!r.mc) continue;
    const double diff = std::abs(r.prob - r.mc->estimate);
    if (diff > k * r.mc->std_error) {
      std::ostringstream os;
      os << key(r) << ": |" << text::format_prob(r.prob) << " - " << text::format_prob(r.mc->estimate)
         << "| > " << k << " * " << text::format_prob(r.mc->std_error);
      out.push_back(os.str());
    }
  }
  return out;
}

std::string SweepResult::summary() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);

  std::vector<std::string> envs;
  std::vector<std::pair<int, int>> points;
  for (const auto& r : rows) {
    if (std::find(envs.begin(), envs.end(), r.env) == envs.end()) envs.push_back(r.env);
    std::pair<int, int> p{r.v_max, r.v0};
    if (std::find(points.begin(), points.end(), p) == points.end()) points.push_back(p);
  }
  std::sort(points.begin(), points.end());

  os << "Satisfaction probability of phi_all by matrix variant\n";
  for (const auto& env : envs) {
    os << "\nenv = " << env << '\n';
    os << "v_max  v0 ";
    for (auto v : kVariants) os << std::setw(12) << v;
    os << '\n';
    for (auto [v_max, v0] : points) {
      os << std::setw(5) << v_max << std::setw(4) << v0 << ' ';
      for (auto v : kVariants) {
        const auto* r = find(v, env, v_max, v0);
        if (r)
          os << std::setw(12) << r->prob;
        else
          os << std::setw(12) << "-";
      }
      os << '\n';
    }
  }

  auto list = [&](const char* title, const std::vector<std::string>& items) {
    os << '\n' << title << ": " << (items.empty() ? "none" : std::to_string(items.size())) << '\n';
    for (const auto& i : items) os << "  " << i << '\n';
  };
  list("Monotonicity violations (probability increasing with v0)", monotonicity_violations());
  list("Grid points with proposition variant below class variant", prop_below_class());

  os << "\nDistance-parametrized / aggregated ratio at v0 = 1\n";
  for (const auto& q : distance_ratios()) {
    os << "  " << std::left << std::setw(6) << q.family << std::right << " env=" << q.env << " v_max=" << q.v_max
       << "  " << q.distance << " / " << q.aggregated << " = ";
    if (std::isfinite(q.ratio))
      os << std::setprecision(3) << q.ratio << std::setprecision(6);
    else
      os << "inf";
    if (q.ratio >= 1.5)
      os << "  (>= 1.5)";
    else if (q.ratio < 1.0)
      os << "  (below 1)";
    os << '\n';
  }

  if (with_mc) list("Monte Carlo estimates outside 3 standard errors", mc_disagreements());
  if (!skipped.empty()) {
    os << "\nSkipped infeasible initial speeds:";
    for (const auto& s : skipped) os << ' ' << s << ';';
    os << '\n';
  }
  return os.str();
}

}  // namespace pcmc
