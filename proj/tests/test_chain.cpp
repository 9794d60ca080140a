#include <doctest.h>

#include <map>

#include "chain.hpp"
#include "error.hpp"
#include "oracles.hpp"

using namespace pcmc;

namespace {

DistanceParamCM load(const std::string& name, CmMode mode) { return load_fixture(oracle::fixture(name), mode); }

struct Variant {
  const char* name;
  CmMode mode;
  bool aggregated;
};

constexpr Variant kVariantsUnderTest[] = {{"cam_front_class.cm", CmMode::class_labeled, true},
                                          {"cam_front_class.cm", CmMode::class_labeled, false},
                                          {"cam_front_prop.cm", CmMode::prop_labeled, true},
                                          {"cam_front_prop.cm", CmMode::prop_labeled, false}};

DistanceParamCM variant_cm(const Variant& v) {
  auto dp = load(v.name, v.mode);
  return v.aggregated ? without_distance(aggregate(dp)) : dp;
}

}  // namespace

TEST_CASE("relevant band uses the distance to the crosswalk") {
  auto cfg = oracle::scenario(3, 1, {"ped"});
  cfg.band_edges_m = oracle::kBands;
  CHECK(crosswalk_distance_m({1, 1}, cfg) == 70.0);
  CHECK(relevant_band({1, 1}, cfg) == 6);
  CHECK(relevant_band({7, 1}, cfg) == 0);
  CHECK(relevant_band({9, 1}, cfg) == 0);  // past the crosswalk clamps to one cell
  cfg.band_edges_m.clear();
  CHECK_THROWS_AS(relevant_band({1, 1}, cfg), Error);
}

TEST_CASE("prop fixture, pedestrian at 10 m: brake with 22/85, keep going with 63/85") {
  auto cm = load("cam_front_prop.cm", CmMode::prop_labeled);
  auto cfg = oracle::scenario(2, 1, {"ped"}, CmMode::prop_labeled);
  auto ctrl = Controller(default_controller(cfg, cm.labels()));
  SystemState s{{7, 1}, cfg.env};
  CHECK(transition_prob_prop(s, {{8, 0}, cfg.env}, cm, cfg, ctrl) == doctest::Approx(22.0 / 85).epsilon(1e-15));
  CHECK(transition_prob_prop(s, {{8, 2}, cfg.env}, cm, cfg, ctrl) == doctest::Approx(63.0 / 85).epsilon(1e-15));
  CHECK(transition_prob_prop(s, {{8, 1}, cfg.env}, cm, cfg, ctrl) == 0.0);
  CHECK_THROWS_AS(transition_prob_class(s, {{8, 0}, cfg.env}, cm, cfg, ctrl), Error);
}

TEST_CASE("built chains match nested enumeration of perception outcomes") {
  const std::vector<std::vector<std::string>> envs = {{"ped"}, {}, {"obs"}, {"ped", "obs"}};
  for (const auto& v : kVariantsUnderTest)
    for (const auto& env : envs)
      for (int vmax = 1; vmax <= 3; ++vmax)
        for (int v0 = 1; v0 <= vmax; ++v0) {
          auto cm = variant_cm(v);
          auto cfg = oracle::scenario(vmax, v0, env, v.mode);
          cfg.zero_column_fallback = true;
          auto ctrl = Controller(default_controller(cfg, cm.labels()));
          auto chain = build_chain(cfg, cm, ctrl);
          REQUIRE(chain.states[chain.init].agent == AgentState{1, v0});
          for (std::size_t i = 0; i < chain.size(); ++i) {
            const auto& a = chain.states[i].agent;
            std::map<AgentState, double> got;
            for (const auto& t : chain.trans[i]) got[chain.states[t.target].agent] += t.prob;
            if (is_terminal(a, cfg)) {
              REQUIRE(chain.trans[i] == std::vector<Transition>{{i, 1.0}});
              continue;
            }
            auto band = cm.bands ? cm.bands->band_for(std::max(cfg.crosswalk_cell - a.cell, 1) * 10.0) : 0;
            auto m = cm.per_band[band];
            // zero columns fall back to emp; mirror that in the raw counts
            for (std::size_t c = 0; c < m.size(); ++c)
              if (m.column_sum(c) == 0) m.add(m.labels().empty_index(), c);
            auto expect = oracle::successors(a, m, env, cfg, ctrl);
            REQUIRE(got.size() == expect.size());
            for (const auto& [s, p] : expect) REQUIRE(got[s] == doctest::Approx(p).epsilon(1e-12));
          }
        }
}

TEST_CASE("transition_prob functions agree with the built rows") {
  for (const auto& v : kVariantsUnderTest) {
    auto cm = variant_cm(v);
    auto cfg = oracle::scenario(3, 2, {"ped"}, v.mode);
    auto ctrl = Controller(default_controller(cfg, cm.labels()));
    auto chain = build_chain(cfg, cm, ctrl);
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (is_terminal(chain.states[i].agent, cfg)) continue;
      for (const auto& t : chain.trans[i]) {
        double p = v.mode == CmMode::prop_labeled
                       ? transition_prob_prop(chain.states[i], chain.states[t.target], cm, cfg, ctrl)
                       : transition_prob_class(chain.states[i], chain.states[t.target], cm, cfg, ctrl);
        REQUIRE(p == doctest::Approx(t.prob).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("empty environment with the class fixture cruises deterministically to the end") {
  auto cm = load("cam_front_class.cm", CmMode::class_labeled);
  for (int vmax = 1; vmax <= 3; ++vmax) {
    auto cfg = oracle::scenario(vmax, 1, {});
    auto chain = build_chain(cfg, cm);
    std::size_t s = chain.init;
    for (std::size_t step = 0; step < chain.size(); ++step) {
      REQUIRE(chain.trans[s].size() == 1);
      CHECK(chain.trans[s][0].prob == 1.0);
      s = chain.trans[s][0].target;
    }
    CHECK(chain.states[s].agent.cell == cfg.n_cells);
  }
}

TEST_CASE("identity matrix gives one transition per state") {
  auto cm = load("identity_prop.cm", CmMode::prop_labeled);
  auto cfg = oracle::scenario(3, 2, {"ped"}, CmMode::prop_labeled);
  auto chain = build_chain(cfg, cm);
  for (const auto& row : chain.trans) CHECK(row.size() == 1);
}

TEST_CASE("property: chains are row-stochastic and within the state bound") {
  for (const auto& v : kVariantsUnderTest)
    for (auto env : {std::vector<std::string>{"ped"}, std::vector<std::string>{}})
      for (int vmax = 1; vmax <= 4; ++vmax)
        for (int v0 = 1; v0 <= vmax; ++v0) {
          auto cfg = oracle::scenario(vmax, v0, env, v.mode);
          cfg.zero_column_fallback = true;
          auto chain = build_chain(cfg, variant_cm(v));
          CHECK(chain.max_row_defect() <= 1e-9);
          CHECK(chain.size() <= static_cast<std::size_t>(cfg.n_cells * (vmax + 1)));
          for (std::size_t i = 0; i < chain.size(); ++i) {
            for (std::size_t j = 1; j < chain.trans[i].size(); ++j)
              REQUIRE(chain.trans[i][j - 1].target < chain.trans[i][j].target);
            for (const auto& t : chain.trans[i]) REQUIRE(t.prob > 0.0);
          }
        }
}

TEST_CASE("labels follow the state predicates") {
  auto cm = load("cam_front_class.cm", CmMode::class_labeled);
  auto chain = build_chain(oracle::scenario(2, 1, {"ped"}), cm);
  CHECK(chain.pedestrian_env);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& a = chain.states[i].agent;
    CHECK(((chain.flags[i] & kStoppedAtCrosswalk) != 0) == (a.cell == 7 && a.speed == 0));
    CHECK(((chain.flags[i] & kPastCrosswalk) != 0) == (a.cell >= 8));
    CHECK((chain.flags[i] & kPedestrianEnv) != 0);
  }
  CHECK(flag_names(kStoppedAtCrosswalk | kPedestrianEnv) == std::vector<std::string>{"stopped_at_cw", "ped_env"});
}

TEST_CASE("incompatible inputs are rejected") {
  auto cm = load("cam_front_class.cm", CmMode::class_labeled);
  auto cfg = oracle::scenario(2, 1, {"ped"}, CmMode::prop_labeled);
  CHECK_THROWS_AS(build_chain(cfg, cm), Error);
  cfg.mode = CmMode::class_labeled;
  cfg.band_edges_m = {5, 10};
  CHECK_THROWS_AS(build_chain(cfg, cm), Error);
  cfg.band_edges_m = oracle::kBands;
  CHECK_NOTHROW(build_chain(cfg, cm));
  cfg.env.objects = {"car"};
  CHECK_THROWS_AS(build_chain(cfg, cm), Error);
}

TEST_CASE("strict zero-column policy surfaces as a numeric error") {
  auto labels = LabelSet::for_classes({"ped", "obs"});
  auto cm = without_distance(ConfusionMatrix(labels, {0, 0, 0, 0, 4, 0, 0, 1, 7}));
  auto cfg = oracle::scenario(1, 1, {"ped"});
  try {
    build_chain(cfg, cm);
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
  }
  cfg.zero_column_fallback = true;
  auto chain = build_chain(cfg, cm);
  CHECK(chain.max_row_defect() <= 1e-12);
}
