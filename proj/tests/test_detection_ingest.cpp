#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "detection_ingest.hpp"
#include "error.hpp"
#include "oracles.hpp"

using namespace pcmc;

namespace {

DetectionRecord gt(std::string f, Box b, double d, std::string c) { return {std::move(f), b, d, std::move(c)}; }
PredictionRecord pr(std::string f, Box b, std::string c, double conf) {
  return {std::move(f), b, std::move(c), conf};
}

const std::vector<std::string> kClasses = {"ped", "obs"};

}  // namespace

TEST_CASE("iou of simple boxes") {
  CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == doctest::Approx(1.0));
  CHECK(iou({0, 0, 10, 10}, {1, 1, 10, 10}) == doctest::Approx(0.81));
  CHECK(iou({0, 0, 10, 10}, {5, 0, 15, 10}) == doctest::Approx(50.0 / 150.0));
  CHECK(iou({0, 0, 10, 10}, {20, 20, 30, 30}) == 0.0);
  CHECK_THROWS_AS(iou({0, 0, 0, 10}, {0, 0, 1, 1}), Error);
}

TEST_CASE("greedy matching takes predictions by confidence") {
  std::vector<DetectionRecord> g = {gt("f", {0, 0, 10, 10}, 5, "ped"), gt("f", {6, 0, 16, 10}, 5, "obs")};
  // Low-confidence prediction overlaps gt 0 best but arrives second.
  std::vector<PredictionRecord> p = {pr("f", {0, 0, 10, 10}, "ped", 0.2), pr("f", {2, 0, 12, 10}, "obs", 0.9)};
  auto m = match_frame(g, p, 0.3);
  // pred 1 (0.9): IoU 80/120 with gt0, 60/140 with gt1 -> gt0. pred 0 vs gt1 is 40/160, below 0.3.
  REQUIRE(m.matched_prediction[0].has_value());
  CHECK(*m.matched_prediction[0] == 1);
  CHECK(!m.matched_prediction[1].has_value());
  CHECK(m.unmatched_predictions == std::vector<std::size_t>{0});
}

TEST_CASE("matching threshold is inclusive and ties go to the lower ground truth") {
  std::vector<DetectionRecord> g = {gt("f", {0, 0, 10, 10}, 5, "ped"), gt("f", {0, 0, 10, 10}, 5, "obs")};
  std::vector<PredictionRecord> p = {pr("f", {0, 0, 10, 10}, "obs", 0.5)};
  auto m = match_frame(g, p, 1.0);
  REQUIRE(m.matched_prediction[0].has_value());
  CHECK(!m.matched_prediction[1].has_value());
}

TEST_CASE("synthetic corpus: class-labeled tally by hand") {
  auto g = read_ground_truth_file(oracle::fixture("synthetic_gt.csv"));
  auto p = read_predictions_file(oracle::fixture("synthetic_pred.csv"));
  DistanceBands bands(oracle::kBands);
  auto dp = build_class_cm(g, p, kClasses, bands);
  // f1: ped@8m found, obs@15m missed. f2: ped@25m reported as obs. f3: false positive only.
  CHECK(dp.per_band[0].at(0, 0) == 1);
  CHECK(dp.per_band[0].at(2, 2) == 2);
  CHECK(dp.per_band[1].at(2, 1) == 1);
  CHECK(dp.per_band[1].at(2, 2) == 2);
  CHECK(dp.per_band[2].at(1, 0) == 1);
  CHECK(dp.per_band[2].at(2, 2) == 2);
  for (std::size_t k = 3; k < 10; ++k) CHECK(dp.per_band[k].at(2, 2) == 3);
  std::int64_t total = 0;
  for (const auto& m : dp.per_band) total += m.total();
  // three frames (f3 comes from the prediction file), one entry per frame and band
  CHECK(total == 3 * 10);
}

TEST_CASE("prop-labeled tally merges classes within a band") {
  std::vector<DetectionRecord> g = {gt("a", {0, 0, 10, 10}, 5, "ped"), gt("a", {20, 0, 30, 10}, 7, "obs"),
                                    gt("a", {40, 0, 50, 10}, 9, "ped"), gt("b", {0, 0, 10, 10}, 35, "ped")};
  std::vector<PredictionRecord> p = {pr("a", {0, 0, 10, 10}, "ped", 0.9), pr("b", {0, 0, 10, 10}, "ped", 0.9)};
  DistanceBands bands(oracle::kBands);
  auto dp = build_prop_cm(g, p, kClasses, bands);
  const auto& L = dp.labels();
  // frame a band 0: truth {ped,obs}, seen {ped}.
  CHECK(dp.per_band[0].at(L.index_of("ped"), L.index_of("ped+obs")) == 1);
  CHECK(dp.per_band[3].at(L.index_of("ped"), L.index_of("ped")) == 1);
  CHECK(dp.per_band[0].at(L.index_of("emp"), L.index_of("emp")) == 1);
  CHECK(dp.per_band[3].at(L.index_of("emp"), L.index_of("emp")) == 1);
}

TEST_CASE("empty prediction file puts every object in the emp row") {
  auto g = read_ground_truth_file(oracle::fixture("synthetic_gt.csv"));
  std::vector<PredictionRecord> none;
  DistanceBands bands(oracle::kBands);
  for (auto dp : {build_class_cm(g, none, kClasses, bands), build_prop_cm(g, none, kClasses, bands)}) {
    const auto emp = dp.labels().empty_index();
    for (const auto& m : dp.per_band)
      for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m.size(); ++c)
          if (r != emp) CHECK(m.at(r, c) == 0);
  }
}

TEST_CASE("property: per-band column totals on random corpora") {
  std::mt19937_64 rng(3);
  DistanceBands bands({10, 20, 30});
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DetectionRecord> g;
    std::vector<PredictionRecord> p;
    const int n_frames = 1 + static_cast<int>(rng() % 6);
    for (int f = 0; f < n_frames; ++f) {
      auto tok = "f" + std::to_string(f);
      const int n_obj = static_cast<int>(rng() % 4);
      for (int o = 0; o < n_obj; ++o) {
        double x = static_cast<double>(rng() % 50);
        g.push_back(gt(tok, {x, 0, x + 10, 10}, 1.0 + static_cast<double>(rng() % 35), kClasses[rng() % 2]));
        if (rng() % 2) p.push_back(pr(tok, {x + static_cast<double>(rng() % 4), 0, x + 10, 10}, kClasses[rng() % 2],
                                      static_cast<double>(rng() % 100) / 100.0));
      }
    }
    // a frame exists only if some record mentions it
    std::set<std::string> frames;
    for (const auto& d : g) frames.insert(d.frame);
    for (const auto& q : p) frames.insert(q.frame);
    auto cls = build_class_cm(g, p, kClasses, bands);
    auto prop = build_prop_cm(g, p, kClasses, bands);
    for (std::size_t k = 0; k < bands.count(); ++k) {
      std::size_t objects = 0;
      std::set<std::string> occupied;
      for (const auto& d : g)
        if (bands.band_for(d.distance_m) == k) {
          ++objects;
          occupied.insert(d.frame);
        }
      const auto& m = cls.per_band[k];
      CHECK(m.column_sum(0) + m.column_sum(1) == static_cast<std::int64_t>(objects));
      CHECK(m.column_sum(2) == static_cast<std::int64_t>(frames.size() - occupied.size()));
      CHECK(prop.per_band[k].total() == static_cast<std::int64_t>(frames.size()));
      // Nothing predicts an object that was not matched to one.
      CHECK(m.at(0, 2) + m.at(1, 2) == 0);
    }
  }
}

TEST_CASE("CSV readers report source and line") {
  std::istringstream ok("frame,x_min,y_min,x_max,y_max,distance_m,class\nf,0,0,1,1,3,ped\n");
  CHECK(read_ground_truth_csv(ok).size() == 1);

  std::istringstream bad("frame,x_min,y_min,x_max,y_max,distance_m,class\nf,0,0,1,1,3,ped\nf,0,0,1,x,3,ped\n");
  try {
    read_ground_truth_csv(bad, "gt.csv");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find("gt.csv:3") != std::string::npos);
  }
  std::istringstream noheader("f,0,0,1,1,3,ped\n");
  CHECK_THROWS_AS(read_ground_truth_csv(noheader), Error);
  std::istringstream conf("frame,x_min,y_min,x_max,y_max,class,confidence\nf,0,0,1,1,ped,1.5\n");
  CHECK_THROWS_AS(read_predictions_csv(conf), Error);
  std::istringstream emp("frame,x_min,y_min,x_max,y_max,distance_m,class\nf,0,0,1,1,3,emp\n");
  CHECK_THROWS_AS(read_ground_truth_csv(emp), Error);
  try {
    read_ground_truth_file("/nonexistent/gt.csv");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}

TEST_CASE("unknown classes are rejected when building") {
  std::vector<DetectionRecord> g = {gt("f", {0, 0, 1, 1}, 3, "car")};
  std::vector<PredictionRecord> none;
  CHECK_THROWS_AS(build_class_cm(g, none, kClasses, DistanceBands({10})), Error);
}
