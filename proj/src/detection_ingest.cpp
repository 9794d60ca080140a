#include "detection_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "error.hpp"
#include "text_util.hpp"

namespace pcmc {

double iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) fail(ErrorKind::invalid_argument, "iou of an invalid box");
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0 || h <= 0) return 0.0;
  const double inter = w * h;
  return inter / (a.area() + b.area() - inter);
}

MatchResult match_frame(std::span<const DetectionRecord> gts,
                        std::span<const PredictionRecord> preds, double iou_threshold) {
  MatchResult r;
  r.matched_prediction.assign(gts.size(), std::nullopt);

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });

  for (auto p : order) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (r.matched_prediction[g]) continue;
      const double v = iou(gts[g].box, preds[p].box);
      if (v >= iou_threshold && v > best_iou) {
        best = g;
        best_iou = v;
      }
    }
    if (best)
      r.matched_prediction[*best] = p;
    else
      r.unmatched_predictions.push_back(p);
  }
  return r;
}

namespace {

struct Frame {
  std::vector<DetectionRecord> gts;
  std::vector<PredictionRecord> preds;
};

// Frames are the union of tokens seen in either input; a frame listed only
// among predictions is an annotated scene with no objects.
std::map<std::string, Frame> group_frames(std::span<const DetectionRecord> dataset,
                                          std::span<const PredictionRecord> preds) {
  std::map<std::string, Frame> frames;
  for (const auto& d : dataset) frames[d.frame].gts.push_back(d);
  for (const auto& p : preds) frames[p.frame].preds.push_back(p);
  return frames;
}

void check_inputs(std::span<const DetectionRecord> dataset, std::span<const PredictionRecord> preds,
                  const LabelSet& classes) {
  for (const auto& d : dataset) {
    if (!classes.class_index(d.true_class))
      fail(ErrorKind::parse, "ground truth in frame '" + d.frame + "' has unknown class '" +
                                 d.true_class + "'");
    if (!d.box.valid()) fail(ErrorKind::parse, "invalid ground-truth box in frame '" + d.frame + "'");
    if (!(d.distance_m > 0) || !std::isfinite(d.distance_m))
      fail(ErrorKind::parse, "non-positive distance in frame '" + d.frame + "'");
  }
  for (const auto& p : preds) {
    if (!classes.class_index(p.pred_class))
      fail(ErrorKind::parse, "prediction in frame '" + p.frame + "' has unknown class '" +
                                 p.pred_class + "'");
    if (!p.box.valid()) fail(ErrorKind::parse, "invalid prediction box in frame '" + p.frame + "'");
  }
}

DistanceParamCM empty_dp(const LabelSet& labels, const DistanceBands& bands) {
  DistanceParamCM dp;
  dp.bands = bands;
  dp.per_band.assign(bands.count(), ConfusionMatrix(labels));
  return dp;
}

}  // namespace

DistanceParamCM build_class_cm(std::span<const DetectionRecord> dataset,
                               std::span<const PredictionRecord> preds,
                               const std::vector<std::string>& classes, const DistanceBands& bands,
                               double iou_threshold) {
  const auto labels = LabelSet::for_classes(classes);
  check_inputs(dataset, preds, labels);
  auto dp = empty_dp(labels, bands);
  const auto emp = labels.empty_index();

  for (const auto& [token, frame] : group_frames(dataset, preds)) {
    const auto match = match_frame(frame.gts, frame.preds, iou_threshold);
    std::vector<bool> band_has_object(bands.count(), false);
    for (std::size_t g = 0; g < frame.gts.size(); ++g) {
      const auto k = bands.band_for(frame.gts[g].distance_m);
      band_has_object[k] = true;
      const auto truth = labels.index_of(frame.gts[g].true_class);
      const auto predicted = match.matched_prediction[g]
                                 ? labels.index_of(frame.preds[*match.matched_prediction[g]].pred_class)
                                 : emp;
      dp.per_band[k].add(predicted, truth);
    }
    for (std::size_t k = 0; k < bands.count(); ++k)
      if (!band_has_object[k]) dp.per_band[k].add(emp, emp);
  }
  return dp;
}

DistanceParamCM build_prop_cm(std::span<const DetectionRecord> dataset,
                              std::span<const PredictionRecord> preds,
                              const std::vector<std::string>& classes, const DistanceBands& bands,
                              double iou_threshold) {
  const auto labels = LabelSet::for_propositions(classes);
  check_inputs(dataset, preds, labels);
  auto dp = empty_dp(labels, bands);

  for (const auto& [token, frame] : group_frames(dataset, preds)) {
    const auto match = match_frame(frame.gts, frame.preds, iou_threshold);
    std::vector<std::uint32_t> truth(bands.count(), 0), seen(bands.count(), 0);
    for (std::size_t g = 0; g < frame.gts.size(); ++g) {
      const auto k = bands.band_for(frame.gts[g].distance_m);
      truth[k] |= labels.class_bit(frame.gts[g].true_class);
      if (match.matched_prediction[g])
        seen[k] |= labels.class_bit(frame.preds[*match.matched_prediction[g]].pred_class);
    }
    for (std::size_t k = 0; k < bands.count(); ++k)
      dp.per_band[k].add(labels.index_of_objects(seen[k]), labels.index_of_objects(truth[k]));
  }
  return dp;
}

namespace {

template <typename Record, typename RowParser>
std::vector<Record> read_csv(std::istream& in, const std::string& source,
                             std::string_view expected_header, RowParser parse_row) {
  std::vector<Record> out;
  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++number;
    auto t = text::trim(line);
    if (number == 1 && t.starts_with("\xEF\xBB\xBF")) t.remove_prefix(3);
    if (t.empty()) continue;
    if (!header_seen) {
      std::string norm;
      for (char c : t)
        if (c != ' ') norm += c;
      if (norm != expected_header)
        fail(ErrorKind::parse, source + ":" + std::to_string(number) + ": expected header '" +
                                   std::string(expected_header) + "'");
      header_seen = true;
      continue;
    }
    auto cells = text::split(t, ',');
    if (cells.size() != 7)
      fail(ErrorKind::parse, source + ":" + std::to_string(number) + ": expected 7 fields, got " +
                                 std::to_string(cells.size()));
    for (auto& c : cells) c = text::trim(c);
    try {
      out.push_back(parse_row(cells));
    } catch (const Error& e) {
      fail(ErrorKind::parse, source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  if (!header_seen) fail(ErrorKind::parse, source + ": missing header line");
  return out;
}

double number_field(std::string_view cell, std::string_view what) {
  auto v = text::to_double(cell);
  if (!v || !std::isfinite(*v))
    fail(ErrorKind::parse, "bad " + std::string(what) + " '" + std::string(cell) + "'");
  return *v;
}

Box box_fields(const std::vector<std::string_view>& c) {
  Box b{number_field(c[1], "x_min"), number_field(c[2], "y_min"), number_field(c[3], "x_max"),
        number_field(c[4], "y_max")};
  if (!b.valid()) fail(ErrorKind::parse, "box must satisfy x_min < x_max and y_min < y_max");
  return b;
}

void check_class_field(std::string_view c) {
  if (c.empty()) fail(ErrorKind::parse, "empty class");
  if (c == kEmptyLabel) fail(ErrorKind::parse, "'emp' is not a valid object class");
}

}  // namespace

std::vector<DetectionRecord> read_ground_truth_csv(std::istream& in, const std::string& source) {
  return read_csv<DetectionRecord>(
      in, source, "frame,x_min,y_min,x_max,y_max,distance_m,class", [](const auto& c) {
        DetectionRecord r;
        r.frame = std::string(c[0]);
        r.box = box_fields(c);
        r.distance_m = number_field(c[5], "distance_m");
        if (r.distance_m <= 0) fail(ErrorKind::parse, "distance_m must be positive");
        check_class_field(c[6]);
        r.true_class = std::string(c[6]);
        return r;
      });
}

std::vector<PredictionRecord> read_predictions_csv(std::istream& in, const std::string& source) {
  return read_csv<PredictionRecord>(
      in, source, "frame,x_min,y_min,x_max,y_max,class,confidence", [](const auto& c) {
        PredictionRecord r;
        r.frame = std::string(c[0]);
        r.box = box_fields(c);
        check_class_field(c[5]);
        r.pred_class = std::string(c[5]);
        r.confidence = number_field(c[6], "confidence");
        if (r.confidence < 0 || r.confidence > 1)
          fail(ErrorKind::parse, "confidence must lie in [0,1]");
        return r;
      });
}

std::vector<DetectionRecord> read_ground_truth_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  return read_ground_truth_csv(in, path);
}

std::vector<PredictionRecord> read_predictions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  return read_predictions_csv(in, path);
}

}  // namespace pcmc
