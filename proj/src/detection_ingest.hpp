#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cm_core.hpp"

namespace pcmc {

/// Axis-aligned image box in pixels.
struct Box {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  bool valid() const noexcept { return x_min < x_max && y_min < y_max; }
  double area() const noexcept { return (x_max - x_min) * (y_max - y_min); }
};

struct DetectionRecord {
  std::string frame;
  Box box;
  double distance_m = 0;
  std::string true_class;
};

struct PredictionRecord {
  std::string frame;
  Box box;
  std::string pred_class;
  double confidence = 0;
};

/// matched_prediction[g] is the index of the prediction assigned to ground
/// truth g, or nullopt for a miss.
struct MatchResult {
  std::vector<std::optional<std::size_t>> matched_prediction;
  std::vector<std::size_t> unmatched_predictions;
};

double iou(const Box& a, const Box& b);

/// Greedy matching: predictions in descending confidence each take the free
/// ground truth with the highest IoU >= threshold (lower index on ties).
MatchResult match_frame(std::span<const DetectionRecord> gts,
                        std::span<const PredictionRecord> preds, double iou_threshold = 0.5);

DistanceParamCM build_class_cm(std::span<const DetectionRecord> dataset,
                               std::span<const PredictionRecord> preds,
                               const std::vector<std::string>& classes, const DistanceBands& bands,
                               double iou_threshold = 0.5);

DistanceParamCM build_prop_cm(std::span<const DetectionRecord> dataset,
                              std::span<const PredictionRecord> preds,
                              const std::vector<std::string>& classes, const DistanceBands& bands,
                              double iou_threshold = 0.5);

// CSV readers. Header lines are required:
//   ground truth: frame,x_min,y_min,x_max,y_max,distance_m,class
//   predictions:  frame,x_min,y_min,x_max,y_max,class,confidence
std::vector<DetectionRecord> read_ground_truth_csv(std::istream& in, const std::string& source = "<gt>");
std::vector<PredictionRecord> read_predictions_csv(std::istream& in, const std::string& source = "<pred>");
std::vector<DetectionRecord> read_ground_truth_file(const std::string& path);
std::vector<PredictionRecord> read_predictions_file(const std::string& path);

}  // namespace pcmc
