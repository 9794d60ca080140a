#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcmc {

/// Reserved label for "no object" (missed detections and empty scenes).
inline constexpr std::string_view kEmptyLabel = "emp";

/// Separator joining class names inside a proposition-set label, e.g. "ped+obs".
inline constexpr char kPropJoiner = '+';

enum class CmMode { class_labeled, prop_labeled };

std::string_view to_string(CmMode mode);
CmMode parse_mode(std::string_view text);

/// Ordered label universe of a confusion matrix.
///
/// Class-labeled sets are the object classes in configured order followed by
/// "emp". Proposition-labeled sets hold every subset of the object classes,
/// non-empty subsets ordered by (cardinality, member order) and the empty
/// subset, written "emp", last. Each label carries the bitmask of object
/// classes it asserts present, so both modes reduce to "which classes were
/// seen" in the same way.
class LabelSet {
 public:
  static constexpr std::size_t kMaxObjectClasses = 16;

  static LabelSet for_classes(std::vector<std::string> object_classes);
  static LabelSet for_propositions(std::vector<std::string> object_classes);

  /// Rebuilds a label set from serialized names, rejecting non-canonical order.
  static LabelSet from_names(CmMode mode, const std::vector<std::string>& names);

  CmMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::string>& object_classes() const noexcept { return classes_; }

  std::size_t empty_index() const noexcept { return names_.size() - 1; }
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  std::optional<std::size_t> class_index(std::string_view object_class) const;
  std::uint32_t class_bit(std::string_view object_class) const;

  /// Bitmask over object_classes() of what label i asserts present.
  std::uint32_t objects(std::size_t i) const { return masks_.at(i); }

  /// Proposition mode only: the label whose object set equals mask.
  std::size_t index_of_objects(std::uint32_t mask) const;

  /// Canonical name of a subset of object classes ("emp" for the empty set).
  std::string objects_name(std::uint32_t mask) const;

  bool operator==(const LabelSet&) const = default;

 private:
  LabelSet() = default;

  CmMode mode_ = CmMode::class_labeled;
  std::vector<std::string> classes_;
  std::vector<std::string> names_;
  std::vector<std::uint32_t> masks_;
};

/// Edges x_1 < ... < x_n in meters. Band 0 is (0, x_1], band i is
/// (x_i, x_{i+1}]; distances past x_n clamp to the last band.
class DistanceBands {
 public:
  explicit DistanceBands(std::vector<double> edges);

  std::size_t count() const noexcept { return edges_.size(); }
  const std::vector<double>& edges() const noexcept { return edges_; }
  std::size_t band_for(double distance_m) const;

  bool operator==(const DistanceBands&) const = default;

 private:
  std::vector<double> edges_;
};

std::size_t band_for_distance(const DistanceBands& bands, double distance_m);

/// Square count matrix; row = predicted label, column = true label.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(LabelSet labels);
  ConfusionMatrix(LabelSet labels, std::vector<std::int64_t> counts);

  const LabelSet& labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  std::int64_t at(std::size_t predicted, std::size_t truth) const;
  void add(std::size_t predicted, std::size_t truth, std::int64_t n = 1);

  std::int64_t column_sum(std::size_t truth) const;
  std::int64_t total() const;
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  LabelSet labels_;
  std::vector<std::int64_t> counts_;
};

/// One matrix per distance band, all over the same label set. Aggregated
/// (non-distance) matrices have no bands and a single matrix.
struct DistanceParamCM {
  std::optional<DistanceBands> bands;
  std::vector<ConfusionMatrix> per_band;

  const LabelSet& labels() const { return per_band.at(0).labels(); }
  std::size_t band_count() const noexcept { return per_band.size(); }
  bool distance_parametrized() const noexcept { return bands.has_value(); }
  void validate() const;

  bool operator==(const DistanceParamCM&) const = default;
};

enum class ZeroColumnPolicy { strict, fallback_empty };

struct ColumnDistribution {
  std::size_t true_label = 0;
  std::vector<double> probs;
};

/// Column-normalized detection probabilities for one true label.
ColumnDistribution normalize_column(const ConfusionMatrix& cm, std::size_t true_label,
                                    ZeroColumnPolicy policy = ZeroColumnPolicy::strict);

/// Elementwise sum over bands.
ConfusionMatrix aggregate(const DistanceParamCM& dp);

/// Wraps a single matrix as a band-less DistanceParamCM.
DistanceParamCM without_distance(ConfusionMatrix cm);

// Fixture text format (see fixture_io.cpp).
std::string render_fixture(const DistanceParamCM& dp);
DistanceParamCM parse_fixture(std::string_view text, CmMode mode);
DistanceParamCM load_fixture(const std::string& path, CmMode mode);
void save_fixture(const std::string& path, const DistanceParamCM& dp);

/// Human-readable per-band tables, predicted rows against true columns.
std::string render_tables(const DistanceParamCM& dp);

}  // namespace pcmc
