#include "cm_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "error.hpp"

namespace pcmc {

std::string_view to_string(CmMode mode) {
  return mode == CmMode::class_labeled ? "class" : "prop";
}

CmMode parse_mode(std::string_view text) {
  if (text == "class") return CmMode::class_labeled;
  if (text == "prop") return CmMode::prop_labeled;
  fail(ErrorKind::invalid_argument,
       "unknown confusion-matrix mode '" + std::string(text) + "' (expected class or prop)");
}

namespace {

void check_object_classes(const std::vector<std::string>& classes) {
  if (classes.empty()) fail(ErrorKind::invalid_argument, "label set needs at least one object class");
  if (classes.size() > LabelSet::kMaxObjectClasses)
    fail(ErrorKind::invalid_argument, "too many object classes (max 16)");
  std::unordered_set<std::string> seen;
  for (const auto& c : classes) {
    if (c.empty()) fail(ErrorKind::invalid_argument, "empty class name");
    if (c == kEmptyLabel)
      fail(ErrorKind::invalid_argument, "'emp' is reserved and cannot be an object class");
    if (c.find_first_of(", \t") != std::string::npos || c.find(kPropJoiner) != std::string::npos)
      fail(ErrorKind::invalid_argument, "class name '" + c + "' contains a reserved character");
    if (!seen.insert(c).second) fail(ErrorKind::invalid_argument, "duplicate class name '" + c + "'");
  }
}

std::vector<std::size_t> members(std::uint32_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1u) out.push_back(i);
  return out;
}

}  // namespace

LabelSet LabelSet::for_classes(std::vector<std::string> object_classes) {
  check_object_classes(object_classes);
  LabelSet ls;
  ls.mode_ = CmMode::class_labeled;
  ls.classes_ = std::move(object_classes);
  for (std::size_t i = 0; i < ls.classes_.size(); ++i) {
    ls.names_.push_back(ls.classes_[i]);
    ls.masks_.push_back(1u << i);
  }
  ls.names_.emplace_back(kEmptyLabel);
  ls.masks_.push_back(0);
  return ls;
}

LabelSet LabelSet::for_propositions(std::vector<std::string> object_classes) {
  check_object_classes(object_classes);
  LabelSet ls;
  ls.mode_ = CmMode::prop_labeled;
  ls.classes_ = std::move(object_classes);

  const std::uint32_t full = (1u << ls.classes_.size()) - 1u;
  std::vector<std::uint32_t> subsets(full);
  std::iota(subsets.begin(), subsets.end(), 1u);
  std::sort(subsets.begin(), subsets.end(), [](std::uint32_t a, std::uint32_t b) {
    const int ca = std::popcount(a), cb = std::popcount(b);
    if (ca != cb) return ca < cb;
    return members(a) < members(b);
  });
  for (auto m : subsets) {
    ls.masks_.push_back(m);
    ls.names_.push_back(ls.objects_name(m));
  }
  ls.masks_.push_back(0);
  ls.names_.emplace_back(kEmptyLabel);
  return ls;
}

LabelSet LabelSet::from_names(CmMode mode, const std::vector<std::string>& names) {
  if (names.size() < 2 || names.back() != kEmptyLabel)
    fail(ErrorKind::parse, "label list must contain at least one class and end with 'emp'");
  if (mode == CmMode::class_labeled)
    return for_classes(std::vector<std::string>(names.begin(), names.end() - 1));

  std::vector<std::string> classes;
  for (const auto& n : names) {
    if (n == kEmptyLabel || n.find(kPropJoiner) != std::string::npos) break;
    classes.push_back(n);
  }
  LabelSet ls = for_propositions(std::move(classes));
  if (ls.names_ != names)
    fail(ErrorKind::parse,
         "proposition labels are not the canonical subset list of their singleton labels");
  return ls;
}

std::optional<std::size_t> LabelSet::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t LabelSet::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  fail(ErrorKind::parse, "unknown label '" + std::string(name) + "'");
}

std::optional<std::size_t> LabelSet::class_index(std::string_view object_class) const {
  auto it = std::find(classes_.begin(), classes_.end(), object_class);
  if (it == classes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes_.begin());
}

std::uint32_t LabelSet::class_bit(std::string_view object_class) const {
  auto i = class_index(object_class);
  return i ? (1u << *i) : 0u;
}

std::size_t LabelSet::index_of_objects(std::uint32_t mask) const {
  if (mode_ != CmMode::prop_labeled)
    fail(ErrorKind::invalid_argument, "index_of_objects requires a proposition label set");
  auto it = std::find(masks_.begin(), masks_.end(), mask);
  if (it == masks_.end()) fail(ErrorKind::invalid_argument, "object set outside label universe");
  return static_cast<std::size_t>(it - masks_.begin());
}

std::string LabelSet::objects_name(std::uint32_t mask) const {
  if (mask == 0) return std::string(kEmptyLabel);
  std::string out;
  for (auto i : members(mask)) {
    if (i >= classes_.size()) fail(ErrorKind::invalid_argument, "object mask outside class set");
    if (!out.empty()) out += kPropJoiner;
    out += classes_[i];
  }
  return out;
}

DistanceBands::DistanceBands(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.empty()) fail(ErrorKind::invalid_argument, "distance bands need at least one edge");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!std::isfinite(edges_[i]) || edges_[i] <= 0.0)
      fail(ErrorKind::invalid_argument, "band edges must be finite and positive");
    if (i > 0 && edges_[i] <= edges_[i - 1])
      fail(ErrorKind::invalid_argument, "band edges must be strictly increasing");
  }
}

std::size_t DistanceBands::band_for(double distance_m) const {
  if (!std::isfinite(distance_m) || distance_m <= 0.0)
    fail(ErrorKind::invalid_argument, "invalid distance " + std::to_string(distance_m));
  // First edge >= d: right-closed bands.
  auto it = std::lower_bound(edges_.begin(), edges_.end(), distance_m);
  if (it == edges_.end()) return edges_.size() - 1;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::size_t band_for_distance(const DistanceBands& bands, double distance_m) {
  return bands.band_for(distance_m);
}

ConfusionMatrix::ConfusionMatrix(LabelSet labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

ConfusionMatrix::ConfusionMatrix(LabelSet labels, std::vector<std::int64_t> counts)
    : labels_(std::move(labels)), counts_(std::move(counts)) {
  if (counts_.size() != labels_.size() * labels_.size())
    fail(ErrorKind::invalid_argument, "confusion matrix must be square over its labels");
  for (auto c : counts_)
    if (c < 0) fail(ErrorKind::invalid_argument, "confusion matrix counts must be nonnegative");
}

std::int64_t ConfusionMatrix::at(std::size_t predicted, std::size_t truth) const {
  if (predicted >= size() || truth >= size())
    fail(ErrorKind::invalid_argument, "confusion matrix index out of range");
  return counts_[predicted * size() + truth];
}

void ConfusionMatrix::add(std::size_t predicted, std::size_t truth, std::int64_t n) {
  if (predicted >= size() || truth >= size())
    fail(ErrorKind::invalid_argument, "confusion matrix index out of range");
  auto& cell = counts_[predicted * size() + truth];
  if (cell + n < 0) fail(ErrorKind::invalid_argument, "confusion matrix count would go negative");
  cell += n;
}

std::int64_t ConfusionMatrix::column_sum(std::size_t truth) const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += at(i, truth);
  return s;
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

void DistanceParamCM::validate() const {
  if (per_band.empty()) fail(ErrorKind::invalid_argument, "confusion matrix has no bands");
  if (bands && bands->count() != per_band.size())
    fail(ErrorKind::invalid_argument, "number of band matrices does not match band edges");
  if (!bands && per_band.size() != 1)
    fail(ErrorKind::invalid_argument, "aggregated confusion matrix must hold exactly one matrix");
  for (const auto& cm : per_band)
    if (!(cm.labels() == per_band.front().labels()))
      fail(ErrorKind::invalid_argument, "band matrices use different label sets");
}

ColumnDistribution normalize_column(const ConfusionMatrix& cm, std::size_t true_label,
                                    ZeroColumnPolicy policy) {
  if (true_label >= cm.size()) fail(ErrorKind::invalid_argument, "true label out of range");
  ColumnDistribution out;
  out.true_label = true_label;
  out.probs.assign(cm.size(), 0.0);

  const auto total = cm.column_sum(true_label);
  if (total == 0) {
    if (policy == ZeroColumnPolicy::strict)
      fail(ErrorKind::numeric, "column '" + cm.labels().name(true_label) +
                                   "' has no samples; enable zero_column_fallback to treat it as "
                                   "a guaranteed miss");
    out.probs[cm.labels().empty_index()] = 1.0;
    return out;
  }
  for (std::size_t i = 0; i < cm.size(); ++i)
    out.probs[i] = static_cast<double>(cm.at(i, true_label)) / static_cast<double>(total);
  return out;
}

ConfusionMatrix aggregate(const DistanceParamCM& dp) {
  dp.validate();
  ConfusionMatrix out(dp.labels());
  for (const auto& cm : dp.per_band)
    for (std::size_t i = 0; i < cm.size(); ++i)
      for (std::size_t j = 0; j < cm.size(); ++j) out.add(i, j, cm.at(i, j));
  return out;
}

DistanceParamCM without_distance(ConfusionMatrix cm) {
  DistanceParamCM dp;
  dp.per_band.push_back(std::move(cm));
  return dp;
}

}  // namespace pcmc
