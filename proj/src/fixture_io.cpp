// Fixture format:
//
//   # optional comment lines
//   labels: ped,obs,emp
//   bands: 10,20,30            (omitted for aggregated matrices)
//   band 0
//   <|labels| rows of |labels| integers, row = predicted>
//   band 1
//   ...

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cm_core.hpp"
#include "error.hpp"
#include "text_util.hpp"

namespace pcmc {

namespace text {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace text

std::string render_fixture(const DistanceParamCM& dp) {
  dp.validate();
  std::ostringstream os;
  os << "labels: ";
  const auto& names = dp.labels().names();
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
  os << '\n';
  if (dp.bands) {
    os << "bands: ";
    const auto& e = dp.bands->edges();
    for (std::size_t i = 0; i < e.size(); ++i) os << (i ? "," : "") << text::format_double(e[i]);
    os << '\n';
  }
  for (std::size_t k = 0; k < dp.per_band.size(); ++k) {
    const auto& cm = dp.per_band[k];
    os << "band " << k << '\n';
    for (std::size_t i = 0; i < cm.size(); ++i) {
      for (std::size_t j = 0; j < cm.size(); ++j) os << (j ? " " : "") << cm.at(i, j);
      os << '\n';
    }
  }
  return os.str();
}

DistanceParamCM parse_fixture(std::string_view content, CmMode mode) {
  struct Line {
    std::size_t number;
    std::string_view text;
  };
  std::vector<Line> lines;
  {
    std::size_t n = 0;
    for (auto raw : text::split(content, '\n')) {
      ++n;
      auto t = text::trim(raw);
      if (t.empty() || t.front() == '#') continue;
      lines.push_back({n, t});
    }
  }
  auto error_at = [](std::size_t line, const std::string& msg) -> Error {
    return Error(ErrorKind::parse, "fixture line " + std::to_string(line) + ": " + msg);
  };
  auto value_after = [&](const Line& l, std::string_view key) -> std::string_view {
    if (l.text.substr(0, key.size()) != key) throw error_at(l.number, "expected '" + std::string(key) + "'");
    return text::trim(l.text.substr(key.size()));
  };

  std::size_t pos = 0;
  if (lines.empty()) fail(ErrorKind::parse, "empty confusion-matrix fixture");

  std::vector<std::string> names;
  for (auto n : text::split(value_after(lines[pos], "labels:"), ','))
    names.emplace_back(text::trim(n));
  const auto label_line = lines[pos].number;
  ++pos;
  std::optional<LabelSet> labels;
  try {
    labels = LabelSet::from_names(mode, names);
  } catch (const Error& e) {
    throw error_at(label_line, e.what());
  }

  DistanceParamCM dp;
  if (pos < lines.size() && lines[pos].text.starts_with("bands:")) {
    std::vector<double> edges;
    for (auto e : text::split(value_after(lines[pos], "bands:"), ',')) {
      auto v = text::to_double(e);
      if (!v) throw error_at(lines[pos].number, "bad band edge '" + std::string(text::trim(e)) + "'");
      edges.push_back(*v);
    }
    try {
      dp.bands.emplace(std::move(edges));
    } catch (const Error& e) {
      throw error_at(lines[pos].number, e.what());
    }
    ++pos;
  }

  const std::size_t n = labels->size();
  while (pos < lines.size()) {
    auto idx = text::to_int<std::size_t>(value_after(lines[pos], "band "));
    if (!idx || *idx != dp.per_band.size())
      throw error_at(lines[pos].number, "expected 'band " + std::to_string(dp.per_band.size()) + "'");
    ++pos;
    std::vector<std::int64_t> counts;
    counts.reserve(n * n);
    for (std::size_t r = 0; r < n; ++r, ++pos) {
      if (pos >= lines.size()) fail(ErrorKind::parse, "fixture ends inside a band block");
      auto cells = text::split_ws(lines[pos].text);
      if (cells.size() != n)
        throw error_at(lines[pos].number, "expected " + std::to_string(n) + " counts, got " +
                                              std::to_string(cells.size()));
      for (auto c : cells) {
        auto v = text::to_int<std::int64_t>(c);
        if (!v || *v < 0) throw error_at(lines[pos].number, "bad count '" + std::string(c) + "'");
        counts.push_back(*v);
      }
    }
    dp.per_band.emplace_back(*labels, std::move(counts));
  }
  if (dp.per_band.empty()) fail(ErrorKind::parse, "fixture has no band blocks");
  if (dp.bands && dp.bands->count() != dp.per_band.size())
    fail(ErrorKind::parse, "fixture declares " + std::to_string(dp.bands->count()) +
                               " bands but holds " + std::to_string(dp.per_band.size()));
  if (!dp.bands && dp.per_band.size() != 1)
    fail(ErrorKind::parse, "fixture without 'bands:' must hold exactly one block");
  return dp;
}

DistanceParamCM load_fixture(const std::string& path, CmMode mode) {
  try {
    return parse_fixture(text::read_file(path), mode);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void save_fixture(const std::string& path, const DistanceParamCM& dp) {
  text::write_file(path, render_fixture(dp));
}

std::string render_tables(const DistanceParamCM& dp) {
  dp.validate();
  const auto& names = dp.labels().names();
  std::size_t width = 6;
  for (const auto& n : names) width = std::max(width, n.size() + 2);
  for (const auto& cm : dp.per_band)
    for (auto c : cm.counts()) width = std::max(width, std::to_string(c).size() + 2);

  auto pad = [](const std::string& s, std::size_t w, bool right) {
    if (s.size() >= w) return s;
    return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
  };

  std::ostringstream os;
  for (std::size_t k = 0; k < dp.per_band.size(); ++k) {
    if (dp.bands) {
      const auto& e = dp.bands->edges();
      os << "Confusion matrix for distance ";
      if (k > 0) os << text::format_double(e[k - 1]) << " < ";
      os << "d <= " << text::format_double(e[k]);
      if (k + 1 == e.size()) os << " (and beyond)";
      os << '\n';
    } else {
      os << "Confusion matrix over all distances\n";
    }
    os << pad("pred\\true", width, false);
    for (const auto& n : names) os << pad(n, width, true);
    os << '\n';
    const auto& cm = dp.per_band[k];
    for (std::size_t i = 0; i < cm.size(); ++i) {
      os << pad(names[i], width, false);
      for (std::size_t j = 0; j < cm.size(); ++j) os << pad(std::to_string(cm.at(i, j)), width, true);
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace pcmc
