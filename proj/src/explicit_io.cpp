#include "explicit_io.hpp"

#include <filesystem>
#include <sstream>

#include "error.hpp"
#include "text_util.hpp"

namespace pcmc {

std::string render_transitions(const MarkovChain& chain) {
  std::ostringstream os;
  os << "dtmc\n";
  for (std::size_t i = 0; i < chain.size(); ++i)
    for (const auto& t : chain.trans[i]) os << i << ' ' << t.target << ' ' << text::format_prob(t.prob) << '\n';
  return os.str();
}

std::string render_labels(const MarkovChain& chain, const std::vector<bool>& bad) {
  if (bad.size() != chain.size()) fail(ErrorKind::invalid_argument, "bad-state mask has the wrong size");
  std::ostringstream os;
  os << "#DECLARATION\ninit bad\n#END\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const bool init = i == chain.init;
    if (!init && !bad[i]) continue;
    os << i;
    if (init) os << " init";
    if (bad[i]) os << " bad";
    os << '\n';
  }
  return os.str();
}

std::string render_state_map(const MarkovChain& chain) {
  std::ostringstream os;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& s = chain.states[i];
    os << i << ' ' << s.agent.cell << ' ' << s.agent.speed << ' ' << s.env.name() << '\n';
  }
  return os.str();
}

void write_explicit(const MarkovChain& chain, const std::vector<bool>& bad, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  text::write_file((base / kTransitionsFile).string(), render_transitions(chain));
  text::write_file((base / kLabelsFile).string(), render_labels(chain, bad));
  text::write_file((base / kStateMapFile).string(), render_state_map(chain));
}

namespace {

std::vector<std::pair<std::size_t, std::vector<std::string_view>>> data_lines(std::string_view content) {
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> out;
  std::size_t n = 0;
  for (auto raw : text::split(content, '\n')) {
    ++n;
    auto t = text::trim(raw);
    if (t.empty()) continue;
    out.emplace_back(n, text::split_ws(t));
  }
  return out;
}

[[noreturn]] void bad_line(const std::string& file, std::size_t line, const std::string& what) {
  fail(ErrorKind::parse, file + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

ExplicitModel read_explicit(const std::string& dir, int n_cells, int crosswalk_cell,
                            const std::string& pedestrian_class) {
  const std::filesystem::path base(dir);
  ExplicitModel m;
  auto& chain = m.chain;
  chain.n_cells = n_cells;
  chain.crosswalk_cell = crosswalk_cell;

  const auto states_path = (base / kStateMapFile).string();
  const auto states_text = text::read_file(states_path);
  for (const auto& [line, f] : data_lines(states_text)) {
    if (f.size() != 4) bad_line(states_path, line, "expected 'index cell speed env'");
    auto idx = text::to_int<std::size_t>(f[0]);
    auto cell = text::to_int<int>(f[1]);
    auto speed = text::to_int<int>(f[2]);
    if (!idx || !cell || !speed || *idx != chain.states.size())
      bad_line(states_path, line, "state indices must be consecutive from 0");
    chain.states.push_back({{*cell, *speed}, EnvState::from_name(f[3])});
  }
  if (chain.states.empty()) fail(ErrorKind::parse, states_path + ": no states");
  chain.pedestrian_env = chain.states.front().env.contains(pedestrian_class);
  for (const auto& s : chain.states)
    chain.flags.push_back(state_flags(s.agent, chain.pedestrian_env, crosswalk_cell));

  const auto n = chain.states.size();
  chain.trans.assign(n, {});
  const auto tra_path = (base / kTransitionsFile).string();
  const auto tra_text = text::read_file(tra_path);
  const auto tra = data_lines(tra_text);
  if (tra.empty() || tra.front().second.size() != 1 || tra.front().second[0] != "dtmc")
    fail(ErrorKind::parse, tra_path + ": first line must be 'dtmc'");
  for (std::size_t i = 1; i < tra.size(); ++i) {
    const auto& [line, f] = tra[i];
    if (f.size() != 3) bad_line(tra_path, line, "expected 'src dst prob'");
    auto src = text::to_int<std::size_t>(f[0]);
    auto dst = text::to_int<std::size_t>(f[1]);
    auto p = text::to_double(f[2]);
    if (!src || !dst || !p || *src >= n || *dst >= n) bad_line(tra_path, line, "bad transition");
    chain.trans[*src].push_back({*dst, *p});
  }

  m.bad.assign(n, false);
  bool have_init = false;
  const auto lab_path = (base / kLabelsFile).string();
  bool in_declaration = false, declared = false;
  const auto lab_text = text::read_file(lab_path);
  for (const auto& [line, f] : data_lines(lab_text)) {
    if (f[0] == "#DECLARATION") {
      in_declaration = true;
      continue;
    }
    if (f[0] == "#END") {
      in_declaration = false;
      declared = true;
      continue;
    }
    if (in_declaration) continue;
    if (!declared) bad_line(lab_path, line, "labels before #END");
    auto idx = text::to_int<std::size_t>(f[0]);
    if (!idx || *idx >= n) bad_line(lab_path, line, "bad state index");
    for (std::size_t j = 1; j < f.size(); ++j) {
      if (f[j] == "init") {
        chain.init = *idx;
        have_init = true;
      } else if (f[j] == "bad") {
        m.bad[*idx] = true;
      } else {
        bad_line(lab_path, line, "unknown label '" + std::string(f[j]) + "'");
      }
    }
  }
  if (!have_init) fail(ErrorKind::parse, lab_path + ": no initial state");
  return m;
}

}  // namespace pcmc
