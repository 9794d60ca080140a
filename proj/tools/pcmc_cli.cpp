// pcmc command-line tool. Talks to the library only through pcmc/pcmc.h.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcmc/pcmc.h"

namespace fs = std::filesystem;

namespace {

// Raised after a failing C call; carries the status for the exit code.
struct CallFailed {
  pcmc_status status;
  std::string message;
};

void check(pcmc_status st, const std::string& what) {
  if (st != PCMC_OK) throw CallFailed{st, what + ": " + pcmc_last_error()};
}

int exit_code(pcmc_status st) {
  switch (st) {
    case PCMC_OK: return 0;
    case PCMC_ERR_NUMERIC:
    case PCMC_ERR_INTERNAL: return 2;
    default: return 1;
  }
}

struct ConfigDel { void operator()(pcmc_config* p) const { pcmc_config_free(p); } };
struct CmDel { void operator()(pcmc_cm* p) const { pcmc_cm_free(p); } };
struct ChainDel { void operator()(pcmc_chain* p) const { pcmc_chain_free(p); } };
struct SweepDel { void operator()(pcmc_sweep* p) const { pcmc_sweep_free(p); } };
struct StrDel { void operator()(char* p) const { pcmc_string_free(p); } };

using ConfigPtr = std::unique_ptr<pcmc_config, ConfigDel>;
using CmPtr = std::unique_ptr<pcmc_cm, CmDel>;
using ChainPtr = std::unique_ptr<pcmc_chain, ChainDel>;
using SweepPtr = std::unique_ptr<pcmc_sweep, SweepDel>;
using StrPtr = std::unique_ptr<char, StrDel>;

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

struct Spec {
  pcmc_spec id;
  const char* name;
};

constexpr Spec kSpecs[] = {
    {PCMC_SPEC_PHI1, "phi1"}, {PCMC_SPEC_PHI2, "phi2"}, {PCMC_SPEC_PHI3, "phi3"}, {PCMC_SPEC_ALL, "phi_all"}};

pcmc_spec spec_by_name(const std::string& name) {
  for (const auto& s : kSpecs)
    if (name == s.name) return s.id;
  throw CallFailed{PCMC_ERR_INVALID_ARGUMENT, "unknown spec '" + name + "' (phi1, phi2, phi3, phi_all)"};
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

ConfigPtr load_config(const Globals& g) {
  if (g.config.empty()) throw CallFailed{PCMC_ERR_INVALID_ARGUMENT, "--config is required for this command"};
  pcmc_config* c = nullptr;
  check(pcmc_config_load(g.config.c_str(), &c), "loading config " + g.config);
  return ConfigPtr(c);
}

CmPtr load_cm(const std::string& path, pcmc_mode mode) {
  pcmc_cm* m = nullptr;
  check(pcmc_cm_load(path.c_str(), mode, &m), "loading confusion matrix " + path);
  return CmPtr(m);
}

std::uint64_t seed_of(const Globals& g, const pcmc_config* cfg) {
  if (g.seed) return *g.seed;
  return cfg ? pcmc_config_seed(cfg) : 0;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CallFailed{PCMC_ERR_IO, "cannot write " + path.string()};
  f << text;
  if (!f) throw CallFailed{PCMC_ERR_IO, "cannot write " + path.string()};
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CallFailed{PCMC_ERR_IO, "cannot create " + dir + ": " + ec.message()};
  return fs::path(dir);
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const Globals& g,
                    const std::vector<std::string>& fixtures, std::uint64_t seed) {
  nlohmann::ordered_json m;
  m["subcommand"] = subcommand;
  m["config"] = g.config;
  m["fixtures"] = fixtures;
  m["output_dir"] = dir.string();
  m["version"] = pcmc_version();
  m["seed"] = seed;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<double> parse_bands(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw CallFailed{PCMC_ERR_INVALID_ARGUMENT, "bad band edge '" + item + "'"};
    out.push_back(v);
  }
  return out;
}

// ---- subcommands -------------------------------------------------------

struct BuildCmArgs {
  std::string gt, pred, mode = "class", classes = "ped,obs";
  std::string bands = "10,20,30,40,50,60,70,80,90,100";
  double iou = 0.5;
};

void run_build_cm(const Globals& g, const BuildCmArgs& a) {
  pcmc_mode mode;
  if (a.mode == "class")
    mode = PCMC_MODE_CLASS;
  else if (a.mode == "prop")
    mode = PCMC_MODE_PROP;
  else
    throw CallFailed{PCMC_ERR_INVALID_ARGUMENT, "--mode must be class or prop"};
  auto edges = parse_bands(a.bands);
  pcmc_cm* raw = nullptr;
  check(pcmc_cm_build(a.gt.c_str(), a.pred.c_str(), mode, a.classes.c_str(), edges.data(), edges.size(), a.iou,
                      &raw),
        "building confusion matrix");
  CmPtr cm(raw);

  char* tables = nullptr;
  check(pcmc_cm_render_tables(cm.get(), &tables), "rendering tables");
  StrPtr tables_owner(tables);
  std::cout << tables;

  if (!g.out.empty()) {
    auto dir = prepare_out(g.out);
    auto file = dir / (a.mode + ".cm");
    check(pcmc_cm_save(cm.get(), file.string().c_str()), "saving fixture");
    write_manifest(dir, "build-cm", g, {a.gt, a.pred}, 0);
    if (g.verbose) std::cerr << "wrote " << file.string() << '\n';
  }
}

void run_eval(const Globals& g) {
  auto cfg = load_config(g);
  std::string cm_path = pcmc_config_cm_path(cfg.get());
  auto cm = load_cm(cm_path, pcmc_config_mode(cfg.get()));
  pcmc_chain* raw = nullptr;
  check(pcmc_chain_build(cfg.get(), cm.get(), &raw), "building chain");
  ChainPtr chain(raw);

  if (g.verbose)
    std::cerr << "chain: " << pcmc_chain_num_states(chain.get()) << " states, max row defect "
              << pcmc_chain_max_row_defect(chain.get()) << '\n';

  std::ostringstream csv;
  csv << "spec,env,probability,residual,bad_states,states\n";
  std::cout << "env = " << pcmc_config_env(cfg.get()) << '\n';
  for (const auto& s : kSpecs) {
    pcmc_check_result r{};
    check(pcmc_chain_check(chain.get(), s.id, &r), std::string("checking ") + s.name);
    std::cout << std::left << std::setw(8) << s.name << std::right << " P = " << fmt(r.probability);
    if (r.guard_mismatch) std::cout << "  (spec does not constrain this environment)";
    std::cout << '\n';
    if (g.verbose) std::cerr << s.name << ": residual " << r.residual << ", bad states " << r.bad_states << '\n';
    csv << s.name << ',' << pcmc_config_env(cfg.get()) << ',' << fmt(r.probability) << ',' << fmt(r.residual) << ','
        << r.bad_states << ',' << pcmc_chain_num_states(chain.get()) << '\n';
  }
  if (!g.out.empty()) {
    auto dir = prepare_out(g.out);
    write_text(dir / "eval.csv", csv.str());
    write_manifest(dir, "eval", g, {cm_path}, seed_of(g, cfg.get()));
  }
}

struct SweepArgs {
  std::optional<std::uint64_t> trials;
  unsigned threads = 0;
};

void run_sweep(const Globals& g, const SweepArgs& a) {
  auto cfg = load_config(g);
  std::uint64_t seed = seed_of(g, cfg.get());
  std::uint64_t trials = a.trials ? *a.trials : pcmc_config_trials(cfg.get());
  pcmc_sweep* raw = nullptr;
  check(pcmc_sweep_run(cfg.get(), trials, seed, a.threads, &raw), "running sweep");
  SweepPtr sw(raw);
  std::cout << pcmc_sweep_summary(sw.get());
  if (!g.out.empty()) {
    auto dir = prepare_out(g.out);
    write_text(dir / "sweep.csv", pcmc_sweep_csv(sw.get()));
    write_text(dir / "summary.txt", pcmc_sweep_summary(sw.get()));
    write_manifest(dir, "sweep", g,
                   {pcmc_config_sweep_cm_path(cfg.get(), PCMC_MODE_CLASS),
                    pcmc_config_sweep_cm_path(cfg.get(), PCMC_MODE_PROP)},
                   seed);
    if (g.verbose) std::cerr << "wrote " << (dir / "sweep.csv").string() << '\n';
  } else {
    std::cout << '\n' << pcmc_sweep_csv(sw.get());
  }
}

struct SimulateArgs {
  std::optional<std::uint64_t> trials;
  std::string spec = "phi_all";
};

void run_simulate(const Globals& g, const SimulateArgs& a) {
  auto cfg = load_config(g);
  std::uint64_t seed = seed_of(g, cfg.get());
  std::uint64_t trials = a.trials ? *a.trials : pcmc_config_trials(cfg.get());
  if (trials == 0) trials = 10000;
  pcmc_spec spec = spec_by_name(a.spec);
  std::string cm_path = pcmc_config_cm_path(cfg.get());
  auto cm = load_cm(cm_path, pcmc_config_mode(cfg.get()));

  pcmc_sim_result sim{};
  check(pcmc_simulate(cfg.get(), cm.get(), spec, trials, seed, &sim), "simulating");
  pcmc_chain* raw = nullptr;
  check(pcmc_chain_build(cfg.get(), cm.get(), &raw), "building chain");
  ChainPtr chain(raw);
  pcmc_check_result exact{};
  check(pcmc_chain_check(chain.get(), spec, &exact), "checking");

  std::cout << "spec " << a.spec << ", env " << pcmc_config_env(cfg.get()) << ", " << sim.trials << " trials, seed "
            << sim.seed << '\n';
  std::cout << "mc_estimate " << fmt(sim.estimate) << " +- " << fmt(sim.std_error) << '\n';
  std::cout << "prob_safe   " << fmt(exact.probability) << '\n';
  if (sim.horizon_hits > 0) std::cerr << "warning: " << sim.horizon_hits << " trials hit the step cap\n";

  if (!g.out.empty()) {
    auto dir = prepare_out(g.out);
    std::ostringstream csv;
    csv << "spec,env,trials,seed,prob,mc_estimate,mc_stderr\n";
    csv << a.spec << ',' << pcmc_config_env(cfg.get()) << ',' << sim.trials << ',' << sim.seed << ','
        << fmt(exact.probability) << ',' << fmt(sim.estimate) << ',' << fmt(sim.std_error) << '\n';
    write_text(dir / "simulate.csv", csv.str());
    write_manifest(dir, "simulate", g, {cm_path}, seed);
  }
}

struct ExportArgs {
  std::string spec = "phi_all";
};

void run_export(const Globals& g, const ExportArgs& a) {
  if (g.out.empty()) throw CallFailed{PCMC_ERR_INVALID_ARGUMENT, "--out is required for export"};
  auto cfg = load_config(g);
  pcmc_spec spec = spec_by_name(a.spec);
  std::string cm_path = pcmc_config_cm_path(cfg.get());
  auto cm = load_cm(cm_path, pcmc_config_mode(cfg.get()));
  pcmc_chain* raw = nullptr;
  check(pcmc_chain_build(cfg.get(), cm.get(), &raw), "building chain");
  ChainPtr chain(raw);
  auto dir = prepare_out(g.out);
  check(pcmc_chain_export(chain.get(), spec, dir.string().c_str()), "exporting");
  write_manifest(dir, "export", g, {cm_path}, seed_of(g, cfg.get()));
  std::cout << "exported " << pcmc_chain_num_states(chain.get()) << " states to " << dir.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perception-aware safety probabilities for a crosswalk scenario"};
  app.set_version_flag("--version", std::string(pcmc_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "JSON scenario config");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--seed", g.seed, "RNG seed (overrides the config)");
  app.add_flag("-v,--verbose", g.verbose, "Print diagnostics to stderr");

  BuildCmArgs bcm;
  auto* build_cm = app.add_subcommand("build-cm", "Tally confusion matrices from detection CSVs");
  build_cm->add_option("--gt", bcm.gt, "Ground-truth CSV")->required();
  build_cm->add_option("--pred", bcm.pred, "Prediction CSV")->required();
  build_cm->add_option("--mode", bcm.mode, "class or prop")->capture_default_str();
  build_cm->add_option("--classes", bcm.classes, "Comma-separated object classes")->capture_default_str();
  build_cm->add_option("--bands", bcm.bands, "Comma-separated band edges in meters")->capture_default_str();
  build_cm->add_option("--iou", bcm.iou, "IoU threshold for a match")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Satisfaction probability per spec for one scenario");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Evaluate the variant x env x speed grid");
  sweep->add_option("--trials", sa.trials, "Monte Carlo trials per grid point (0 = none)");
  sweep->add_option("--threads", sa.threads, "Worker threads (0 = all cores)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate next to the exact value");
  simulate->add_option("--trials", sim.trials, "Number of trials");
  simulate->add_option("--spec", sim.spec, "phi1, phi2, phi3 or phi_all")->capture_default_str();

  ExportArgs ex;
  auto* exp = app.add_subcommand("export", "Write the chain as explicit DTMC files");
  exp->add_option("--spec", ex.spec, "Spec whose bad states are labeled")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*build_cm)
      run_build_cm(g, bcm);
    else if (*eval)
      run_eval(g);
    else if (*sweep)
      run_sweep(g, sa);
    else if (*simulate)
      run_simulate(g, sim);
    else if (*exp)
      run_export(g, ex);
  } catch (const CallFailed& f) {
    std::cerr << "error: " << f.message << '\n';
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
