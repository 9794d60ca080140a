#include "pcmc/pcmc.h"

#include <exception>
#include <new>
#include <string>

#include "chain.hpp"
#include "cm_core.hpp"
#include "config.hpp"
#include "detection_ingest.hpp"
#include "error.hpp"
#include "explicit_io.hpp"
#include "mc_oracle.hpp"
#include "safety.hpp"
#include "sweep.hpp"
#include "text_util.hpp"

struct pcmc_config {
  pcmc::RunConfig cfg;
  std::string env_name;
};

struct pcmc_cm {
  pcmc::DistanceParamCM cm;
};

struct pcmc_chain {
  pcmc::MarkovChain chain;
};

struct pcmc_sweep {
  pcmc::SweepResult result;
  std::string csv;
  std::string summary;
  std::size_t findings = 0;
};

namespace {

thread_local std::string last_error;

pcmc_status status_of(pcmc::ErrorKind kind) {
  switch (kind) {
    case pcmc::ErrorKind::invalid_argument: return PCMC_ERR_INVALID_ARGUMENT;
    case pcmc::ErrorKind::parse: return PCMC_ERR_PARSE;
    case pcmc::ErrorKind::validation: return PCMC_ERR_VALIDATION;
    case pcmc::ErrorKind::io: return PCMC_ERR_IO;
    case pcmc::ErrorKind::numeric: return PCMC_ERR_NUMERIC;
  }
  return PCMC_ERR_INTERNAL;
}

template <class F>
pcmc_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return PCMC_OK;
  } catch (const pcmc::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PCMC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PCMC_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return PCMC_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) pcmc::fail(pcmc::ErrorKind::invalid_argument, std::string(what) + " is null");
}

pcmc::CmMode to_mode(pcmc_mode m) {
  if (m == PCMC_MODE_CLASS) return pcmc::CmMode::class_labeled;
  if (m == PCMC_MODE_PROP) return pcmc::CmMode::prop_labeled;
  pcmc::fail(pcmc::ErrorKind::invalid_argument, "unknown mode " + std::to_string(static_cast<int>(m)));
}

pcmc::SafetySpec to_spec(pcmc_spec s) {
  switch (s) {
    case PCMC_SPEC_PHI1: return pcmc::SafetySpec::phi1;
    case PCMC_SPEC_PHI2: return pcmc::SafetySpec::phi2;
    case PCMC_SPEC_PHI3: return pcmc::SafetySpec::phi3;
    case PCMC_SPEC_ALL: return pcmc::SafetySpec::all;
  }
  pcmc::fail(pcmc::ErrorKind::invalid_argument, "unknown spec " + std::to_string(static_cast<int>(s)));
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  s.copy(out, s.size());
  out[s.size()] = '\0';
  return out;
}

pcmc_config* wrap(pcmc::RunConfig cfg) {
  auto* h = new pcmc_config{std::move(cfg), {}};
  h->env_name = h->cfg.scenario.env.name();
  return h;
}

}  // namespace

extern "C" {

const char* pcmc_version(void) { return PCMC_VERSION_STRING; }

const char* pcmc_last_error(void) { return last_error.c_str(); }

void pcmc_string_free(char* s) { delete[] s; }

pcmc_status pcmc_config_load(const char* path, pcmc_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(pcmc::load_config(path));
  });
}

pcmc_status pcmc_config_parse(const char* json, const char* base_dir, pcmc_config** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = wrap(pcmc::parse_config(json, base_dir ? base_dir : "."));
  });
}

void pcmc_config_free(pcmc_config* cfg) { delete cfg; }

pcmc_mode pcmc_config_mode(const pcmc_config* cfg) {
  if (!cfg) return PCMC_MODE_CLASS;
  return cfg->cfg.scenario.mode == pcmc::CmMode::prop_labeled ? PCMC_MODE_PROP : PCMC_MODE_CLASS;
}

const char* pcmc_config_cm_path(const pcmc_config* cfg) { return cfg ? cfg->cfg.scenario.cm_path.c_str() : ""; }

const char* pcmc_config_env(const pcmc_config* cfg) { return cfg ? cfg->env_name.c_str() : ""; }

uint64_t pcmc_config_seed(const pcmc_config* cfg) { return cfg ? cfg->cfg.seed : 0; }

uint64_t pcmc_config_trials(const pcmc_config* cfg) { return cfg ? cfg->cfg.trials : 0; }

int pcmc_config_has_sweep(const pcmc_config* cfg) { return cfg && cfg->cfg.has_sweep ? 1 : 0; }

const char* pcmc_config_sweep_cm_path(const pcmc_config* cfg, pcmc_mode mode) {
  if (!cfg) return "";
  return mode == PCMC_MODE_PROP ? cfg->cfg.sweep.prop_cm_path.c_str() : cfg->cfg.sweep.class_cm_path.c_str();
}

pcmc_status pcmc_cm_load(const char* path, pcmc_mode mode, pcmc_cm** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pcmc_cm{pcmc::load_fixture(path, to_mode(mode))};
  });
}

pcmc_status pcmc_cm_build(const char* gt_csv_path, const char* pred_csv_path, pcmc_mode mode, const char* classes,
                          const double* band_edges, size_t n_edges, double iou_threshold, pcmc_cm** out) {
  return guarded([&] {
    need(gt_csv_path, "gt_csv_path");
    need(pred_csv_path, "pred_csv_path");
    need(classes, "classes");
    need(out, "out");
    if (n_edges > 0) need(band_edges, "band_edges");
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
      pcmc::fail(pcmc::ErrorKind::invalid_argument, "iou threshold must be in (0, 1]");
    std::vector<std::string> names;
    for (auto& c : pcmc::text::split(classes, ',')) {
      auto t = std::string(pcmc::text::trim(c));
      if (!t.empty()) names.push_back(t);
    }
    pcmc::DistanceBands bands(std::vector<double>(band_edges, band_edges + n_edges));
    auto gt = pcmc::read_ground_truth_file(gt_csv_path);
    auto pred = pcmc::read_predictions_file(pred_csv_path);
    auto m = to_mode(mode);
    auto cm = m == pcmc::CmMode::class_labeled ? pcmc::build_class_cm(gt, pred, names, bands, iou_threshold)
                                               : pcmc::build_prop_cm(gt, pred, names, bands, iou_threshold);
    *out = new pcmc_cm{std::move(cm)};
  });
}

pcmc_status pcmc_cm_save(const pcmc_cm* cm, const char* path) {
  return guarded([&] {
    need(cm, "cm");
    need(path, "path");
    pcmc::save_fixture(path, cm->cm);
  });
}

pcmc_status pcmc_cm_aggregate(const pcmc_cm* cm, pcmc_cm** out) {
  return guarded([&] {
    need(cm, "cm");
    need(out, "out");
    *out = new pcmc_cm{pcmc::without_distance(pcmc::aggregate(cm->cm))};
  });
}

pcmc_status pcmc_cm_render_fixture(const pcmc_cm* cm, char** out) {
  return guarded([&] {
    need(cm, "cm");
    need(out, "out");
    *out = dup_string(pcmc::render_fixture(cm->cm));
  });
}

pcmc_status pcmc_cm_render_tables(const pcmc_cm* cm, char** out) {
  return guarded([&] {
    need(cm, "cm");
    need(out, "out");
    *out = dup_string(pcmc::render_tables(cm->cm));
  });
}

void pcmc_cm_free(pcmc_cm* cm) { delete cm; }

size_t pcmc_cm_num_labels(const pcmc_cm* cm) { return cm ? cm->cm.labels().size() : 0; }

size_t pcmc_cm_num_bands(const pcmc_cm* cm) { return cm ? cm->cm.band_count() : 0; }

const char* pcmc_cm_label(const pcmc_cm* cm, size_t index) {
  if (!cm || index >= cm->cm.labels().size()) return nullptr;
  return cm->cm.labels().name(index).c_str();
}

pcmc_status pcmc_cm_count(const pcmc_cm* cm, size_t band, size_t predicted, size_t truth, int64_t* out) {
  return guarded([&] {
    need(cm, "cm");
    need(out, "out");
    if (band >= cm->cm.band_count()) pcmc::fail(pcmc::ErrorKind::invalid_argument, "band index out of range");
    *out = cm->cm.per_band[band].at(predicted, truth);
  });
}

pcmc_status pcmc_cm_column(const pcmc_cm* cm, size_t band, size_t truth, int fallback, double* out,
                           size_t out_len) {
  return guarded([&] {
    need(cm, "cm");
    need(out, "out");
    if (band >= cm->cm.band_count()) pcmc::fail(pcmc::ErrorKind::invalid_argument, "band index out of range");
    if (out_len < cm->cm.labels().size()) pcmc::fail(pcmc::ErrorKind::invalid_argument, "output buffer too small");
    auto col = pcmc::normalize_column(cm->cm.per_band[band], truth,
                                      fallback ? pcmc::ZeroColumnPolicy::fallback_empty
                                               : pcmc::ZeroColumnPolicy::strict);
    std::copy(col.probs.begin(), col.probs.end(), out);
  });
}

pcmc_status pcmc_chain_build(const pcmc_config* cfg, const pcmc_cm* cm, pcmc_chain** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(cm, "cm");
    need(out, "out");
    *out = new pcmc_chain{pcmc::build_chain(cfg->cfg.scenario, cm->cm)};
  });
}

size_t pcmc_chain_num_states(const pcmc_chain* chain) { return chain ? chain->chain.size() : 0; }

double pcmc_chain_max_row_defect(const pcmc_chain* chain) { return chain ? chain->chain.max_row_defect() : 0.0; }

pcmc_status pcmc_chain_check(const pcmc_chain* chain, pcmc_spec spec, pcmc_check_result* out) {
  return guarded([&] {
    need(chain, "chain");
    need(out, "out");
    auto bad = pcmc::bad_states(chain->chain, to_spec(spec));
    auto r = pcmc::prob_safe(chain->chain, bad.bad);
    out->probability = r.probability;
    out->residual = r.residual;
    out->transient_states = r.transient_states;
    out->absorbing_states = r.absorbing_states;
    out->bad_states = bad.count;
    out->guard_mismatch = bad.warning.empty() ? 0 : 1;
  });
}

pcmc_status pcmc_chain_export(const pcmc_chain* chain, pcmc_spec spec, const char* dir) {
  return guarded([&] {
    need(chain, "chain");
    need(dir, "dir");
    auto bad = pcmc::bad_states(chain->chain, to_spec(spec));
    pcmc::write_explicit(chain->chain, bad.bad, dir);
  });
}

void pcmc_chain_free(pcmc_chain* chain) { delete chain; }

pcmc_status pcmc_simulate(const pcmc_config* cfg, const pcmc_cm* cm, pcmc_spec spec, uint64_t trials, uint64_t seed,
                          pcmc_sim_result* out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(cm, "cm");
    need(out, "out");
    if (trials == 0) pcmc::fail(pcmc::ErrorKind::invalid_argument, "trials must be positive");
    auto est = pcmc::simulate(cfg->cfg.scenario, cm->cm, to_spec(spec), trials, seed);
    out->trials = est.trials;
    out->successes = est.successes;
    out->estimate = est.estimate;
    out->std_error = est.std_error;
    out->seed = est.seed;
    out->horizon_hits = est.horizon_hits;
  });
}

pcmc_status pcmc_sweep_run(const pcmc_config* cfg, uint64_t trials, uint64_t seed, unsigned threads,
                           pcmc_sweep** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    const auto& rc = cfg->cfg;
    if (!rc.has_sweep) pcmc::fail(pcmc::ErrorKind::validation, "config has no sweep section");
    auto class_cm = pcmc::load_fixture(rc.sweep.class_cm_path, pcmc::CmMode::class_labeled);
    auto prop_cm = pcmc::load_fixture(rc.sweep.prop_cm_path, pcmc::CmMode::prop_labeled);
    pcmc::SweepOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    opt.threads = threads;
    auto* h = new pcmc_sweep{pcmc::sweep(rc.scenario, rc.sweep, class_cm, prop_cm, opt), {}, {}, 0};
    h->csv = h->result.csv();
    h->summary = h->result.summary();
    h->findings = h->result.monotonicity_violations().size() + h->result.prop_below_class().size() +
                  h->result.mc_disagreements().size();
    *out = h;
  });
}

const char* pcmc_sweep_csv(const pcmc_sweep* sweep) { return sweep ? sweep->csv.c_str() : ""; }

const char* pcmc_sweep_summary(const pcmc_sweep* sweep) { return sweep ? sweep->summary.c_str() : ""; }

size_t pcmc_sweep_num_findings(const pcmc_sweep* sweep) { return sweep ? sweep->findings : 0; }

void pcmc_sweep_free(pcmc_sweep* sweep) { delete sweep; }

}  // extern "C"
