/*
 * pcmc: perception confusion matrices -> Markov chain -> safety probability.
 *
 * C interface to the pcmc shared library. All objects are opaque handles
 * created by a *_load / *_build / *_run call and released with the matching
 * *_free. Functions returning pcmc_status report failures through the status
 * code; pcmc_last_error() then holds a message for the calling thread.
 */
#ifndef PCMC_PCMC_H
#define PCMC_PCMC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PCMC_BUILDING_LIBRARY)
#    define PCMC_API __declspec(dllexport)
#  else
#    define PCMC_API __declspec(dllimport)
#  endif
#else
#  define PCMC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcmc_status {
  PCMC_OK = 0,
  PCMC_ERR_INVALID_ARGUMENT = 1,
  PCMC_ERR_PARSE = 2,
  PCMC_ERR_VALIDATION = 3,
  PCMC_ERR_IO = 4,
  PCMC_ERR_NUMERIC = 5,
  PCMC_ERR_INTERNAL = 6
} pcmc_status;

typedef enum pcmc_mode { PCMC_MODE_CLASS = 0, PCMC_MODE_PROP = 1 } pcmc_mode;

typedef enum pcmc_spec {
  PCMC_SPEC_PHI1 = 0, /* no pedestrian: never stop at the cell before the crosswalk */
  PCMC_SPEC_PHI2 = 1, /* pedestrian: stop at the cell before the crosswalk */
  PCMC_SPEC_PHI3 = 2, /* never stop earlier on the road */
  PCMC_SPEC_ALL = 3   /* conjunction of the three */
} pcmc_spec;

typedef struct pcmc_config pcmc_config;
typedef struct pcmc_cm pcmc_cm;
typedef struct pcmc_chain pcmc_chain;
typedef struct pcmc_sweep pcmc_sweep;

typedef struct pcmc_check_result {
  double probability;
  double residual;
  size_t transient_states;
  size_t absorbing_states;
  size_t bad_states;
  int guard_mismatch; /* nonzero when the spec does not constrain this environment */
} pcmc_check_result;

typedef struct pcmc_sim_result {
  uint64_t trials;
  uint64_t successes;
  double estimate;
  double std_error;
  uint64_t seed;
  uint64_t horizon_hits;
} pcmc_sim_result;

PCMC_API const char* pcmc_version(void);
/* Message of the last failed call on this thread; "" if none. */
PCMC_API const char* pcmc_last_error(void);
PCMC_API void pcmc_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

PCMC_API pcmc_status pcmc_config_load(const char* path, pcmc_config** out);
PCMC_API pcmc_status pcmc_config_parse(const char* json, const char* base_dir, pcmc_config** out);
PCMC_API void pcmc_config_free(pcmc_config* cfg);

PCMC_API pcmc_mode pcmc_config_mode(const pcmc_config* cfg);
PCMC_API const char* pcmc_config_cm_path(const pcmc_config* cfg);
PCMC_API const char* pcmc_config_env(const pcmc_config* cfg);
PCMC_API uint64_t pcmc_config_seed(const pcmc_config* cfg);
PCMC_API uint64_t pcmc_config_trials(const pcmc_config* cfg);
PCMC_API int pcmc_config_has_sweep(const pcmc_config* cfg);
PCMC_API const char* pcmc_config_sweep_cm_path(const pcmc_config* cfg, pcmc_mode mode);

/* ---- confusion matrices ---------------------------------------------- */

PCMC_API pcmc_status pcmc_cm_load(const char* path, pcmc_mode mode, pcmc_cm** out);

/* Builds a distance-parametrized matrix from ground-truth and prediction
 * CSV files. classes is a comma-separated list such as "ped,obs". */
PCMC_API pcmc_status pcmc_cm_build(const char* gt_csv_path, const char* pred_csv_path, pcmc_mode mode,
                                   const char* classes, const double* band_edges, size_t n_edges,
                                   double iou_threshold, pcmc_cm** out);

PCMC_API pcmc_status pcmc_cm_save(const pcmc_cm* cm, const char* path);
PCMC_API pcmc_status pcmc_cm_aggregate(const pcmc_cm* cm, pcmc_cm** out);
PCMC_API pcmc_status pcmc_cm_render_fixture(const pcmc_cm* cm, char** out);
PCMC_API pcmc_status pcmc_cm_render_tables(const pcmc_cm* cm, char** out);
PCMC_API void pcmc_cm_free(pcmc_cm* cm);

PCMC_API size_t pcmc_cm_num_labels(const pcmc_cm* cm);
PCMC_API size_t pcmc_cm_num_bands(const pcmc_cm* cm);
PCMC_API const char* pcmc_cm_label(const pcmc_cm* cm, size_t index);
PCMC_API pcmc_status pcmc_cm_count(const pcmc_cm* cm, size_t band, size_t predicted, size_t truth,
                                   int64_t* out);
/* Column-normalized probabilities of true label `truth`; out holds
 * pcmc_cm_num_labels() doubles. Zero columns fail unless fallback != 0. */
PCMC_API pcmc_status pcmc_cm_column(const pcmc_cm* cm, size_t band, size_t truth, int fallback,
                                    double* out, size_t out_len);

/* ---- Markov chains ---------------------------------------------------- */

PCMC_API pcmc_status pcmc_chain_build(const pcmc_config* cfg, const pcmc_cm* cm, pcmc_chain** out);
PCMC_API size_t pcmc_chain_num_states(const pcmc_chain* chain);
PCMC_API double pcmc_chain_max_row_defect(const pcmc_chain* chain);
PCMC_API pcmc_status pcmc_chain_check(const pcmc_chain* chain, pcmc_spec spec, pcmc_check_result* out);
/* Writes model.tra, model.lab and model.states under dir. */
PCMC_API pcmc_status pcmc_chain_export(const pcmc_chain* chain, pcmc_spec spec, const char* dir);
PCMC_API void pcmc_chain_free(pcmc_chain* chain);

/* ---- simulation and sweeps -------------------------------------------- */

PCMC_API pcmc_status pcmc_simulate(const pcmc_config* cfg, const pcmc_cm* cm, pcmc_spec spec, uint64_t trials,
                                   uint64_t seed, pcmc_sim_result* out);

/* Runs the sweep grid of cfg. trials == 0 skips Monte Carlo columns;
 * threads == 0 uses all hardware threads. Output does not depend on threads. */
PCMC_API pcmc_status pcmc_sweep_run(const pcmc_config* cfg, uint64_t trials, uint64_t seed, unsigned threads,
                                    pcmc_sweep** out);
PCMC_API const char* pcmc_sweep_csv(const pcmc_sweep* sweep);
PCMC_API const char* pcmc_sweep_summary(const pcmc_sweep* sweep);
/* Number of monotonicity, proposition-vs-class and Monte Carlo findings. */
PCMC_API size_t pcmc_sweep_num_findings(const pcmc_sweep* sweep);
PCMC_API void pcmc_sweep_free(pcmc_sweep* sweep);

#ifdef __cplusplus
}
#endif

#endif /* PCMC_PCMC_H */
