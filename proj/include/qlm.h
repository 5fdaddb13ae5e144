/* qlm - decentralized queue-length monitoring simulator.
 *
 * C interface to the shared library. All functions return a qlm_status;
 * results come back through opaque handles or library-owned strings.
 * Handles are single-owner and not thread-safe; distinct handles may be
 * used from distinct threads freely. On any failure, qlm_last_error()
 * returns a thread-local description of what went wrong.
 */
#ifndef QLM_H
#define QLM_H

#include <stdint.h>

#if defined(_WIN32)
#define QLM_API __declspec(dllexport)
#else
#define QLM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qlm_status {
    QLM_OK = 0,
    QLM_ERR_INVALID_ARGUMENT = 1,
    QLM_ERR_CONFIG = 2,
    QLM_ERR_MODE_MISMATCH = 3,
    QLM_ERR_PARAMETER_OUT_OF_RANGE = 4,
    QLM_ERR_INFEASIBLE_SCHEDULE = 5,
    QLM_ERR_INCONSISTENT_PROFILE = 6,
    QLM_ERR_LENGTH_MISMATCH = 7,
    QLM_ERR_IO = 8,
    QLM_ERR_RUNTIME = 9,
} qlm_status;

typedef struct qlm_scenario qlm_scenario;       /* parsed config: scenario + runner knobs */
typedef struct qlm_summary qlm_summary;         /* experiment results + serialized views */
typedef struct qlm_demo_report qlm_demo_report; /* two-arm demo outcome */

QLM_API const char* qlm_version(void);
QLM_API const char* qlm_rng_identity(void);
QLM_API const char* qlm_status_name(qlm_status status);
/* Thread-local message from the most recent failing call. */
QLM_API const char* qlm_last_error(void);

/* Strings returned through char** are owned by the caller; release them
 * with qlm_string_free. Strings returned as const char* are owned by the
 * handle they came from. */
QLM_API void qlm_string_free(char* s);

/* ---- configuration ---- */

/* Parses a JSON config object. `base_dir` (may be NULL) anchors relative
 * replay-trace paths. */
QLM_API qlm_status qlm_scenario_parse(const char* json, const char* base_dir,
                                      qlm_scenario** out);
QLM_API void qlm_scenario_free(qlm_scenario* scenario);

QLM_API qlm_status qlm_scenario_canonical_json(const qlm_scenario* scenario, char** out);
QLM_API int64_t qlm_scenario_trials(const qlm_scenario* scenario);
QLM_API uint64_t qlm_scenario_seed(const qlm_scenario* scenario);
QLM_API int qlm_scenario_threads(const qlm_scenario* scenario);

/* In-place overrides for the CLI flags. `field` is one of
 * "seed", "trials", "threads", "epsilon", "h", "horizon"; `value` is the
 * decimal text of the new value. */
QLM_API qlm_status qlm_scenario_override(qlm_scenario* scenario, const char* field,
                                         const char* value);

/* ---- experiments ---- */

/* Runs `trials` seeded trials (seed base+i), `threads` <= 0 meaning the
 * available parallelism. Results are bit-identical for a given config and
 * seed regardless of thread count. */
QLM_API qlm_status qlm_run_experiment(const qlm_scenario* scenario, int64_t trials,
                                      uint64_t base_seed, int threads, qlm_summary** out);
QLM_API void qlm_summary_free(qlm_summary* summary);

QLM_API qlm_status qlm_summary_csv(const qlm_summary* summary, const char** out);
QLM_API qlm_status qlm_summary_trials_jsonl(const qlm_summary* summary, const char** out);
QLM_API qlm_status qlm_summary_meta_json(const qlm_summary* summary, const char** out);
QLM_API int64_t qlm_summary_num_trials(const qlm_summary* summary);
/* `field`: opt | alg | ratio | ping_count | pings_per_packet | lag_sum |
 * under_area | over_area. Returns NaN when absent. */
QLM_API double qlm_summary_mean(const qlm_summary* summary, const char* field);
QLM_API double qlm_summary_stderr(const qlm_summary* summary, const char* field);

/* `time,estimate,true_height,abs_error` rows for one seeded run. */
QLM_API qlm_status qlm_trial_trajectory_csv(const qlm_scenario* scenario, uint64_t seed,
                                            char** out);

/* ---- demos ---- */

/* `name`: lb-dep | lb-arr | poa-insufficiency | eg1 | eg3.
 * `params_json` (may be NULL) overrides demo parameters:
 *   {"h":..., "eps":"0.05", "phases":..., "steps":..., "seeds":..., "seed":...,
 *    "threads":...}. */
QLM_API qlm_status qlm_demo_run(const char* name, const char* params_json,
                                qlm_demo_report** out);
QLM_API void qlm_demo_report_free(qlm_demo_report* report);
QLM_API qlm_status qlm_demo_report_csv(const qlm_demo_report* report, const char** out);
QLM_API qlm_status qlm_demo_report_verdict(const qlm_demo_report* report, const char** out);
QLM_API int qlm_demo_report_pass(const qlm_demo_report* report);

#ifdef __cplusplus
}
#endif

#endif /* QLM_H */
