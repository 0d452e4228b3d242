/* tvsched: linear-TV viewership forecasting and ad-schedule optimization.
 *
 * C interface to the shared library. All objects are opaque handles owned by
 * the library; every function that can fail returns a tvs_status and leaves a
 * human-readable message in tvs_last_error() (thread-local). Option arguments
 * are JSON text; file formats are documented in the project README.
 */
#ifndef TVSCHED_TVSCHED_H
#define TVSCHED_TVSCHED_H

#include <stdint.h>

#if defined(_WIN32)
#define TVS_API __declspec(dllexport)
#else
#define TVS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tvs_status {
    TVS_OK = 0,
    TVS_ERR_INVALID = 1,        /* bad argument or precondition violation */
    TVS_ERR_IO = 2,             /* file system problem */
    TVS_ERR_PARSE = 3,          /* malformed input file or config */
    TVS_ERR_DOMAIN = 4,         /* data violates a documented invariant */
    TVS_ERR_INFEASIBLE = 5,     /* no feasible schedule */
    TVS_ERR_NO_CONVERGENCE = 6, /* iterative fit or solve gave up */
    TVS_ERR_INTERNAL = 7
} tvs_status;

typedef struct tvs_series tvs_series;     /* hourly viewership of one channel */
typedef struct tvs_panel tvs_panel;       /* viewer-level viewing events */
typedef struct tvs_analysis tvs_analysis; /* spectral analysis bundle */

TVS_API const char* tvs_version(void);

/* Message for the most recent failure on this thread; never NULL. */
TVS_API const char* tvs_last_error(void);

/* --- viewership series ------------------------------------------------- */

/* channel may be NULL when the file holds a single channel. */
TVS_API tvs_status tvs_series_load(const char* path, const char* channel, tvs_series** out);
TVS_API tvs_status tvs_series_save(const tvs_series* series, const char* path);
TVS_API tvs_status tvs_series_interpolate(const tvs_series* series, tvs_series** out);
TVS_API int64_t tvs_series_span_hours(const tvs_series* series);
TVS_API const char* tvs_series_channel(const tvs_series* series);
/* total impressions at an hour index, all 30 demographic cells */
TVS_API tvs_status tvs_series_total(const tvs_series* series, int64_t hour, double* out);
TVS_API void tvs_series_free(tvs_series* series);

/* --- panels and the synthetic generator -------------------------------- */

TVS_API tvs_status tvs_panel_load(const char* path, tvs_panel** out);
TVS_API tvs_status tvs_panel_save(const tvs_panel* panel, const char* path);
TVS_API uint32_t tvs_panel_viewer_count(const tvs_panel* panel);
TVS_API void tvs_panel_free(tvs_panel* panel);

/* Statistics-matched synthetic data; deterministic for a given seed. Either
 * output pointer may be NULL. */
TVS_API tvs_status tvs_generate(const char* config_json, uint64_t seed, tvs_series** series_out,
                                tvs_panel** panel_out);

/* --- spectral analysis -------------------------------------------------- */

TVS_API tvs_status tvs_series_analyze(const tvs_series* series, const char* options_json,
                                      tvs_analysis** out);
TVS_API int tvs_analysis_kept_modes(const tvs_analysis* analysis);
TVS_API double tvs_analysis_threshold(const tvs_analysis* analysis);
TVS_API tvs_status tvs_analysis_noise_fit(const tvs_analysis* analysis, double* normal_mu,
                                          double* normal_sigma, double* tls_mu,
                                          double* tls_sigma, double* tls_nu);
/* TVS_ERR_DOMAIN when fewer than two spikes were found */
TVS_API tvs_status tvs_analysis_spike_rate(const tvs_analysis* analysis, double* lambda_hat);
TVS_API void tvs_analysis_free(tvs_analysis* analysis);

/* --- subcommand pipelines ----------------------------------------------
 * File-driven runs; each writes its documented outputs into outdir. The CLI
 * is a thin wrapper over these. options_json may be NULL or "" for defaults.
 */

TVS_API tvs_status tvs_run_generate(const char* config_json, uint64_t seed, const char* outdir);
TVS_API tvs_status tvs_run_analyze(const char* series_csv, const char* options_json,
                                   const char* outdir);
TVS_API tvs_status tvs_run_forecast(const char* series_csv, const char* options_json,
                                    const char* outdir);
TVS_API tvs_status tvs_run_similarity(const char* series_csv, const char* options_json,
                                      const char* outdir);
TVS_API tvs_status tvs_run_schedule(const char* catalog_csv, const char* orders_json,
                                    const char* forecast_json, const char* solver_json,
                                    const char* outdir);
TVS_API tvs_status tvs_run_evaluate(const char* schedule_csv, const char* panel_csv,
                                    const char* orders_json, const char* options_json,
                                    const char* outdir);

#ifdef __cplusplus
}
#endif

#endif /* TVSCHED_TVSCHED_H */
