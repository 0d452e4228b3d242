#include "tvsched/tvsched.h"

#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/reach.hpp"
#include "core/spectral.hpp"
#include "core/synth.hpp"
#include "core/viewdata.hpp"

#include <string>

using namespace tvsched;

struct tvs_series {
    ViewershipSeries series;
};
struct tvs_panel {
    Panel panel;
};
struct tvs_analysis {
    AnalysisResult analysis;
};

namespace {

thread_local std::string t_last_error = "ok";

tvs_status code_of(const Error& e) {
    switch (e.code()) {
    case ErrorCode::invalid_argument: return TVS_ERR_INVALID;
    case ErrorCode::io: return TVS_ERR_IO;
    case ErrorCode::parse: return TVS_ERR_PARSE;
    case ErrorCode::domain: return TVS_ERR_DOMAIN;
    case ErrorCode::infeasible: return TVS_ERR_INFEASIBLE;
    case ErrorCode::no_convergence: return TVS_ERR_NO_CONVERGENCE;
    }
    return TVS_ERR_INTERNAL;
}

template <typename Fn> tvs_status guarded(Fn&& fn) {
    try {
        fn();
        return TVS_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return code_of(e);
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return TVS_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return TVS_ERR_INTERNAL;
    }
}

tvs_status invalid(const char* message) {
    t_last_error = message;
    return TVS_ERR_INVALID;
}

std::string text_or_empty(const char* s) { return s ? std::string(s) : std::string(); }

} // namespace

extern "C" {

const char* tvs_version(void) { return kToolVersion; }

const char* tvs_last_error(void) { return t_last_error.c_str(); }

tvs_status tvs_series_load(const char* path, const char* channel, tvs_series** out) {
    if (!path || !out) return invalid("path and out must be non-null");
    return guarded([&] {
        auto handle = new tvs_series{load_viewership(
            path, channel ? std::optional<std::string>(channel) : std::nullopt)};
        *out = handle;
    });
}

tvs_status tvs_series_save(const tvs_series* series, const char* path) {
    if (!series || !path) return invalid("series and path must be non-null");
    return guarded([&] { save_viewership(series->series, path); });
}

tvs_status tvs_series_interpolate(const tvs_series* series, tvs_series** out) {
    if (!series || !out) return invalid("series and out must be non-null");
    return guarded([&] { *out = new tvs_series{interpolate_missing(series->series)}; });
}

int64_t tvs_series_span_hours(const tvs_series* series) {
    return series ? static_cast<int64_t>(series->series.span_hours()) : -1;
}

const char* tvs_series_channel(const tvs_series* series) {
    return series ? series->series.channel_id.c_str() : "";
}

tvs_status tvs_series_total(const tvs_series* series, int64_t hour, double* out) {
    if (!series || !out) return invalid("series and out must be non-null");
    if (hour < 0 || hour >= static_cast<int64_t>(series->series.span_hours()))
        return invalid("hour index out of range");
    *out = static_cast<double>(series->series.records[static_cast<std::size_t>(hour)].total());
    return TVS_OK;
}

void tvs_series_free(tvs_series* series) { delete series; }

tvs_status tvs_panel_load(const char* path, tvs_panel** out) {
    if (!path || !out) return invalid("path and out must be non-null");
    return guarded([&] { *out = new tvs_panel{load_panel(path)}; });
}

tvs_status tvs_panel_save(const tvs_panel* panel, const char* path) {
    if (!panel || !path) return invalid("panel and path must be non-null");
    return guarded([&] { save_panel(panel->panel, path); });
}

uint32_t tvs_panel_viewer_count(const tvs_panel* panel) {
    return panel ? panel->panel.viewer_count : 0;
}

void tvs_panel_free(tvs_panel* panel) { delete panel; }

tvs_status tvs_generate(const char* config_json, uint64_t seed, tvs_series** series_out,
                        tvs_panel** panel_out) {
    if (!config_json) return invalid("config_json must be non-null");
    return guarded([&] {
        auto result = generate_synthetic(parse_generator_config(config_json), seed);
        if (series_out) *series_out = new tvs_series{std::move(result.series)};
        if (panel_out) *panel_out = new tvs_panel{std::move(result.panel)};
    });
}

tvs_status tvs_series_analyze(const tvs_series* series, const char* options_json,
                              tvs_analysis** out) {
    if (!series || !out) return invalid("series and out must be non-null");
    return guarded([&] {
        auto options = parse_analyze_options(text_or_empty(options_json));
        auto interpolated = interpolate_missing(series->series);
        *out = new tvs_analysis{analyze_series(interpolated, options)};
    });
}

int tvs_analysis_kept_modes(const tvs_analysis* analysis) {
    return analysis ? analysis->analysis.filtered.kept_mode_count : -1;
}

double tvs_analysis_threshold(const tvs_analysis* analysis) {
    return analysis ? analysis->analysis.threshold : -1.0;
}

tvs_status tvs_analysis_noise_fit(const tvs_analysis* analysis, double* normal_mu,
                                  double* normal_sigma, double* tls_mu, double* tls_sigma,
                                  double* tls_nu) {
    if (!analysis) return invalid("analysis must be non-null");
    const auto& fit = analysis->analysis.noise;
    if (normal_mu) *normal_mu = fit.normal.mu;
    if (normal_sigma) *normal_sigma = fit.normal.sigma;
    if (tls_mu) *tls_mu = fit.tls.mu;
    if (tls_sigma) *tls_sigma = fit.tls.sigma;
    if (tls_nu) *tls_nu = fit.tls.nu;
    return TVS_OK;
}

tvs_status tvs_analysis_spike_rate(const tvs_analysis* analysis, double* lambda_hat) {
    if (!analysis || !lambda_hat) return invalid("analysis and lambda_hat must be non-null");
    if (!analysis->analysis.spikes.lambda_hat) {
        t_last_error = "fewer than two spikes: rate undefined";
        return TVS_ERR_DOMAIN;
    }
    *lambda_hat = *analysis->analysis.spikes.lambda_hat;
    return TVS_OK;
}

void tvs_analysis_free(tvs_analysis* analysis) { delete analysis; }

tvs_status tvs_run_generate(const char* config_json, uint64_t seed, const char* outdir) {
    if (!config_json || !outdir) return invalid("config_json and outdir must be non-null");
    return guarded([&] { run_generate(config_json, seed, outdir); });
}

tvs_status tvs_run_analyze(const char* series_csv, const char* options_json, const char* outdir) {
    if (!series_csv || !outdir) return invalid("series_csv and outdir must be non-null");
    return guarded([&] {
        run_analyze(series_csv, parse_analyze_options(text_or_empty(options_json)), outdir);
    });
}

tvs_status tvs_run_forecast(const char* series_csv, const char* options_json, const char* outdir) {
    if (!series_csv || !outdir) return invalid("series_csv and outdir must be non-null");
    return guarded([&] {
        run_forecast(series_csv, parse_forecast_options(text_or_empty(options_json)), outdir);
    });
}

tvs_status tvs_run_similarity(const char* series_csv, const char* options_json,
                              const char* outdir) {
    if (!series_csv || !outdir) return invalid("series_csv and outdir must be non-null");
    return guarded([&] {
        run_similarity(series_csv, parse_similarity_options(text_or_empty(options_json)), outdir);
    });
}

tvs_status tvs_run_schedule(const char* catalog_csv, const char* orders_json,
                            const char* forecast_json, const char* solver_json,
                            const char* outdir) {
    if (!catalog_csv || !orders_json || !forecast_json || !outdir)
        return invalid("catalog_csv, orders_json, forecast_json and outdir must be non-null");
    return guarded([&] {
        SolverConfig config = solver_json && *solver_json ? parse_solver_config(solver_json)
                                                          : SolverConfig{};
        run_schedule(catalog_csv, orders_json, forecast_json, config, outdir);
    });
}

tvs_status tvs_run_evaluate(const char* schedule_csv, const char* panel_csv,
                            const char* orders_json, const char* options_json,
                            const char* outdir) {
    if (!schedule_csv || !panel_csv || !orders_json || !outdir)
        return invalid("schedule_csv, panel_csv, orders_json and outdir must be non-null");
    return guarded([&] {
        run_evaluate(schedule_csv, panel_csv, orders_json,
                     parse_evaluate_options(text_or_empty(options_json)), outdir);
    });
}

} // extern "C"
