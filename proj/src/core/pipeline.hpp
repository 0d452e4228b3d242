#pragma once

#include "core/forecast.hpp"
#include "core/scheduler.hpp"
#include "core/spectral.hpp"
#include "core/synth.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tvsched {

inline constexpr const char* kToolVersion = "0.1.0";

struct AnalyzeOptions {
    std::optional<std::string> channel;
    std::optional<double> threshold;  // absolute amplitude cut
    double threshold_percentile = 95; // used when no absolute cut is given
    double spike_percentile = 95;
    bool spikes_on_noise = false; // default: spikes on the raw series
    int jobs = 1;
    std::uint64_t seed = 0;
};

struct ForecastOptions {
    std::string method = "kalman"; // kalman | knn1
    int train_weeks = 20;
    std::optional<std::string> channel;
    std::optional<std::pair<int, int>> slot; // (day_of_week, hour)
    std::uint64_t seed = 0;
};

struct SimilarityOptions {
    int n_pairs = 10000;
    std::vector<PairingCondition> conditions; // empty = all four
    std::optional<std::string> channel;
    std::uint64_t seed = 0;
};

struct EvaluateOptions {
    bool stationary = false;
    std::uint64_t seed = 0;
};

AnalyzeOptions parse_analyze_options(const std::string& json_text);
ForecastOptions parse_forecast_options(const std::string& json_text);
SimilarityOptions parse_similarity_options(const std::string& json_text);
EvaluateOptions parse_evaluate_options(const std::string& json_text);

// Spectral analysis bundle for one series.
struct AnalysisResult {
    Spectrum spectrum;
    FilterResult filtered;
    NoiseFit noise;
    SpikeAnalysis spikes;
    double threshold = 0;
};

AnalysisResult analyze_series(const ViewershipSeries& series, const AnalyzeOptions& options);

// Each run_* executes one subcommand pipeline and writes its outputs (schemas
// in the README) into outdir. Every JSON output embeds
// {tool_version, seed, config_hash}.
void run_generate(const std::string& config_json_text, std::uint64_t seed,
                  const std::string& outdir);

void run_analyze(const std::string& series_csv, const AnalyzeOptions& options,
                 const std::string& outdir);

void run_forecast(const std::string& series_csv, const ForecastOptions& options,
                  const std::string& outdir);

void run_similarity(const std::string& series_csv, const SimilarityOptions& options,
                    const std::string& outdir);

void run_schedule(const std::string& catalog_csv, const std::string& orders_json,
                  const std::string& forecast_json, const SolverConfig& config,
                  const std::string& outdir);

void run_evaluate(const std::string& schedule_csv, const std::string& panel_csv,
                  const std::string& orders_json, const EvaluateOptions& options,
                  const std::string& outdir);

// schedule.csv rows (assigned slots only)
struct ScheduleRow {
    std::string channel_id;
    int slot_index = 0;
    HourStamp timestamp = 0;
    std::string order_id;
    double price = 0;
};

std::vector<ScheduleRow> load_schedule_csv(const std::string& path);

} // namespace tvsched
