#pragma once

#include "core/viewdata.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tvsched {

struct SlotKey {
    std::string channel_id;
    int day_of_week = 0; // 0 = Monday .. 6 = Sunday
    int hour_of_day = 0; // 0..23

    auto operator<=>(const SlotKey&) const = default;
};

struct GaussianBelief {
    double mean = 0;
    double variance = 0;
};

// One belief per weekly slot; the observation noise sigma is shared and held
// fixed.
struct KalmanModel {
    std::map<SlotKey, GaussianBelief> beliefs;
    double obs_sigma = 0;
};

struct SigmaEstimate {
    double sigma = 0;   // floored value, safe for kalman_update
    double raw_min = 0; // smallest average bin deviation before the floor
    bool degenerate = false;
};

// Splits the history into each candidate number of contiguous bins, averages
// the per-bin standard deviations, and keeps the smallest average. A floor of
// 0.01 * mean(history) keeps the filter defined on degenerate histories.
SigmaEstimate estimate_observation_sigma(std::span<const double> history,
                                         std::span<const int> bin_counts);

GaussianBelief init_prior(std::span<const double> history);

GaussianBelief kalman_update(const GaussianBelief& belief, double observation, double obs_sigma);

double kalman_forecast(const KalmanModel& model, const SlotKey& key);

double rms_relative_error(std::span<const double> predicted, std::span<const double> actual);

double rrse(std::span<const double> predicted, std::span<const double> actual);

// --- 1-NN baseline ---

struct KnnRow {
    std::string program_id;
    int day_of_week = 0;
    int hour_of_day = 0;
    double impressions = 0;
};

struct KnnModel {
    std::vector<KnnRow> rows;
};

struct KnnQuery {
    std::string program_id;
    int day_of_week = 0;
    int hour_of_day = 0;
};

KnnModel knn1_train(std::vector<KnnRow> rows);
double knn1_predict(const KnnModel& model, const KnnQuery& query);

// --- demographic similarity ---

struct DemographicProfile {
    std::array<double, kCellCount> ratios{}; // l1-normalized
    double total = 0;
};

DemographicProfile demographic_profile(const ViewershipRecord& record);

double distance_score(const DemographicProfile& a, const DemographicProfile& b);
double similarity_dot(const DemographicProfile& a, const DemographicProfile& b);

enum class PairingCondition {
    all_random,
    same_day_hour,
    same_program_same_hour,
    same_program_same_day,
};

PairingCondition parse_pairing_condition(const std::string& name);
std::string pairing_condition_name(PairingCondition c);

// Mean distance score over n_pairs record pairs sampled (with replacement)
// under the condition; a record is never paired with itself.
double pairing_experiment(const ViewershipSeries& series, int n_pairs, PairingCondition condition,
                          std::uint64_t seed);

struct NewProgramPrediction {
    DemographicProfile profile;
    std::array<double, kCellCount> impressions{};
    double total_impressions = 0;
    std::vector<std::string> programs_used;
};

// Averages the per-cell impressions of the k candidate programs closest (by
// distance score) to the candidate pool's mean profile at the target weekly
// time.
NewProgramPrediction predict_new_program(const ViewershipSeries& history, int day_of_week,
                                         int hour_of_day, int k);

} // namespace tvsched
