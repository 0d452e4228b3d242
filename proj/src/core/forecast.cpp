#include "core/forecast.hpp"

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace tvsched {

namespace {

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double population_sd(std::span<const double> x) {
    double m = mean_of(x);
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

} // namespace

SigmaEstimate estimate_observation_sigma(std::span<const double> history,
                                         std::span<const int> bin_counts) {
    if (bin_counts.empty()) fail(ErrorCode::invalid_argument, "no bin counts given");
    int max_bins = *std::max_element(bin_counts.begin(), bin_counts.end());
    if (max_bins < 1) fail(ErrorCode::invalid_argument, "bin counts must be >= 1");
    if (history.size() < static_cast<std::size_t>(max_bins) * 2)
        fail(ErrorCode::invalid_argument, "history too short for requested bin counts");

    double best = std::numeric_limits<double>::infinity();
    for (int bins : bin_counts) {
        std::size_t base = history.size() / static_cast<std::size_t>(bins);
        if (base == 0) fail(ErrorCode::invalid_argument, "empty bin");
        double avg = 0;
        for (int b = 0; b < bins; ++b) {
            std::size_t lo = static_cast<std::size_t>(b) * base;
            std::size_t hi = (b == bins - 1) ? history.size() : lo + base; // last bin absorbs remainder
            avg += population_sd(history.subspan(lo, hi - lo));
        }
        avg /= static_cast<double>(bins);
        best = std::min(best, avg);
    }

    SigmaEstimate est;
    est.raw_min = best;
    double floor = 0.01 * std::abs(mean_of(history));
    est.degenerate = best <= floor;
    est.sigma = std::max(best, std::max(floor, 1e-9));
    return est;
}

GaussianBelief init_prior(std::span<const double> history) {
    if (history.size() < 2) fail(ErrorCode::invalid_argument, "prior needs >= 2 observations");
    double m = mean_of(history);
    double ss = 0;
    for (double v : history) ss += (v - m) * (v - m);
    double var = ss / static_cast<double>(history.size() - 1); // unbiased
    double floor = 0.01 * std::abs(m);
    var = std::max(var, std::max(floor * floor, 1e-12));
    return {m, var};
}

GaussianBelief kalman_update(const GaussianBelief& belief, double observation, double obs_sigma) {
    if (obs_sigma <= 0) fail(ErrorCode::invalid_argument, "obs_sigma must be > 0");
    double s2 = obs_sigma * obs_sigma;
    double v0 = belief.variance;
    GaussianBelief post;
    post.mean = (s2 * belief.mean + v0 * observation) / (v0 + s2);
    post.variance = 1.0 / (1.0 / v0 + 1.0 / s2);
    return post;
}

double kalman_forecast(const KalmanModel& model, const SlotKey& key) {
    auto it = model.beliefs.find(key);
    if (it == model.beliefs.end())
        fail(ErrorCode::domain, "no belief for slot " + key.channel_id + " dow=" +
                                    std::to_string(key.day_of_week) + " hour=" +
                                    std::to_string(key.hour_of_day));
    return it->second.mean;
}

double rms_relative_error(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size() || actual.empty())
        fail(ErrorCode::invalid_argument, "prediction/actual length mismatch");
    double ss = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] <= 0) fail(ErrorCode::domain, "actual values must be > 0");
        double r = (predicted[i] - actual[i]) / actual[i];
        ss += r * r;
    }
    return std::sqrt(ss / static_cast<double>(actual.size()));
}

double rrse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size() || actual.size() < 2)
        fail(ErrorCode::invalid_argument, "rrse needs equal lengths >= 2");
    double mean = mean_of(actual);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        num += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
        den += (mean - actual[i]) * (mean - actual[i]);
    }
    if (den == 0) fail(ErrorCode::domain, "rrse undefined for constant actuals");
    return std::sqrt(num / den);
}

KnnModel knn1_train(std::vector<KnnRow> rows) {
    if (rows.empty()) fail(ErrorCode::invalid_argument, "empty training set");
    return {std::move(rows)};
}

double knn1_predict(const KnnModel& model, const KnnQuery& query) {
    // nominal attributes contribute 1 on mismatch, hour contributes |dh|/24
    double best = std::numeric_limits<double>::infinity();
    const KnnRow* pick = nullptr;
    for (const auto& row : model.rows) {
        double d = 0;
        if (row.program_id != query.program_id) d += 1.0;
        if (row.day_of_week != query.day_of_week) d += 1.0;
        d += std::abs(row.hour_of_day - query.hour_of_day) / 24.0;
        if (d < best) { // strict: ties keep the earliest row
            best = d;
            pick = &row;
        }
    }
    return pick->impressions;
}

DemographicProfile demographic_profile(const ViewershipRecord& record) {
    DemographicProfile p;
    std::int64_t total = record.total();
    if (total <= 0) fail(ErrorCode::domain, "profile undefined for zero total impressions");
    p.total = static_cast<double>(total);
    for (int i = 0; i < kCellCount; ++i)
        p.ratios[static_cast<std::size_t>(i)] =
            static_cast<double>(record.counts[static_cast<std::size_t>(i)]) / p.total;
    return p;
}

double distance_score(const DemographicProfile& a, const DemographicProfile& b) {
    double ss = 0;
    for (int i = 0; i < kCellCount; ++i) {
        double d = a.ratios[static_cast<std::size_t>(i)] - b.ratios[static_cast<std::size_t>(i)];
        ss += d * d;
    }
    return std::sqrt(ss);
}

double similarity_dot(const DemographicProfile& a, const DemographicProfile& b) {
    double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < kCellCount; ++i) {
        double x = a.ratios[static_cast<std::size_t>(i)];
        double y = b.ratios[static_cast<std::size_t>(i)];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0 || nb == 0) fail(ErrorCode::domain, "similarity undefined for zero profiles");
    return dot / std::sqrt(na * nb);
}

PairingCondition parse_pairing_condition(const std::string& name) {
    if (name == "all_random") return PairingCondition::all_random;
    if (name == "same_day_hour") return PairingCondition::same_day_hour;
    if (name == "same_program_same_hour") return PairingCondition::same_program_same_hour;
    if (name == "same_program_same_day") return PairingCondition::same_program_same_day;
    fail(ErrorCode::invalid_argument, "unknown pairing condition '" + name + "'");
}

std::string pairing_condition_name(PairingCondition c) {
    switch (c) {
    case PairingCondition::all_random: return "all_random";
    case PairingCondition::same_day_hour: return "same_day_hour";
    case PairingCondition::same_program_same_hour: return "same_program_same_hour";
    case PairingCondition::same_program_same_day: return "same_program_same_day";
    }
    return "?";
}

double pairing_experiment(const ViewershipSeries& series, int n_pairs, PairingCondition condition,
                          std::uint64_t seed) {
    if (n_pairs <= 0) fail(ErrorCode::invalid_argument, "n_pairs must be > 0");

    struct Entry {
        std::size_t index;
        DemographicProfile profile;
        std::string program_id;
        int dow, hour;
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < series.records.size(); ++i) {
        const auto& rec = series.records[i];
        if (rec.missing || rec.total() <= 0) continue;
        entries.push_back({i, demographic_profile(rec), rec.program_id,
                           day_of_week(rec.timestamp), hour_of_day(rec.timestamp)});
    }
    if (entries.size() < 2) fail(ErrorCode::domain, "not enough records with impressions");

    auto matches = [&](const Entry& a, const Entry& b) {
        switch (condition) {
        case PairingCondition::all_random: return true;
        case PairingCondition::same_day_hour: return a.dow == b.dow && a.hour == b.hour;
        case PairingCondition::same_program_same_hour:
            return a.program_id == b.program_id && a.hour == b.hour;
        case PairingCondition::same_program_same_day:
            return a.program_id == b.program_id && a.dow == b.dow;
        }
        return false;
    };

    Rng rng(derive_seed(seed, "pairing"));
    double sum = 0;
    const int max_attempts = n_pairs * 1000;
    int attempts = 0;
    for (int k = 0; k < n_pairs; ++k) {
        for (;;) {
            if (++attempts > max_attempts)
                fail(ErrorCode::domain, "pairing condition '" + pairing_condition_name(condition) +
                                            "' unsatisfiable on this data");
            std::size_t i = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(entries.size()) - 1));
            std::size_t j = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(entries.size()) - 1));
            if (i == j) continue;
            if (!matches(entries[i], entries[j])) continue;
            sum += distance_score(entries[i].profile, entries[j].profile);
            break;
        }
    }
    return sum / static_cast<double>(n_pairs);
}

NewProgramPrediction predict_new_program(const ViewershipSeries& history, int day_of_week_target,
                                         int hour_of_day_target, int k) {
    if (k < 1) fail(ErrorCode::invalid_argument, "k must be >= 1");

    // candidate pool: programs with records at the target weekly time,
    // profiled by their mean per-cell impressions there
    struct Candidate {
        std::string program_id;
        std::array<double, kCellCount> mean_counts{};
        DemographicProfile profile;
    };
    std::map<std::string, std::pair<std::array<double, kCellCount>, int>> sums;
    for (const auto& rec : history.records) {
        if (rec.missing || rec.total() <= 0) continue;
        if (day_of_week(rec.timestamp) != day_of_week_target) continue;
        if (hour_of_day(rec.timestamp) != hour_of_day_target) continue;
        auto& [acc, count] = sums[rec.program_id];
        for (int i = 0; i < kCellCount; ++i)
            acc[static_cast<std::size_t>(i)] += static_cast<double>(rec.counts[static_cast<std::size_t>(i)]);
        count++;
    }
    if (sums.empty()) fail(ErrorCode::domain, "no candidate programs at the target time");

    std::vector<Candidate> candidates;
    std::array<double, kCellCount> pool_mean{};
    for (const auto& [pid, acc] : sums) {
        Candidate c;
        c.program_id = pid;
        double total = 0;
        for (int i = 0; i < kCellCount; ++i) {
            c.mean_counts[static_cast<std::size_t>(i)] =
                acc.first[static_cast<std::size_t>(i)] / static_cast<double>(acc.second);
            total += c.mean_counts[static_cast<std::size_t>(i)];
        }
        c.profile.total = total;
        for (int i = 0; i < kCellCount; ++i) {
            c.profile.ratios[static_cast<std::size_t>(i)] =
                c.mean_counts[static_cast<std::size_t>(i)] / total;
            pool_mean[static_cast<std::size_t>(i)] += c.mean_counts[static_cast<std::size_t>(i)];
        }
        candidates.push_back(std::move(c));
    }
    if (static_cast<int>(candidates.size()) < k)
        fail(ErrorCode::domain, "fewer than k candidate programs");

    DemographicProfile pool_profile;
    double pool_total = std::accumulate(pool_mean.begin(), pool_mean.end(), 0.0);
    pool_profile.total = pool_total;
    for (int i = 0; i < kCellCount; ++i)
        pool_profile.ratios[static_cast<std::size_t>(i)] =
            pool_mean[static_cast<std::size_t>(i)] / pool_total;

    std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        double da = distance_score(a.profile, pool_profile);
        double db = distance_score(b.profile, pool_profile);
        if (da != db) return da < db;
        return a.program_id < b.program_id; // ties by lower program id
    });

    NewProgramPrediction pred;
    for (int j = 0; j < k; ++j) {
        const auto& c = candidates[static_cast<std::size_t>(j)];
        pred.programs_used.push_back(c.program_id);
        for (int i = 0; i < kCellCount; ++i)
            pred.impressions[static_cast<std::size_t>(i)] +=
                c.mean_counts[static_cast<std::size_t>(i)] / static_cast<double>(k);
    }
    pred.total_impressions =
        std::accumulate(pred.impressions.begin(), pred.impressions.end(), 0.0);
    if (pred.total_impressions > 0) {
        pred.profile.total = pred.total_impressions;
        for (int i = 0; i < kCellCount; ++i)
            pred.profile.ratios[static_cast<std::size_t>(i)] =
                pred.impressions[static_cast<std::size_t>(i)] / pred.total_impressions;
    }
    return pred;
}

} // namespace tvsched
