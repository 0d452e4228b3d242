#pragma once

#include "core/viewdata.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tvsched {

// Airings of one advertisement on one channel, by ascending slot index.
struct CampaignAirings {
    std::string channel_id;
    std::vector<int> slot_indices;

    void validate() const;
};

// Repeat-viewing fractions P(i,i') = fraction of viewers of the later slot i'
// who also viewed the earlier slot i. Entries can be absent (empty audience);
// the stationary lag vector g(delta) is an optional fallback keyed by
// slot-index difference.
struct TwoSlotOverlap {
    std::vector<int> slot_indices;                     // ordered ascending
    std::vector<int> audience_size;                    // per slot, 0 = unknown slot
    std::vector<std::vector<std::optional<double>>> p; // p[i][j] for i < j (positions)
    std::vector<std::optional<double>> stationary;     // g[delta - 1]
    bool use_stationary = false;

    std::optional<double> at(std::size_t i, std::size_t j) const;
    std::optional<std::size_t> find(int slot_index) const;
};

TwoSlotOverlap estimate_overlap_from_panel(const Panel& panel, const std::string& channel_id,
                                           const std::vector<int>& slot_indices);

// g(delta) = mean of present P entries at slot-index lag delta.
std::vector<std::optional<double>> compress_stationary(const TwoSlotOverlap& overlap);

struct ExactReach {
    std::vector<double> new_impressions; // viewers seeing their first airing
    double total_impressions = 0;        // I
    double reach = 0;                    // R
    std::optional<double> frequency;     // I / R, absent when R = 0
};

ExactReach exact_reach_from_panel(const Panel& panel, const CampaignAirings& airings);

// Product-discount estimate under conditional independence:
//   S#_j = S_j * prod_{j' < j} (1 - P(j', j))
// The overlap must cover all airing pairs (stationary fallback permitted).
std::vector<double> estimate_new_impressions(const std::vector<double>& impressions,
                                             const TwoSlotOverlap& overlap,
                                             const CampaignAirings& airings);

// R(X) = sum_i X_i S_i prod_{i'<i} (1 - P(i',i) X_{i'}) over the overlap's
// slot list.
double reach_polynomial(const std::vector<int>& x, const std::vector<double>& impressions,
                        const TwoSlotOverlap& overlap);

// Means and standard deviations per airing (and airing pair), indexed by
// airing position.
struct UncertainInputs {
    std::vector<double> s_mean, s_sigma;
    std::vector<std::vector<double>> p_mean, p_sigma; // [j'][j], j' < j
};

// Small-noise variance of the reach estimate: independent fluctuations in the
// S and P inputs, first-order expansion.
double reach_variance(const UncertainInputs& inputs);

// sigma^2(F) ~= sigma^2(S)/R^2 + sigma^2(R) S^2 / R^4 with S the total mean
// impressions and R the mean reach.
double frequency_variance(const UncertainInputs& inputs, double sigma2_reach);

struct ReachEstimate {
    std::vector<double> new_impressions;
    double total_impressions = 0; // I
    double reach = 0;             // R estimate
    std::optional<double> exact_reach;
    std::optional<double> frequency; // from the estimate path
    double sigma_reach = 0;
    double sigma_frequency = 0;
    std::optional<bool> target_met_mean, target_met_2sigma;
};

// Full per-channel evaluation from a panel: overlaps and audiences estimated
// from the panel, sigma(S) = sqrt(S), sigma(P) from the binomial standard
// error.
ReachEstimate evaluate_airings_reach(const Panel& panel, const CampaignAirings& airings,
                                     bool use_stationary,
                                     std::optional<double> reach_target);

} // namespace tvsched
