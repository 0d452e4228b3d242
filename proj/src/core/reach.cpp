#include "core/reach.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tvsched {

void CampaignAirings::validate() const {
    if (slot_indices.empty()) fail(ErrorCode::invalid_argument, "airings must be non-empty");
    for (std::size_t j = 1; j < slot_indices.size(); ++j)
        if (slot_indices[j] <= slot_indices[j - 1])
            fail(ErrorCode::invalid_argument, "airing slots must be strictly increasing");
}

std::optional<double> TwoSlotOverlap::at(std::size_t i, std::size_t j) const {
    if (i >= j || j >= slot_indices.size())
        fail(ErrorCode::invalid_argument, "overlap lookup requires positions i < j");
    if (auto direct = p[i][j]) return direct;
    if (use_stationary) {
        int lag = slot_indices[j] - slot_indices[i];
        if (lag >= 1 && static_cast<std::size_t>(lag) <= stationary.size())
            return stationary[static_cast<std::size_t>(lag - 1)];
    }
    return std::nullopt;
}

std::optional<std::size_t> TwoSlotOverlap::find(int slot_index) const {
    auto it = std::lower_bound(slot_indices.begin(), slot_indices.end(), slot_index);
    if (it == slot_indices.end() || *it != slot_index) return std::nullopt;
    return static_cast<std::size_t>(it - slot_indices.begin());
}

TwoSlotOverlap estimate_overlap_from_panel(const Panel& panel, const std::string& channel_id,
                                           const std::vector<int>& slot_indices) {
    TwoSlotOverlap overlap;
    overlap.slot_indices = slot_indices;
    std::sort(overlap.slot_indices.begin(), overlap.slot_indices.end());

    const std::size_t n = overlap.slot_indices.size();
    std::vector<const std::vector<std::uint32_t>*> audiences(n, nullptr);
    static const std::vector<std::uint32_t> kEmpty;
    for (std::size_t k = 0; k < n; ++k) {
        auto pos = panel.find_slot(make_slot_id(channel_id, overlap.slot_indices[k]));
        audiences[k] = pos ? &panel.viewers[*pos] : &kEmpty;
        overlap.audience_size.push_back(static_cast<int>(audiences[k]->size()));
    }

    overlap.p.assign(n, std::vector<std::optional<double>>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& later = *audiences[j];
            if (later.empty()) continue; // absent, not zero
            const auto& earlier = *audiences[i];
            std::size_t common = 0;
            for (std::size_t a = 0, b = 0; a < earlier.size() && b < later.size();) {
                if (earlier[a] < later[b])
                    ++a;
                else if (later[b] < earlier[a])
                    ++b;
                else {
                    ++common;
                    ++a;
                    ++b;
                }
            }
            overlap.p[i][j] = static_cast<double>(common) / static_cast<double>(later.size());
        }
    }
    return overlap;
}

std::vector<std::optional<double>> compress_stationary(const TwoSlotOverlap& overlap) {
    if (overlap.slot_indices.empty()) fail(ErrorCode::invalid_argument, "empty overlap");
    int max_lag = overlap.slot_indices.back() - overlap.slot_indices.front();
    std::vector<double> sums(static_cast<std::size_t>(std::max(0, max_lag)), 0.0);
    std::vector<int> counts(sums.size(), 0);
    for (std::size_t i = 0; i < overlap.slot_indices.size(); ++i) {
        for (std::size_t j = i + 1; j < overlap.slot_indices.size(); ++j) {
            if (!overlap.p[i][j]) continue;
            int lag = overlap.slot_indices[j] - overlap.slot_indices[i];
            sums[static_cast<std::size_t>(lag - 1)] += *overlap.p[i][j];
            counts[static_cast<std::size_t>(lag - 1)]++;
        }
    }
    std::vector<std::optional<double>> g(sums.size());
    for (std::size_t d = 0; d < sums.size(); ++d)
        if (counts[d] > 0) g[d] = sums[d] / counts[d];
    return g;
}

ExactReach exact_reach_from_panel(const Panel& panel, const CampaignAirings& airings) {
    airings.validate();
    ExactReach out;
    std::vector<std::uint32_t> seen; // sorted union of earlier audiences
    for (int slot : airings.slot_indices) {
        auto pos = panel.find_slot(make_slot_id(airings.channel_id, slot));
        if (!pos)
            fail(ErrorCode::domain,
                 "slot " + make_slot_id(airings.channel_id, slot) + " not present in panel");
        const auto& audience = panel.viewers[*pos];
        std::size_t fresh = 0;
        for (auto v : audience)
            if (!std::binary_search(seen.begin(), seen.end(), v)) ++fresh;
        out.new_impressions.push_back(static_cast<double>(fresh));
        out.total_impressions += static_cast<double>(audience.size());
        std::vector<std::uint32_t> merged;
        merged.reserve(seen.size() + audience.size());
        std::set_union(seen.begin(), seen.end(), audience.begin(), audience.end(),
                       std::back_inserter(merged));
        seen = std::move(merged);
    }
    out.reach = static_cast<double>(seen.size());
    if (out.reach > 0) out.frequency = out.total_impressions / out.reach;
    return out;
}

std::vector<double> estimate_new_impressions(const std::vector<double>& impressions,
                                             const TwoSlotOverlap& overlap,
                                             const CampaignAirings& airings) {
    airings.validate();
    if (impressions.size() != airings.slot_indices.size())
        fail(ErrorCode::invalid_argument, "impressions/airings length mismatch");

    std::vector<std::size_t> pos(airings.slot_indices.size());
    for (std::size_t j = 0; j < airings.slot_indices.size(); ++j) {
        auto p = overlap.find(airings.slot_indices[j]);
        if (!p) fail(ErrorCode::domain, "overlap does not cover airing slot " +
                                            std::to_string(airings.slot_indices[j]));
        pos[j] = *p;
    }

    std::vector<double> fresh(impressions.size());
    for (std::size_t j = 0; j < impressions.size(); ++j) {
        double factor = 1.0;
        for (std::size_t jp = 0; jp < j; ++jp) {
            auto pij = overlap.at(pos[jp], pos[j]);
            if (!pij)
                fail(ErrorCode::domain,
                     "no overlap entry for slots " + std::to_string(airings.slot_indices[jp]) +
                         "," + std::to_string(airings.slot_indices[j]) +
                         " and no stationary fallback");
            factor *= 1.0 - *pij;
        }
        fresh[j] = impressions[j] * factor;
    }
    return fresh;
}

double reach_polynomial(const std::vector<int>& x, const std::vector<double>& impressions,
                        const TwoSlotOverlap& overlap) {
    const std::size_t n = overlap.slot_indices.size();
    if (x.size() != n || impressions.size() != n)
        fail(ErrorCode::invalid_argument, "schedule vector dimensions do not match overlap");
    double reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!x[i]) continue;
        double term = impressions[i];
        for (std::size_t ip = 0; ip < i; ++ip) {
            if (!x[ip]) continue;
            auto pij = overlap.at(ip, i);
            if (!pij) fail(ErrorCode::domain, "missing overlap entry in reach polynomial");
            term *= 1.0 - *pij;
        }
        reach += term;
    }
    return reach;
}

double reach_variance(const UncertainInputs& inputs) {
    const std::size_t n = inputs.s_mean.size();
    double var = 0;
    // impression-noise term
    for (std::size_t j = 0; j < n; ++j) {
        double prod = 1.0;
        for (std::size_t jp = 0; jp < j; ++jp) {
            double q = 1.0 - inputs.p_mean[jp][j];
            prod *= q * q;
        }
        var += inputs.s_sigma[j] * inputs.s_sigma[j] * prod;
    }
    // overlap-noise term
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t jpp = 0; jpp < j; ++jpp) {
            double prod = 1.0;
            for (std::size_t jp = 0; jp < j; ++jp) {
                if (jp == jpp) continue;
                double q = 1.0 - inputs.p_mean[jp][j];
                prod *= q * q;
            }
            var += inputs.s_mean[j] * inputs.s_mean[j] * inputs.p_sigma[jpp][j] *
                   inputs.p_sigma[jpp][j] * prod;
        }
    }
    return var;
}

double frequency_variance(const UncertainInputs& inputs, double sigma2_reach) {
    const std::size_t n = inputs.s_mean.size();
    double s_total = 0, var_s = 0;
    for (std::size_t j = 0; j < n; ++j) {
        s_total += inputs.s_mean[j];
        var_s += inputs.s_sigma[j] * inputs.s_sigma[j];
    }
    // mean reach from the product-discount estimate at the means
    double mean_reach = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double prod = 1.0;
        for (std::size_t jp = 0; jp < j; ++jp) prod *= 1.0 - inputs.p_mean[jp][j];
        mean_reach += inputs.s_mean[j] * prod;
    }
    if (mean_reach <= 0) fail(ErrorCode::domain, "frequency variance undefined for zero reach");
    double r2 = mean_reach * mean_reach;
    return var_s / r2 + sigma2_reach * s_total * s_total / (r2 * r2);
}

ReachEstimate evaluate_airings_reach(const Panel& panel, const CampaignAirings& airings,
                                     bool use_stationary, std::optional<double> reach_target) {
    airings.validate();
    auto overlap = estimate_overlap_from_panel(panel, airings.channel_id, airings.slot_indices);
    if (use_stationary) {
        overlap.stationary = compress_stationary(overlap);
        overlap.use_stationary = true;
    }

    const std::size_t n = airings.slot_indices.size();
    UncertainInputs inputs;
    inputs.s_mean.resize(n);
    inputs.s_sigma.resize(n);
    inputs.p_mean.assign(n, std::vector<double>(n, 0.0));
    inputs.p_sigma.assign(n, std::vector<double>(n, 0.0));

    std::vector<double> impressions(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto pos = overlap.find(airings.slot_indices[j]);
        double s = static_cast<double>(overlap.audience_size[*pos]);
        impressions[j] = s;
        inputs.s_mean[j] = s;
        inputs.s_sigma[j] = std::sqrt(s); // Poisson-scale uncertainty on counts
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t jp = 0; jp < j; ++jp) {
            auto pij = overlap.at(jp, j);
            double pv = pij.value_or(0.0);
            inputs.p_mean[jp][j] = pv;
            int n_aud = overlap.audience_size[j];
            if (n_aud > 0)
                inputs.p_sigma[jp][j] = std::sqrt(pv * (1.0 - pv) / static_cast<double>(n_aud));
        }
    }

    ReachEstimate est;
    est.new_impressions = estimate_new_impressions(impressions, overlap, airings);
    for (std::size_t j = 0; j < n; ++j) {
        est.total_impressions += impressions[j];
        est.reach += est.new_impressions[j];
    }
    auto exact = exact_reach_from_panel(panel, airings);
    est.exact_reach = exact.reach;
    if (est.reach > 0) est.frequency = est.total_impressions / est.reach;
    double var_r = reach_variance(inputs);
    est.sigma_reach = std::sqrt(var_r);
    if (est.reach > 0) est.sigma_frequency = std::sqrt(frequency_variance(inputs, var_r));
    if (reach_target) {
        est.target_met_mean = est.reach >= *reach_target;
        est.target_met_2sigma = est.reach - 2.0 * est.sigma_reach >= *reach_target;
    }
    return est;
}

} // namespace tvsched
