#include "core/synth.hpp"

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tvsched {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return it.key() == k; }) == known.end())
            fail(ErrorCode::parse, where + ": unknown key '" + it.key() + "'");
}

} // namespace

GeneratorConfig parse_generator_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("generator config: ") + e.what());
    }
    check_keys(doc,
               {"channel_id", "start", "span_hours", "viewer_count", "base_probability",
                "harmonics", "noise", "spike_rate", "spike_magnitude", "spike_duration_hours",
                "cell_weights", "price_base", "price_per_impression", "orders"},
               "generator config");

    GeneratorConfig cfg;
    try {
        if (doc.contains("channel_id")) cfg.channel_id = doc["channel_id"].get<std::string>();
        if (doc.contains("start")) cfg.start = parse_hour_stamp(doc["start"].get<std::string>());
        cfg.span_hours = doc.at("span_hours").get<int>();
        cfg.viewer_count = doc.at("viewer_count").get<int>();
        cfg.base_probability = doc.at("base_probability").get<double>();
        if (doc.contains("harmonics")) {
            for (const auto& h : doc["harmonics"]) {
                check_keys(h, {"freq_per_day", "amplitude", "phase"}, "harmonics");
                Harmonic harm;
                harm.freq_per_day = h.at("freq_per_day").get<double>();
                harm.amplitude = h.at("amplitude").get<double>();
                if (h.contains("phase")) harm.phase = h["phase"].get<double>();
                cfg.harmonics.push_back(harm);
            }
        }
        if (doc.contains("noise")) {
            check_keys(doc["noise"], {"mu", "sigma", "nu"}, "noise");
            cfg.noise_mu = doc["noise"].value("mu", 0.0);
            cfg.noise_sigma = doc["noise"].value("sigma", 0.0);
            cfg.noise_nu = doc["noise"].value("nu", 3.0);
        }
        cfg.spike_rate = doc.value("spike_rate", 0.0);
        cfg.spike_magnitude = doc.value("spike_magnitude", 0.0);
        cfg.spike_duration_hours = doc.value("spike_duration_hours", 2);
        if (doc.contains("cell_weights"))
            cfg.cell_weights = doc["cell_weights"].get<std::vector<double>>();
        cfg.price_base = doc.value("price_base", 50.0);
        cfg.price_per_impression = doc.value("price_per_impression", 0.05);
        if (doc.contains("orders")) {
            const auto& o = doc["orders"];
            check_keys(o,
                       {"count", "target_fraction", "budget_slack", "max_cells",
                        "forbid_consecutive_prob", "reach_target_prob"},
                       "orders");
            cfg.orders.count = o.at("count").get<int>();
            if (o.contains("target_fraction")) {
                cfg.orders.target_fraction_lo = o["target_fraction"].at(0).get<double>();
                cfg.orders.target_fraction_hi = o["target_fraction"].at(1).get<double>();
            }
            if (o.contains("budget_slack")) {
                cfg.orders.budget_slack_lo = o["budget_slack"].at(0).get<double>();
                cfg.orders.budget_slack_hi = o["budget_slack"].at(1).get<double>();
            }
            cfg.orders.max_cells = o.value("max_cells", 6);
            cfg.orders.forbid_consecutive_prob = o.value("forbid_consecutive_prob", 0.2);
            cfg.orders.reach_target_prob = o.value("reach_target_prob", 0.0);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("generator config: ") + e.what());
    }

    if (cfg.span_hours <= 0) fail(ErrorCode::invalid_argument, "span_hours must be > 0");
    if (cfg.viewer_count <= 0) fail(ErrorCode::invalid_argument, "viewer_count must be > 0");
    if (cfg.spike_duration_hours <= 0)
        fail(ErrorCode::invalid_argument, "spike_duration_hours must be > 0");
    if (!cfg.cell_weights.empty() && static_cast<int>(cfg.cell_weights.size()) != kCellCount)
        fail(ErrorCode::invalid_argument, "cell_weights must have 30 entries");
    return cfg;
}

GeneratorResult generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
    const int T = cfg.span_hours;
    const int M = cfg.viewer_count;

    GeneratorResult out;

    // spike episodes; overlapping episodes merge rather than stack
    std::vector<double> boost(static_cast<std::size_t>(T), 0.0);
    if (cfg.spike_rate > 0) {
        Rng rng(derive_seed(seed, "spikes"));
        double t = rng.exponential(cfg.spike_rate);
        while (t < T) {
            out.spike_event_hours.push_back(t);
            int h0 = static_cast<int>(std::floor(t));
            for (int h = h0; h < std::min(T, h0 + cfg.spike_duration_hours); ++h)
                boost[static_cast<std::size_t>(h)] = cfg.spike_magnitude;
            t += rng.exponential(cfg.spike_rate);
        }
    }

    // hourly viewing probability
    std::vector<double> prob(static_cast<std::size_t>(T));
    {
        Rng noise_rng(derive_seed(seed, "noise"));
        for (int t = 0; t < T; ++t) {
            double p = cfg.base_probability + boost[static_cast<std::size_t>(t)];
            for (const auto& h : cfg.harmonics)
                p += h.amplitude *
                     std::cos(2.0 * std::numbers::pi * h.freq_per_day * t / 24.0 + h.phase);
            if (cfg.noise_sigma > 0)
                p += noise_rng.tls(cfg.noise_mu, cfg.noise_sigma, cfg.noise_nu);
            if (p < -1e-12 || p > 1.0 + 1e-12)
                fail(ErrorCode::domain, "viewing probability " + std::to_string(p) +
                                            " outside [0,1] at hour " + std::to_string(t));
            prob[static_cast<std::size_t>(t)] = std::clamp(p, 0.0, 1.0);
        }
    }

    // fixed demographic cell per viewer
    std::vector<int> viewer_cell(static_cast<std::size_t>(M));
    {
        Rng rng(derive_seed(seed, "cells"));
        std::vector<double> cum(kCellCount);
        double total = 0;
        for (int i = 0; i < kCellCount; ++i) {
            double w = cfg.cell_weights.empty() ? 1.0 : cfg.cell_weights[static_cast<std::size_t>(i)];
            if (w < 0) fail(ErrorCode::invalid_argument, "cell weights must be non-negative");
            total += w;
            cum[static_cast<std::size_t>(i)] = total;
        }
        if (total <= 0) fail(ErrorCode::invalid_argument, "cell weights sum to zero");
        for (int v = 0; v < M; ++v) {
            double u = rng.uniform() * total;
            int c = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
            viewer_cell[static_cast<std::size_t>(v)] = std::min(c, kCellCount - 1);
        }
    }

    // viewing events
    out.series.channel_id = cfg.channel_id;
    out.series.records.resize(static_cast<std::size_t>(T));
    out.panel.viewer_count = static_cast<std::uint32_t>(M);
    out.panel.slot_ids.resize(static_cast<std::size_t>(T));
    out.panel.viewers.resize(static_cast<std::size_t>(T));
    Rng view_rng(derive_seed(seed, "viewers"));
    for (int t = 0; t < T; ++t) {
        auto& rec = out.series.records[static_cast<std::size_t>(t)];
        rec.timestamp = cfg.start + t;
        int block = hour_of_day(rec.timestamp) / 3; // 3-hour program blocks, repeated daily
        rec.program_id = "prog_b" + std::to_string(block);
        auto& slot_viewers = out.panel.viewers[static_cast<std::size_t>(t)];
        out.panel.slot_ids[static_cast<std::size_t>(t)] = make_slot_id(cfg.channel_id, t + 1);
        double p = prob[static_cast<std::size_t>(t)];
        if (p <= 0.0) continue;
        for (int v = 0; v < M; ++v) {
            if (view_rng.uniform() < p) {
                slot_viewers.push_back(static_cast<std::uint32_t>(v));
                rec.counts[static_cast<std::size_t>(viewer_cell[static_cast<std::size_t>(v)])]++;
            }
        }
    }

    // slot catalog priced off realized impressions
    for (int t = 0; t < T; ++t) {
        const auto& rec = out.series.records[static_cast<std::size_t>(t)];
        CatalogSlot slot;
        slot.channel_id = cfg.channel_id;
        slot.slot_index = t + 1;
        slot.timestamp = rec.timestamp;
        double price = cfg.price_base + cfg.price_per_impression * static_cast<double>(rec.total());
        slot.price = std::max(0.01, std::round(price * 100.0) / 100.0);
        out.catalog.slots.push_back(std::move(slot));
    }

    // synthetic order book
    if (cfg.orders.count > 0) {
        Rng rng(derive_seed(seed, "orders"));
        double mean_price = 0;
        for (const auto& s : out.catalog.slots) mean_price += s.price;
        mean_price /= static_cast<double>(out.catalog.slots.size());
        for (int k = 0; k < cfg.orders.count; ++k) {
            Order o;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "ord%03d", k + 1);
            o.order_id = buf;
            int n_cells = static_cast<int>(rng.uniform_int(1, cfg.orders.max_cells));
            while (o.demographics.count() < n_cells)
                o.demographics.add(cell_from_index(static_cast<int>(rng.uniform_int(0, kCellCount - 1))));
            double masked_total = 0;
            for (const auto& rec : out.series.records)
                masked_total += static_cast<double>(aggregate_impressions(rec, o.demographics));
            double frac = rng.uniform(cfg.orders.target_fraction_lo, cfg.orders.target_fraction_hi);
            o.target_impressions = std::max(1.0, std::round(masked_total * frac));
            double slots_needed = o.target_impressions /
                                  std::max(1.0, masked_total / static_cast<double>(T));
            double slack = rng.uniform(cfg.orders.budget_slack_lo, cfg.orders.budget_slack_hi);
            o.budget = std::max(1.0, std::round(slots_needed * mean_price * slack * 100.0) / 100.0);
            o.forbid_consecutive = rng.bernoulli(cfg.orders.forbid_consecutive_prob);
            if (rng.bernoulli(cfg.orders.reach_target_prob))
                o.reach_target = std::round(0.8 * o.target_impressions);
            out.orders.push_back(std::move(o));
        }
    }

    return out;
}

} // namespace tvsched
