#pragma once

#include "core/viewdata.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tvsched {

struct Harmonic {
    double freq_per_day = 0; // cycles per day
    double amplitude = 0;    // in probability units
    double phase = 0;        // radians
};

struct OrderGenConfig {
    int count = 0;
    double target_fraction_lo = 0.002;
    double target_fraction_hi = 0.01;
    double budget_slack_lo = 1.2;
    double budget_slack_hi = 2.0;
    int max_cells = 6;
    double forbid_consecutive_prob = 0.2;
    double reach_target_prob = 0.0;
};

// Panel-based generator: every viewer has a fixed demographic cell and an
// hourly viewing probability
//   p(t) = base + sum_h A_h cos(2*pi*f_h*t/24 + phi_h) + spikes(t) + eta(t)
// with spike episodes arriving at exponential inter-arrival times and eta
// drawn iid from a t location-scale law.
struct GeneratorConfig {
    std::string channel_id = "ch1";
    HourStamp start = 0;
    int span_hours = 0;
    int viewer_count = 0;
    double base_probability = 0;
    std::vector<Harmonic> harmonics;
    double noise_mu = 0, noise_sigma = 0, noise_nu = 3; // tls noise on p(t)
    double spike_rate = 0;                              // events per hour
    double spike_magnitude = 0;                         // added to p(t)
    int spike_duration_hours = 2;
    std::vector<double> cell_weights; // 30 weights; empty = uniform
    double price_base = 50.0;
    double price_per_impression = 0.05;
    OrderGenConfig orders;
};

GeneratorConfig parse_generator_config(const std::string& json_text);

struct GeneratorResult {
    ViewershipSeries series;
    Panel panel;
    SlotCatalog catalog;
    std::vector<Order> orders;
    std::vector<double> spike_event_hours; // ground truth event times
};

GeneratorResult generate_synthetic(const GeneratorConfig& config, std::uint64_t seed);

} // namespace tvsched
