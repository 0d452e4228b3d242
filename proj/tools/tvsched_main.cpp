// tvsched command-line tool. All functionality lives behind the C API in
// tvsched/tvsched.h; this binary only parses flags, assembles option JSON and
// reports results.
//
// Exit codes: 0 success, 1 domain/data error, 2 usage error.

#include <tvsched/tvsched.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        std::exit(1);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t env_seed() {
    const char* env = std::getenv("TVSCHED_SEED");
    if (!env) return 0;
    return std::strtoull(env, nullptr, 10);
}

int check(tvs_status status, const std::string& summary) {
    if (status != TVS_OK) {
        std::cerr << "error: " << tvs_last_error() << "\n";
        return 1;
    }
    std::cout << summary << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tvsched: linear-TV viewership forecasting and ad scheduling"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags like --seed may follow the subcommand

    std::uint64_t seed = env_seed();
    bool seed_given = false;
    app.add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t v) { seed = v; seed_given = true; },
           "RNG seed (default: TVSCHED_SEED env var or 0)")
        ->expected(1);

    // generate
    auto* gen = app.add_subcommand("generate", "emit synthetic viewership data");
    std::string gen_config, gen_out;
    gen->add_option("--config", gen_config, "generator config JSON")->required();
    gen->add_option("-o,--outdir", gen_out, "output directory")->required();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "spectral decomposition and noise analysis");
    std::string an_input, an_out, an_channel;
    double an_threshold = -1, an_threshold_pct = -1, an_spike_pct = 95;
    bool an_noise_spikes = false;
    int an_jobs = 1;
    analyze->add_option("--input", an_input, "viewership CSV")->required();
    analyze->add_option("--channel", an_channel, "channel to analyze");
    analyze->add_option("--threshold", an_threshold, "absolute amplitude threshold");
    analyze->add_option("--threshold-percentile", an_threshold_pct,
                        "percentile-of-|A| threshold (default 95)");
    analyze->add_option("--spike-percentile", an_spike_pct, "spike threshold percentile");
    analyze->add_flag("--spikes-on-noise", an_noise_spikes,
                      "detect spikes on the filtered noise instead of the raw series");
    analyze->add_option("--jobs", an_jobs, "internal parallelism cap");
    analyze->add_option("-o,--outdir", an_out, "output directory")->required();

    // forecast
    auto* fc = app.add_subcommand("forecast", "per-slot impression forecasts");
    std::string fc_input, fc_out, fc_channel, fc_method = "kalman", fc_slot;
    int fc_train = 20;
    fc->add_option("--input", fc_input, "viewership CSV")->required();
    fc->add_option("--method", fc_method, "kalman | knn1")
        ->check(CLI::IsMember({"kalman", "knn1"}));
    fc->add_option("--train-weeks", fc_train, "training weeks (default 20)");
    fc->add_option("--slot", fc_slot, "restrict to one weekly slot, DOW:HH");
    fc->add_option("--channel", fc_channel, "channel to forecast");
    fc->add_option("-o,--outdir", fc_out, "output directory")->required();

    // similarity
    auto* sim = app.add_subcommand("similarity", "demographic distance-score experiments");
    std::string sim_input, sim_out, sim_channel;
    int sim_pairs = 10000;
    std::vector<std::string> sim_conditions;
    sim->add_option("--input", sim_input, "viewership CSV")->required();
    sim->add_option("--pairs", sim_pairs, "pairs per condition");
    sim->add_option("--condition", sim_conditions,
                    "condition (repeatable): all_random, same_day_hour, "
                    "same_program_same_hour, same_program_same_day");
    sim->add_option("--channel", sim_channel, "channel to sample");
    sim->add_option("-o,--outdir", sim_out, "output directory")->required();

    // schedule
    auto* sched = app.add_subcommand("schedule", "revenue-maximizing ad schedule");
    std::string sc_slots, sc_orders, sc_forecasts, sc_config, sc_out;
    double sc_r = -1;
    long sc_time_limit = -1;
    int sc_mc = -1;
    sched->add_option("--slots", sc_slots, "slot catalog CSV")->required();
    sched->add_option("--orders", sc_orders, "orders JSON")->required();
    sched->add_option("--forecasts", sc_forecasts, "forecast JSON")->required();
    sched->add_option("--config", sc_config, "solver config JSON");
    sched->add_option("--time-limit-ms", sc_time_limit, "override solver time limit");
    sched->add_option("--mc-samples", sc_mc, "override Monte Carlo sample count");
    sched->add_option("--combine-weight-r", sc_r, "override W_COMB weight r");
    sched->add_option("-o,--outdir", sc_out, "output directory")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "reach and frequency of a schedule");
    std::string ev_schedule, ev_panel, ev_orders, ev_out;
    bool ev_stationary = false;
    ev->add_option("--schedule", ev_schedule, "schedule CSV")->required();
    ev->add_option("--panel", ev_panel, "panel CSV")->required();
    ev->add_option("--orders", ev_orders, "orders JSON")->required();
    ev->add_flag("--stationary", ev_stationary, "use the stationary lag compression");
    ev->add_option("-o,--outdir", ev_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 2;
    }

    if (gen->parsed()) {
        auto config = slurp(gen_config);
        return check(tvs_run_generate(config.c_str(), seed, gen_out.c_str()),
                     "generated synthetic data into " + gen_out + " (seed " +
                         std::to_string(seed) + ")");
    }

    if (analyze->parsed()) {
        json options;
        if (!an_channel.empty()) options["channel"] = an_channel;
        if (an_threshold >= 0) options["threshold"] = an_threshold;
        if (an_threshold_pct >= 0) options["threshold_percentile"] = an_threshold_pct;
        options["spike_percentile"] = an_spike_pct;
        options["spikes_on_noise"] = an_noise_spikes;
        options["jobs"] = an_jobs;
        options["seed"] = seed;
        return check(tvs_run_analyze(an_input.c_str(), options.dump().c_str(), an_out.c_str()),
                     "analysis written to " + an_out);
    }

    if (fc->parsed()) {
        json options;
        options["method"] = fc_method;
        options["train_weeks"] = fc_train;
        if (!fc_slot.empty()) options["slot"] = fc_slot;
        if (!fc_channel.empty()) options["channel"] = fc_channel;
        options["seed"] = seed;
        return check(tvs_run_forecast(fc_input.c_str(), options.dump().c_str(), fc_out.c_str()),
                     "forecast written to " + fc_out + "/forecast.json");
    }

    if (sim->parsed()) {
        json options;
        options["n_pairs"] = sim_pairs;
        if (!sim_conditions.empty()) options["conditions"] = sim_conditions;
        if (!sim_channel.empty()) options["channel"] = sim_channel;
        options["seed"] = seed;
        return check(tvs_run_similarity(sim_input.c_str(), options.dump().c_str(), sim_out.c_str()),
                     "similarity written to " + sim_out + "/similarity.json");
    }

    if (sched->parsed()) {
        json config = json::object();
        if (!sc_config.empty()) {
            try {
                config = json::parse(slurp(sc_config));
            } catch (const json::exception& e) {
                std::cerr << "error: " << sc_config << ": " << e.what() << "\n";
                return 1;
            }
        }
        if (sc_time_limit >= 0) config["time_limit_ms"] = sc_time_limit;
        if (sc_mc >= 0) config["mc_samples"] = sc_mc;
        if (sc_r >= 0) config["combine_weight_r"] = sc_r;
        if (seed_given || !config.contains("seed")) config["seed"] = seed;
        return check(tvs_run_schedule(sc_slots.c_str(), sc_orders.c_str(), sc_forecasts.c_str(),
                                      config.dump().c_str(), sc_out.c_str()),
                     "schedule written to " + sc_out);
    }

    if (ev->parsed()) {
        json options;
        options["stationary"] = ev_stationary;
        options["seed"] = seed;
        return check(tvs_run_evaluate(ev_schedule.c_str(), ev_panel.c_str(), ev_orders.c_str(),
                                      options.dump().c_str(), ev_out.c_str()),
                     "reach evaluation written to " + ev_out + "/reach.json");
    }

    std::cerr << app.help() << "\n";
    return 2;
}
