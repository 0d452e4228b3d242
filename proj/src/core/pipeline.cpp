#include "core/pipeline.hpp"

#include "core/errors.hpp"
#include "core/reach.hpp"
#include "core/rng.hpp"
#include "core/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace tvsched {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void ensure_outdir(const std::string& outdir) {
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) fail(ErrorCode::io, "cannot create output directory " + outdir);
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json make_meta(std::uint64_t seed, const json& effective_config) {
    json meta;
    meta["tool_version"] = kToolVersion;
    meta["seed"] = seed;
    meta["config_hash"] = hex64(fnv1a64(effective_config.dump()));
    return meta;
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write " + path);
    out << doc.dump(2) << "\n";
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write " + path);
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

namespace {

json parse_options_json(const std::string& text, std::initializer_list<const char*> known,
                        const char* what) {
    json doc;
    try {
        doc = text.empty() ? json::object() : json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string(what) + ": " + e.what());
    }
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return it.key() == k; }) == known.end())
            fail(ErrorCode::parse, std::string(what) + ": unknown key '" + it.key() + "'");
    return doc;
}

} // namespace

AnalyzeOptions parse_analyze_options(const std::string& json_text) {
    auto doc = parse_options_json(json_text,
                                  {"channel", "threshold", "threshold_percentile",
                                   "spike_percentile", "spikes_on_noise", "jobs", "seed"},
                                  "analyze options");
    AnalyzeOptions o;
    if (doc.contains("channel")) o.channel = doc["channel"].get<std::string>();
    if (doc.contains("threshold")) o.threshold = doc["threshold"].get<double>();
    o.threshold_percentile = doc.value("threshold_percentile", o.threshold_percentile);
    o.spike_percentile = doc.value("spike_percentile", o.spike_percentile);
    o.spikes_on_noise = doc.value("spikes_on_noise", false);
    o.jobs = doc.value("jobs", 1);
    o.seed = doc.value("seed", 0ULL);
    if (o.jobs < 1) fail(ErrorCode::invalid_argument, "jobs must be >= 1");
    return o;
}

ForecastOptions parse_forecast_options(const std::string& json_text) {
    auto doc = parse_options_json(json_text, {"method", "train_weeks", "channel", "slot", "seed"},
                                  "forecast options");
    ForecastOptions o;
    o.method = doc.value("method", o.method);
    o.train_weeks = doc.value("train_weeks", o.train_weeks);
    if (doc.contains("channel")) o.channel = doc["channel"].get<std::string>();
    if (doc.contains("slot")) {
        std::string slot = doc["slot"].get<std::string>();
        auto colon = slot.find(':');
        if (colon == std::string::npos)
            fail(ErrorCode::parse, "slot must be DOW:HH (e.g. 0:20)");
        int dow = std::atoi(slot.substr(0, colon).c_str());
        int hour = std::atoi(slot.substr(colon + 1).c_str());
        if (dow < 0 || dow > 6 || hour < 0 || hour > 23)
            fail(ErrorCode::invalid_argument, "slot out of range (DOW 0-6, hour 0-23)");
        o.slot = {dow, hour};
    }
    o.seed = doc.value("seed", 0ULL);
    return o;
}

SimilarityOptions parse_similarity_options(const std::string& json_text) {
    auto doc = parse_options_json(json_text, {"n_pairs", "conditions", "channel", "seed"},
                                  "similarity options");
    SimilarityOptions o;
    o.n_pairs = doc.value("n_pairs", o.n_pairs);
    if (doc.contains("conditions"))
        for (const auto& name : doc["conditions"])
            o.conditions.push_back(parse_pairing_condition(name.get<std::string>()));
    if (doc.contains("channel")) o.channel = doc["channel"].get<std::string>();
    o.seed = doc.value("seed", 0ULL);
    return o;
}

EvaluateOptions parse_evaluate_options(const std::string& json_text) {
    auto doc = parse_options_json(json_text, {"stationary", "seed"}, "evaluate options");
    EvaluateOptions o;
    o.stationary = doc.value("stationary", false);
    o.seed = doc.value("seed", 0ULL);
    return o;
}

void run_generate(const std::string& config_json_text, std::uint64_t seed,
                  const std::string& outdir) {
    auto cfg = parse_generator_config(config_json_text);
    auto result = generate_synthetic(cfg, seed);
    ensure_outdir(outdir);

    save_viewership(result.series, outdir + "/series.csv");
    save_panel(result.panel, outdir + "/panel.csv");
    save_catalog(result.catalog, outdir + "/catalog.csv");
    if (!result.orders.empty()) save_orders(result.orders, outdir + "/orders.json");

    json truth;
    truth["meta"] = make_meta(seed, json::parse(config_json_text));
    truth["spike_event_hours"] = result.spike_event_hours;
    truth["spike_rate"] = cfg.spike_rate;
    truth["viewer_count"] = cfg.viewer_count;
    truth["span_hours"] = cfg.span_hours;
    write_json(outdir + "/truth.json", truth);
}

AnalysisResult analyze_series(const ViewershipSeries& series, const AnalyzeOptions& options) {
    AnalysisResult result;
    auto totals = total_series(series);
    result.spectrum = dft(totals, DftAlgorithm::automatic, options.jobs);

    if (options.threshold) {
        result.threshold = *options.threshold;
    } else {
        std::vector<double> mags;
        for (std::size_t j = 1; j < result.spectrum.coeff.size(); ++j)
            mags.push_back(std::abs(result.spectrum.coeff[j]));
        result.threshold = percentile(mags, options.threshold_percentile);
    }
    result.filtered = filter_by_threshold(result.spectrum, result.threshold);
    result.noise = fit_noise(result.filtered.noise);
    result.spikes = detect_spikes(options.spikes_on_noise
                                      ? std::span<const double>(result.filtered.noise)
                                      : std::span<const double>(totals),
                                  options.spike_percentile);
    return result;
}

void run_analyze(const std::string& series_csv, const AnalyzeOptions& options,
                 const std::string& outdir) {
    auto series = interpolate_missing(load_viewership(series_csv, options.channel));
    auto totals = total_series(series);
    auto analysis = analyze_series(series, options);
    const auto& spectrum = analysis.spectrum;
    const auto& filtered = analysis.filtered;
    double cut = analysis.threshold;

    json effective;
    effective["channel"] = series.channel_id;
    effective["threshold"] = cut;
    effective["spike_percentile"] = options.spike_percentile;
    effective["spikes_on_noise"] = options.spikes_on_noise;
    json meta = make_meta(options.seed, effective);

    ensure_outdir(outdir);

    {
        auto out = open_csv(outdir + "/spectrum.csv");
        out << "freq_per_day,magnitude\n";
        for (auto [freq, mag] : power_spectrum(spectrum))
            out << fmt(freq) << ',' << fmt(mag) << "\n";
    }
    {
        auto out = open_csv(outdir + "/filtered.csv");
        out << "t,signal,noise\n";
        for (std::size_t t = 0; t < totals.size(); ++t)
            out << t << ',' << fmt(filtered.signal[t]) << ',' << fmt(filtered.noise[t]) << "\n";
    }
    {
        const auto& fits = analysis.noise;
        json doc;
        doc["meta"] = meta;
        doc["threshold"] = cut;
        doc["kept_mode_count"] = filtered.kept_mode_count;
        doc["normal"] = {{"mu", fits.normal.mu},
                         {"sigma", fits.normal.sigma},
                         {"log_likelihood", fits.normal.degenerate ? json() : json(fits.normal.log_likelihood)}};
        doc["tls"] = {{"mu", fits.tls.mu},
                      {"sigma", fits.tls.sigma},
                      {"nu", fits.tls.nu},
                      {"log_likelihood", fits.tls.log_likelihood}};
        write_json(outdir + "/noisefit.json", doc);
    }
    {
        const auto& spikes = analysis.spikes;
        json doc;
        doc["meta"] = meta;
        doc["source"] = options.spikes_on_noise ? "noise" : "raw";
        doc["percentile"] = options.spike_percentile;
        doc["threshold"] = spikes.threshold_value;
        doc["spike_times"] = spikes.spike_times;
        doc["waiting_times"] = spikes.waiting_times;
        doc["lambda_hat"] = spikes.lambda_hat ? json(*spikes.lambda_hat) : json();
        write_json(outdir + "/spikes.json", doc);
    }
    {
        // weekly shape for external plotting: median and 90% band per weekly hour
        std::map<std::pair<int, int>, std::vector<double>> weekly;
        for (const auto& rec : series.records)
            weekly[{day_of_week(rec.timestamp), hour_of_day(rec.timestamp)}].push_back(
                static_cast<double>(rec.total()));
        auto out = open_csv(outdir + "/weekly.csv");
        out << "day_of_week,hour,median,p05,p95\n";
        for (auto& [key, values] : weekly) {
            out << key.first << ',' << key.second << ',' << fmt(percentile(values, 50)) << ','
                << fmt(percentile(values, 5)) << ',' << fmt(percentile(values, 95)) << "\n";
        }
    }
}

namespace {

struct WeeklySlotData {
    SlotKey key;
    std::vector<double> totals;                          // chronological weekly observations
    std::vector<std::array<double, kCellCount>> cells;   // per-observation counts
    std::vector<std::string> programs;
};

std::vector<WeeklySlotData> weekly_slots(const ViewershipSeries& series) {
    std::map<std::pair<int, int>, WeeklySlotData> by_slot;
    for (const auto& rec : series.records) {
        auto key = std::make_pair(day_of_week(rec.timestamp), hour_of_day(rec.timestamp));
        auto& slot = by_slot[key];
        slot.key = {series.channel_id, key.first, key.second};
        slot.totals.push_back(static_cast<double>(rec.total()));
        std::array<double, kCellCount> cells{};
        for (int i = 0; i < kCellCount; ++i)
            cells[static_cast<std::size_t>(i)] = static_cast<double>(rec.counts[static_cast<std::size_t>(i)]);
        slot.cells.push_back(cells);
        slot.programs.push_back(rec.program_id);
    }
    std::vector<WeeklySlotData> out;
    for (auto& [k, v] : by_slot) out.push_back(std::move(v));
    return out;
}

} // namespace

void run_forecast(const std::string& series_csv, const ForecastOptions& options,
                  const std::string& outdir) {
    if (options.method != "kalman" && options.method != "knn1")
        fail(ErrorCode::invalid_argument, "unknown forecast method '" + options.method + "'");
    if (options.train_weeks < 2) fail(ErrorCode::invalid_argument, "train_weeks must be >= 2");

    auto all = options.channel
                   ? std::vector<ViewershipSeries>{load_viewership(series_csv, options.channel)}
                   : load_viewership_all(series_csv);

    json effective;
    effective["method"] = options.method;
    effective["train_weeks"] = options.train_weeks;
    if (options.slot)
        effective["slot"] = std::to_string(options.slot->first) + ":" +
                            std::to_string(options.slot->second);
    json meta = make_meta(options.seed, effective);

    json slots_json = json::array();
    std::map<int, std::vector<double>> day_errors;

    const std::vector<int> bin_counts = {2, 3, 4, 5, 6, 7, 8, 9, 10};

    for (auto& raw : all) {
        auto series = interpolate_missing(raw);
        auto slots = weekly_slots(series);

        // knn training set: hourly rows from the training weeks
        KnnModel knn;
        if (options.method == "knn1") {
            std::vector<KnnRow> rows;
            for (const auto& slot : slots) {
                std::size_t n_train = std::min<std::size_t>(
                    slot.totals.size(), static_cast<std::size_t>(options.train_weeks));
                for (std::size_t w = 0; w < n_train; ++w)
                    rows.push_back({slot.programs[w], slot.key.day_of_week, slot.key.hour_of_day,
                                    slot.totals[w]});
            }
            knn = knn1_train(std::move(rows));
        }

        for (const auto& slot : slots) {
            if (options.slot && (slot.key.day_of_week != options.slot->first ||
                                 slot.key.hour_of_day != options.slot->second))
                continue;
            std::size_t n = slot.totals.size();
            std::size_t n_train = std::min<std::size_t>(n, static_cast<std::size_t>(options.train_weeks));
            if (n_train < 2) continue;

            std::span<const double> train(slot.totals.data(), n_train);

            json entry;
            entry["channel_id"] = slot.key.channel_id;
            entry["day_of_week"] = slot.key.day_of_week;
            entry["hour_of_day"] = slot.key.hour_of_day;
            entry["n_train"] = n_train;
            entry["n_test"] = n - n_train;

            std::vector<double> preds, actuals;
            if (options.method == "kalman") {
                std::vector<int> usable_bins;
                for (int b : bin_counts)
                    if (static_cast<std::size_t>(b) * 2 <= n_train) usable_bins.push_back(b);
                if (usable_bins.empty()) usable_bins.push_back(1);
                auto sigma = estimate_observation_sigma(train, usable_bins);
                auto belief = init_prior(train);
                for (std::size_t w = n_train; w < n; ++w) {
                    preds.push_back(belief.mean);
                    actuals.push_back(slot.totals[w]);
                    belief = kalman_update(belief, slot.totals[w], sigma.sigma);
                }
                entry["mean"] = belief.mean;
                entry["variance"] = belief.variance;
                entry["obs_sigma"] = sigma.sigma;
            } else {
                for (std::size_t w = n_train; w < n; ++w) {
                    preds.push_back(knn1_predict(knn, {slot.programs[w], slot.key.day_of_week,
                                                       slot.key.hour_of_day}));
                    actuals.push_back(slot.totals[w]);
                }
                entry["mean"] = knn1_predict(
                    knn, {slot.programs.back(), slot.key.day_of_week, slot.key.hour_of_day});
                entry["variance"] = json();
                entry["obs_sigma"] = json();
            }

            // relative errors only where the actual is positive
            std::vector<double> p2, a2;
            for (std::size_t i = 0; i < actuals.size(); ++i) {
                if (actuals[i] > 0) {
                    p2.push_back(preds[i]);
                    a2.push_back(actuals[i]);
                }
            }
            if (!a2.empty()) {
                double rms = rms_relative_error(p2, a2);
                entry["rms_rel_error"] = rms;
                for (std::size_t i = 0; i < a2.size(); ++i) {
                    double r = (p2[i] - a2[i]) / a2[i];
                    day_errors[slot.key.day_of_week].push_back(r);
                }
            } else {
                entry["rms_rel_error"] = json();
            }

            // demographic profile over the training weeks
            std::array<double, kCellCount> acc{};
            double total = 0;
            for (std::size_t w = 0; w < n_train; ++w)
                for (int i = 0; i < kCellCount; ++i) {
                    acc[static_cast<std::size_t>(i)] += slot.cells[w][static_cast<std::size_t>(i)];
                    total += slot.cells[w][static_cast<std::size_t>(i)];
                }
            json profile = json::array();
            for (int i = 0; i < kCellCount; ++i)
                profile.push_back(total > 0 ? acc[static_cast<std::size_t>(i)] / total : 1.0 / kCellCount);
            entry["profile"] = profile;

            slots_json.push_back(std::move(entry));
        }
    }

    json per_day;
    for (auto& [dow, errors] : day_errors) {
        double ss = 0;
        for (double e : errors) ss += e * e;
        per_day[std::to_string(dow)] = std::sqrt(ss / static_cast<double>(errors.size()));
    }

    json doc;
    doc["meta"] = meta;
    doc["method"] = options.method;
    doc["train_weeks"] = options.train_weeks;
    doc["slots"] = slots_json;
    doc["per_day_rms"] = per_day;
    ensure_outdir(outdir);
    write_json(outdir + "/forecast.json", doc);
}

void run_similarity(const std::string& series_csv, const SimilarityOptions& options,
                    const std::string& outdir) {
    auto series = interpolate_missing(load_viewership(series_csv, options.channel));
    auto conditions = options.conditions;
    if (conditions.empty())
        conditions = {PairingCondition::all_random, PairingCondition::same_day_hour,
                      PairingCondition::same_program_same_hour,
                      PairingCondition::same_program_same_day};

    json effective;
    effective["n_pairs"] = options.n_pairs;
    json names = json::array();
    for (auto c : conditions) names.push_back(pairing_condition_name(c));
    effective["conditions"] = names;

    json results;
    for (auto c : conditions)
        results[pairing_condition_name(c)] =
            pairing_experiment(series, options.n_pairs, c, options.seed);

    json doc;
    doc["meta"] = make_meta(options.seed, effective);
    doc["n_pairs"] = options.n_pairs;
    doc["mean_delta"] = results;
    ensure_outdir(outdir);
    write_json(outdir + "/similarity.json", doc);
}

namespace {

struct ForecastEntry {
    double mean = 0;
    std::array<double, kCellCount> profile{};
};

std::map<std::tuple<std::string, int, int>, ForecastEntry> load_forecast_json(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, path + ": " + e.what());
    }
    std::map<std::tuple<std::string, int, int>, ForecastEntry> out;
    try {
        for (const auto& entry : doc.at("slots")) {
            ForecastEntry fe;
            fe.mean = entry.at("mean").is_null() ? 0.0 : entry["mean"].get<double>();
            const auto& profile = entry.at("profile");
            for (int i = 0; i < kCellCount; ++i)
                fe.profile[static_cast<std::size_t>(i)] = profile.at(static_cast<std::size_t>(i)).get<double>();
            out[{entry.at("channel_id").get<std::string>(), entry.at("day_of_week").get<int>(),
                 entry.at("hour_of_day").get<int>()}] = fe;
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, path + ": " + e.what());
    }
    return out;
}

} // namespace

void run_schedule(const std::string& catalog_csv, const std::string& orders_json,
                  const std::string& forecast_json, const SolverConfig& config,
                  const std::string& outdir) {
    auto catalog = load_catalog(catalog_csv);
    auto orders = load_orders(orders_json);
    auto forecast = load_forecast_json(forecast_json);
    if (catalog.slots.empty()) fail(ErrorCode::domain, "catalog has no slots");
    if (orders.empty()) fail(ErrorCode::domain, "no orders to schedule");

    Instance instance;
    instance.slots = catalog.slots;
    std::sort(instance.slots.begin(), instance.slots.end(),
              [](const CatalogSlot& a, const CatalogSlot& b) {
                  if (a.channel_id != b.channel_id) return a.channel_id < b.channel_id;
                  return a.slot_index < b.slot_index;
              });
    instance.orders = orders;
    instance.impressions.assign(orders.size(), std::vector<double>(instance.slots.size(), 0.0));

    for (std::size_t i = 0; i < instance.slots.size(); ++i) {
        const auto& slot = instance.slots[i];
        auto it = forecast.find({slot.channel_id, day_of_week(slot.timestamp), hour_of_day(slot.timestamp)});
        if (it == forecast.end())
            fail(ErrorCode::domain, "forecast missing for slot " +
                                        make_slot_id(slot.channel_id, slot.slot_index));
        for (std::size_t a = 0; a < orders.size(); ++a) {
            double share = 0;
            for (int c = 0; c < kCellCount; ++c)
                if (orders[a].demographics.contains(c)) share += it->second.profile[static_cast<std::size_t>(c)];
            instance.impressions[a][i] = it->second.mean * share;
        }
    }

    auto report = triage_and_solve(instance, config);
    auto feas = check_feasible(instance, report.schedule);

    json effective;
    effective["time_limit_ms"] = config.time_limit_ms;
    effective["node_limit"] = config.node_limit;
    effective["lp_tolerance"] = config.lp_tolerance;
    effective["mc_samples"] = config.mc_samples;
    effective["combine_weight_r"] = config.combine_weight_r;
    if (config.mc_bernoulli_p) effective["mc_bernoulli_p"] = *config.mc_bernoulli_p;

    ensure_outdir(outdir);
    {
        auto out = open_csv(outdir + "/schedule.csv");
        out << "channel_id,slot_index,timestamp,order_id,price\n";
        char buf[32];
        for (std::size_t i = 0; i < instance.slots.size(); ++i) {
            int a = report.schedule.slot_order[i];
            if (a < 0) continue;
            const auto& slot = instance.slots[i];
            std::snprintf(buf, sizeof(buf), "%.2f", slot.price);
            out << slot.channel_id << ',' << slot.slot_index << ','
                << format_hour_stamp(slot.timestamp) << ','
                << instance.orders[static_cast<std::size_t>(a)].order_id << ',' << buf << "\n";
        }
    }
    {
        json doc;
        doc["meta"] = make_meta(config.seed, effective);
        doc["revenue"] = report.revenue;
        doc["lp_upper_bound"] = report.lp_upper_bound;
        doc["best_bound"] = report.best_bound;
        doc["proven_optimal"] = report.proven_optimal;
        doc["rounds"] = report.rounds;
        doc["nodes_explored"] = report.nodes_explored;
        doc["wall_time_ms"] = report.wall_time_ms;
        json accepted = json::array();
        for (const auto& id : report.accepted) {
            for (std::size_t a = 0; a < instance.orders.size(); ++a) {
                if (instance.orders[a].order_id != id) continue;
                json item;
                item["order_id"] = id;
                item["spend"] = feas.orders[a].spend;
                item["impressions"] = feas.orders[a].impressions;
                accepted.push_back(std::move(item));
            }
        }
        doc["accepted"] = accepted;
        json rejected = json::array();
        for (const auto& r : report.rejected)
            rejected.push_back({{"order_id", r.order_id}, {"reason", r.reason}});
        doc["rejected"] = rejected;
        json values = json::array();
        for (const auto& [id, w] : report.order_values)
            values.push_back({{"order_id", id}, {"w_comb", w}});
        doc["order_values"] = values;
        write_json(outdir + "/report.json", doc);
    }
}

std::vector<ScheduleRow> load_schedule_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::parse, path + ": empty file");
    std::vector<ScheduleRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ScheduleRow row;
        std::size_t p0 = 0;
        std::vector<std::string> fields;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(p0, i - p0));
                p0 = i + 1;
            }
        }
        if (fields.size() != 5)
            fail(ErrorCode::parse, path + ":" + std::to_string(line_no) + ": expected 5 fields");
        row.channel_id = fields[0];
        row.slot_index = std::atoi(fields[1].c_str());
        row.timestamp = parse_hour_stamp(fields[2]);
        row.order_id = fields[3];
        row.price = std::atof(fields[4].c_str());
        rows.push_back(std::move(row));
    }
    return rows;
}

void run_evaluate(const std::string& schedule_csv, const std::string& panel_csv,
                  const std::string& orders_json, const EvaluateOptions& options,
                  const std::string& outdir) {
    auto rows = load_schedule_csv(schedule_csv);
    auto panel = load_panel(panel_csv);
    auto orders = load_orders(orders_json);

    // airing slots per (order, channel)
    std::map<std::string, std::map<std::string, std::vector<int>>> airings;
    for (const auto& row : rows) airings[row.order_id][row.channel_id].push_back(row.slot_index);

    json effective;
    effective["stationary"] = options.stationary;

    json orders_out = json::array();
    for (const auto& order : orders) {
        json entry;
        entry["order_id"] = order.order_id;
        auto it = airings.find(order.order_id);
        if (it == airings.end()) {
            entry["airings"] = 0;
            entry["I"] = 0.0;
            entry["R_exact"] = 0.0;
            entry["R_estimate"] = 0.0;
            entry["F"] = json();
            entry["sigma_R"] = 0.0;
            entry["sigma_F"] = 0.0;
            if (order.reach_target) {
                entry["target"] = *order.reach_target;
                entry["target_met_mean"] = false;
                entry["target_met_2sigma"] = false;
            }
            orders_out.push_back(std::move(entry));
            continue;
        }

        // per channel, then summed (cross-channel overlap treated as zero)
        double total_i = 0, total_r = 0, total_exact = 0, var_r = 0, var_s = 0;
        int n_airings = 0;
        for (auto& [channel, slots] : it->second) {
            std::sort(slots.begin(), slots.end());
            CampaignAirings ca{channel, slots};
            auto est = evaluate_airings_reach(panel, ca, options.stationary, std::nullopt);
            total_i += est.total_impressions;
            total_r += est.reach;
            total_exact += est.exact_reach.value_or(0.0);
            var_r += est.sigma_reach * est.sigma_reach;
            var_s += est.total_impressions; // sigma(S) = sqrt(S) per airing
            n_airings += static_cast<int>(slots.size());
        }
        entry["airings"] = n_airings;
        entry["I"] = total_i;
        entry["R_exact"] = total_exact;
        entry["R_estimate"] = total_r;
        entry["F"] = total_r > 0 ? json(total_i / total_r) : json();
        entry["sigma_R"] = std::sqrt(var_r);
        double sigma_f = 0;
        if (total_r > 0) {
            double r2 = total_r * total_r;
            sigma_f = std::sqrt(var_s / r2 + var_r * total_i * total_i / (r2 * r2));
        }
        entry["sigma_F"] = sigma_f;
        if (order.reach_target) {
            entry["target"] = *order.reach_target;
            entry["target_met_mean"] = total_r >= *order.reach_target;
            entry["target_met_2sigma"] = total_r - 2.0 * std::sqrt(var_r) >= *order.reach_target;
        }
        orders_out.push_back(std::move(entry));
    }

    json doc;
    doc["meta"] = make_meta(options.seed, effective);
    doc["stationary"] = options.stationary;
    doc["orders"] = orders_out;
    ensure_outdir(outdir);
    write_json(outdir + "/reach.json", doc);
}

} // namespace tvsched
