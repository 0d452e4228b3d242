#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/synth.hpp"
#include "core/viewdata.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <numeric>

using namespace tvsched;

namespace {

std::string row(const std::string& ts, const std::string& channel, const std::string& program,
                std::int64_t fill) {
    std::string line = ts + "," + channel + "," + program;
    for (int i = 0; i < kCellCount; ++i) line += "," + std::to_string(fill);
    return line + "\n";
}

std::string header() {
    std::string h = "timestamp,channel_id,program_id";
    for (int i = 0; i < kCellCount; ++i) h += "," + cell_label(cell_from_index(i));
    return h + "\n";
}

} // namespace

TEST_CASE("cells: indexing and labels round-trip") {
    CHECK(kCellCount == 30);
    for (int i = 0; i < kCellCount; ++i) {
        auto cell = cell_from_index(i);
        CHECK(cell_index(cell) == i);
        CHECK(cell_index(parse_cell(cell_label(cell))) == i);
    }
    CHECK(cell_label({Gender::male, 1}) == "M01");
    CHECK(cell_label({Gender::female, 15}) == "F15");
    CHECK_THROWS_AS(parse_cell("X01"), Error);
    CHECK_THROWS_AS(parse_cell("M16"), Error);
}

TEST_CASE("timeutil: parse and format") {
    auto t = parse_hour_stamp("2014-10-23T05:00");
    CHECK(format_hour_stamp(t) == "2014-10-23T05:00");
    CHECK(hour_of_day(t) == 5);
    CHECK(day_of_week(t) == 3); // 2014-10-23 was a Thursday
    CHECK_THROWS_AS(parse_hour_stamp("2014-10-23 05:00"), Error);
    CHECK_THROWS_AS(parse_hour_stamp("2014-10-23T05:30"), Error);
}

TEST_CASE("load_viewership: three valid rows") {
    testutil::TempDir tmp;
    std::string csv = header() + row("2014-10-23T05:00", "ch1", "p1", 1) +
                      row("2014-10-23T06:00", "ch1", "p1", 2) +
                      row("2014-10-23T07:00", "ch1", "p2", 3);
    testutil::write_file(tmp.file("series.csv"), csv);
    auto series = load_viewership(tmp.file("series.csv"));
    CHECK(series.span_hours() == 3);
    CHECK(series.channel_id == "ch1");
    CHECK(series.records[0].total() == 30);
    CHECK(series.records[2].total() == 90);
}

TEST_CASE("load_viewership: absent hour becomes a missing record") {
    testutil::TempDir tmp;
    std::string csv = header() + row("2014-10-23T05:00", "ch1", "p1", 1) +
                      row("2014-10-23T07:00", "ch1", "p2", 3);
    testutil::write_file(tmp.file("series.csv"), csv);
    auto series = load_viewership(tmp.file("series.csv"));
    REQUIRE(series.span_hours() == 3);
    CHECK_FALSE(series.records[0].missing);
    CHECK(series.records[1].missing);
    CHECK_FALSE(series.records[2].missing);
}

TEST_CASE("load_viewership: negative count reports the line number") {
    testutil::TempDir tmp;
    std::string csv = header() + row("2014-10-23T05:00", "ch1", "p1", 1);
    csv += "2014-10-23T06:00,ch1,p1";
    for (int i = 0; i < kCellCount; ++i) csv += ",-2";
    csv += "\n";
    testutil::write_file(tmp.file("series.csv"), csv);
    try {
        load_viewership(tmp.file("series.csv"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
        CHECK(e.code() == ErrorCode::parse);
    }
}

TEST_CASE("load_viewership: unknown demographic column rejected") {
    testutil::TempDir tmp;
    std::string h = "timestamp,channel_id,program_id";
    for (int i = 0; i < kCellCount - 1; ++i) h += "," + cell_label(cell_from_index(i));
    h += ",X99\n";
    testutil::write_file(tmp.file("series.csv"), h + row("2014-10-23T05:00", "ch1", "p1", 1));
    CHECK_THROWS_AS(load_viewership(tmp.file("series.csv")), Error);
}

TEST_CASE("save/load round-trip is identity") {
    testutil::TempDir tmp;
    GeneratorConfig cfg;
    cfg.span_hours = 72;
    cfg.viewer_count = 40;
    cfg.base_probability = 0.4;
    cfg.start = parse_hour_stamp("2014-10-23T00:00");
    auto gen = generate_synthetic(cfg, 11);
    save_viewership(gen.series, tmp.file("series.csv"));
    auto loaded = load_viewership(tmp.file("series.csv"));
    REQUIRE(loaded.span_hours() == gen.series.span_hours());
    for (std::size_t i = 0; i < loaded.records.size(); ++i) {
        CHECK(loaded.records[i].timestamp == gen.series.records[i].timestamp);
        CHECK(loaded.records[i].program_id == gen.series.records[i].program_id);
        CHECK(loaded.records[i].counts == gen.series.records[i].counts);
    }

    save_viewership(loaded, tmp.file("series2.csv"));
    CHECK(testutil::read_file(tmp.file("series.csv")) == testutil::read_file(tmp.file("series2.csv")));
}

TEST_CASE("interpolate_missing: midpoint and equal spacing") {
    ViewershipSeries series;
    series.channel_id = "ch1";
    auto rec = [&](std::int64_t t, std::int64_t v, bool missing) {
        ViewershipRecord r;
        r.timestamp = t;
        r.missing = missing;
        if (!missing) r.counts.fill(v);
        return r;
    };
    SUBCASE("10, missing, 20 -> 15") {
        series.records = {rec(0, 10, false), rec(1, 0, true), rec(2, 20, false)};
        auto out = interpolate_missing(series);
        CHECK(out.records[1].counts[0] == 15);
        CHECK_FALSE(out.records[1].missing);
    }
    SUBCASE("10, missing, missing, 40 -> 20 and 30") {
        series.records = {rec(0, 10, false), rec(1, 0, true), rec(2, 0, true), rec(3, 40, false)};
        auto out = interpolate_missing(series);
        CHECK(out.records[1].counts[7] == 20);
        CHECK(out.records[2].counts[7] == 30);
    }
    SUBCASE("no missing records -> identical") {
        series.records = {rec(0, 10, false), rec(1, 20, false)};
        auto out = interpolate_missing(series);
        for (std::size_t i = 0; i < series.records.size(); ++i)
            CHECK(out.records[i].counts == series.records[i].counts);
    }
    SUBCASE("idempotent") {
        series.records = {rec(0, 10, false), rec(1, 0, true), rec(2, 21, false)};
        auto once = interpolate_missing(series);
        auto twice = interpolate_missing(once);
        for (std::size_t i = 0; i < once.records.size(); ++i)
            CHECK(once.records[i].counts == twice.records[i].counts);
    }
    SUBCASE("missing boundary is an error") {
        series.records = {rec(0, 0, true), rec(1, 20, false)};
        CHECK_THROWS_AS(interpolate_missing(series), Error);
    }
}

TEST_CASE("aggregate_impressions") {
    ViewershipRecord rec;
    rec.counts.fill(1);
    CHECK(aggregate_impressions(rec, CellMask::all()) == 30);

    ViewershipRecord single;
    single.counts[cell_index({Gender::female, 7})] = 7;
    CellMask mask;
    mask.add({Gender::female, 7});
    CHECK(aggregate_impressions(single, mask) == 7);

    ViewershipRecord pair;
    pair.counts[0] = 3;
    pair.counts[17] = 4;
    CellMask two;
    two.add(cell_from_index(0));
    two.add(cell_from_index(17));
    CHECK(aggregate_impressions(pair, two) == 7);

    CHECK_THROWS_AS(aggregate_impressions(rec, CellMask{}), Error);

    // full mask equals the record total
    Rng rng(5);
    ViewershipRecord random;
    for (auto& c : random.counts) c = rng.uniform_int(0, 50);
    CHECK(aggregate_impressions(random, CellMask::all()) == random.total());
}

TEST_CASE("generate_synthetic: flat base gives Bernoulli mean") {
    GeneratorConfig cfg;
    cfg.span_hours = 2000;
    cfg.viewer_count = 500;
    cfg.base_probability = 0.3;
    auto gen = generate_synthetic(cfg, 3);
    double mean = 0;
    for (const auto& rec : gen.series.records) mean += static_cast<double>(rec.total());
    mean /= static_cast<double>(gen.series.records.size());
    double expect = 0.3 * 500;                       // 150
    double se = std::sqrt(0.3 * 0.7 * 500 / 2000.0); // se of the mean over hours
    CHECK(std::abs(mean - expect) < 5 * se);
}

TEST_CASE("generate_synthetic: deterministic given seed") {
    GeneratorConfig cfg;
    cfg.span_hours = 100;
    cfg.viewer_count = 50;
    cfg.base_probability = 0.2;
    cfg.spike_rate = 0.02;
    cfg.spike_magnitude = 0.3;
    auto a = generate_synthetic(cfg, 42);
    auto b = generate_synthetic(cfg, 42);
    REQUIRE(a.series.records.size() == b.series.records.size());
    for (std::size_t i = 0; i < a.series.records.size(); ++i)
        CHECK(a.series.records[i].counts == b.series.records[i].counts);
    CHECK(a.panel.viewers == b.panel.viewers);
    CHECK(a.spike_event_hours == b.spike_event_hours);

    auto c = generate_synthetic(cfg, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.series.records.size(); ++i)
        if (a.series.records[i].counts != c.series.records[i].counts) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("generate_synthetic: panel events equal series counts") {
    GeneratorConfig cfg;
    cfg.span_hours = 300;
    cfg.viewer_count = 200;
    cfg.base_probability = 0.25;
    cfg.harmonics = {{1.0, 0.1, 0.0}};
    auto gen = generate_synthetic(cfg, 9);
    REQUIRE(gen.panel.slot_ids.size() == gen.series.records.size());
    for (std::size_t t = 0; t < gen.series.records.size(); ++t) {
        CHECK(static_cast<std::int64_t>(gen.panel.viewers[t].size()) ==
              gen.series.records[t].total());
    }
}

TEST_CASE("generate_synthetic: spike count matches the Poisson rate over 100 seeds") {
    GeneratorConfig cfg;
    cfg.span_hours = 6551;
    cfg.viewer_count = 1;
    cfg.base_probability = 0.0;
    cfg.spike_rate = 0.015;
    cfg.spike_magnitude = 0.5;
    double total = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s)
        total += static_cast<double>(generate_synthetic(cfg, 1000 + s).spike_event_hours.size());
    double mean = total / seeds;
    double expect = 0.015 * 6551; // ~98.3
    double se = std::sqrt(expect / seeds);
    CHECK(std::abs(mean - expect) < 3 * se);
}

TEST_CASE("generate_synthetic: probability out of range reports the hour") {
    GeneratorConfig cfg;
    cfg.span_hours = 50;
    cfg.viewer_count = 10;
    cfg.base_probability = 0.9;
    cfg.harmonics = {{1.0, 0.5, 0.0}}; // pushes p above 1 at t = 0
    try {
        generate_synthetic(cfg, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("hour") != std::string::npos);
    }
}

TEST_CASE("orders and catalog files round-trip") {
    testutil::TempDir tmp;
    std::vector<Order> orders(2);
    orders[0].order_id = "ord1";
    orders[0].budget = 1000;
    orders[0].target_impressions = 500;
    orders[0].demographics.add({Gender::male, 7});
    orders[0].demographics.add({Gender::female, 7});
    orders[0].forbid_consecutive = true;
    orders[1].order_id = "ord2";
    orders[1].budget = 70.5;
    orders[1].target_impressions = 10;
    orders[1].demographics.add({Gender::female, 15});
    orders[1].reach_target = 8;
    save_orders(orders, tmp.file("orders.json"));
    auto loaded = load_orders(tmp.file("orders.json"));
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].order_id == "ord1");
    CHECK(loaded[0].demographics == orders[0].demographics);
    CHECK(loaded[0].forbid_consecutive);
    CHECK(loaded[1].reach_target == 8.0);

    SlotCatalog catalog;
    catalog.slots = {{"ch1", 1, parse_hour_stamp("2014-10-23T05:00"), 10.5},
                     {"ch1", 2, parse_hour_stamp("2014-10-23T06:00"), 20.0}};
    save_catalog(catalog, tmp.file("catalog.csv"));
    auto cat = load_catalog(tmp.file("catalog.csv"));
    REQUIRE(cat.slots.size() == 2);
    CHECK(cat.slots[1].price == 20.0);

    // non-contiguous slot indices rejected
    catalog.slots[1].slot_index = 3;
    save_catalog(catalog, tmp.file("catalog2.csv"));
    CHECK_THROWS_AS(load_catalog(tmp.file("catalog2.csv")), Error);
}

TEST_CASE("orders: unknown keys and invariants rejected") {
    testutil::TempDir tmp;
    testutil::write_file(tmp.file("bad.json"),
                         R"([{"order_id":"x","budget":10,"target_impressions":5,)"
                         R"("demographics":["M01"],"surprise":1}])");
    CHECK_THROWS_AS(load_orders(tmp.file("bad.json")), Error);
    testutil::write_file(tmp.file("bad2.json"),
                         R"([{"order_id":"x","budget":-1,"target_impressions":5,)"
                         R"("demographics":["M01"]}])");
    CHECK_THROWS_AS(load_orders(tmp.file("bad2.json")), Error);
}

TEST_CASE("panel round-trip") {
    testutil::TempDir tmp;
    Panel panel;
    panel.slot_ids = {"ch1:1", "ch1:2"};
    panel.viewers = {{0, 2, 5}, {1, 2}};
    panel.viewer_count = 6;
    save_panel(panel, tmp.file("panel.csv"));
    auto loaded = load_panel(tmp.file("panel.csv"));
    REQUIRE(loaded.slot_ids.size() == 2);
    CHECK(loaded.viewers[0] == std::vector<std::uint32_t>{0, 2, 5});
    CHECK(loaded.viewers[1] == std::vector<std::uint32_t>{1, 2});
}
