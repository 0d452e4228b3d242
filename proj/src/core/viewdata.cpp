#include "core/viewdata.hpp"

#include "core/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace tvsched {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write " + path);
    return out;
}

std::string expected_viewership_header() {
    std::string h = "timestamp,channel_id,program_id";
    for (int i = 0; i < kCellCount; ++i) h += "," + cell_label(cell_from_index(i));
    return h;
}

[[noreturn]] void fail_line(const std::string& path, std::size_t line_no, const std::string& what) {
    fail(ErrorCode::parse, path + ":" + std::to_string(line_no) + ": " + what);
}

} // namespace

std::string make_slot_id(const std::string& channel_id, int slot_index) {
    return channel_id + ":" + std::to_string(slot_index);
}

std::optional<std::size_t> Panel::find_slot(const std::string& slot_id) const {
    for (std::size_t i = 0; i < slot_ids.size(); ++i)
        if (slot_ids[i] == slot_id) return i;
    return std::nullopt;
}

std::vector<ViewershipSeries> load_viewership_all(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::parse, path + ": empty file");
    // header is fixed; tolerate trailing \r only
    if (split_csv_line(line) != split_csv_line(expected_viewership_header()))
        fail(ErrorCode::parse, path + ":1: unexpected header (unknown or reordered columns)");

    std::map<std::string, std::vector<ViewershipRecord>> by_channel;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3 + kCellCount)
            fail_line(path, line_no, "expected " + std::to_string(3 + kCellCount) + " fields, got " +
                                         std::to_string(f.size()));
        ViewershipRecord rec;
        try {
            rec.timestamp = parse_hour_stamp(f[0]);
        } catch (const Error& e) {
            fail_line(path, line_no, e.what());
        }
        rec.program_id = f[2];
        for (int i = 0; i < kCellCount; ++i) {
            const std::string& s = f[3 + i];
            char* end = nullptr;
            long long v = std::strtoll(s.c_str(), &end, 10);
            if (s.empty() || end != s.c_str() + s.size())
                fail_line(path, line_no, "bad count '" + s + "'");
            if (v < 0) fail_line(path, line_no, "negative count " + std::to_string(v));
            rec.counts[i] = v;
        }
        by_channel[f[1]].push_back(rec);
    }

    std::vector<ViewershipSeries> result;
    for (auto& [channel, recs] : by_channel) {
        for (std::size_t i = 1; i < recs.size(); ++i)
            if (recs[i].timestamp <= recs[i - 1].timestamp)
                fail(ErrorCode::parse, path + ": non-monotone timestamps for channel " + channel +
                                           " at " + format_hour_stamp(recs[i].timestamp));
        ViewershipSeries series;
        series.channel_id = channel;
        // materialize gaps as missing records
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (i > 0) {
                for (HourStamp t = recs[i - 1].timestamp + 1; t < recs[i].timestamp; ++t) {
                    ViewershipRecord gap;
                    gap.timestamp = t;
                    gap.missing = true;
                    series.records.push_back(gap);
                }
            }
            series.records.push_back(recs[i]);
        }
        result.push_back(std::move(series));
    }
    return result;
}

ViewershipSeries load_viewership(const std::string& path, const std::optional<std::string>& channel) {
    auto all = load_viewership_all(path);
    if (all.empty()) fail(ErrorCode::parse, path + ": no data rows");
    if (channel) {
        for (auto& s : all)
            if (s.channel_id == *channel) return std::move(s);
        fail(ErrorCode::domain, path + ": channel '" + *channel + "' not present");
    }
    if (all.size() > 1)
        fail(ErrorCode::domain, path + ": multiple channels present, select one with --channel");
    return std::move(all.front());
}

void save_viewership(const ViewershipSeries& series, const std::string& path) {
    auto out = open_output(path);
    out << expected_viewership_header() << "\n";
    for (const auto& rec : series.records) {
        if (rec.missing) continue; // absent hours = missing
        out << format_hour_stamp(rec.timestamp) << ',' << series.channel_id << ',' << rec.program_id;
        for (auto c : rec.counts) out << ',' << c;
        out << "\n";
    }
}

Panel load_panel(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::parse, path + ": empty file");
    if (split_csv_line(line) != std::vector<std::string>{"slot_id", "viewer_id"})
        fail(ErrorCode::parse, path + ":1: expected header slot_id,viewer_id");

    Panel panel;
    std::map<std::string, std::vector<std::uint32_t>> by_slot;
    std::uint32_t max_viewer = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 2) fail_line(path, line_no, "expected 2 fields");
        char* end = nullptr;
        unsigned long v = std::strtoul(f[1].c_str(), &end, 10);
        if (f[1].empty() || end != f[1].c_str() + f[1].size())
            fail_line(path, line_no, "bad viewer_id '" + f[1] + "'");
        by_slot[f[0]].push_back(static_cast<std::uint32_t>(v));
        max_viewer = std::max(max_viewer, static_cast<std::uint32_t>(v));
    }
    for (auto& [slot, viewers] : by_slot) {
        std::sort(viewers.begin(), viewers.end());
        viewers.erase(std::unique(viewers.begin(), viewers.end()), viewers.end());
        panel.slot_ids.push_back(slot);
        panel.viewers.push_back(std::move(viewers));
    }
    panel.viewer_count = by_slot.empty() ? 0 : max_viewer + 1;
    return panel;
}

void save_panel(const Panel& panel, const std::string& path) {
    auto out = open_output(path);
    out << "slot_id,viewer_id\n";
    for (std::size_t i = 0; i < panel.slot_ids.size(); ++i)
        for (auto v : panel.viewers[i]) out << panel.slot_ids[i] << ',' << v << "\n";
}

std::vector<Order> load_orders(const std::string& path) {
    auto in = open_input(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, path + ": " + e.what());
    }
    if (!doc.is_array()) fail(ErrorCode::parse, path + ": expected a JSON array of orders");

    std::vector<Order> orders;
    for (const auto& item : doc) {
        static const std::vector<std::string> known = {
            "order_id", "budget", "target_impressions", "demographics", "reach_target",
            "forbid_consecutive"};
        for (auto it = item.begin(); it != item.end(); ++it)
            if (std::find(known.begin(), known.end(), it.key()) == known.end())
                fail(ErrorCode::parse, path + ": unknown order key '" + it.key() + "'");
        Order o;
        try {
            o.order_id = item.at("order_id").get<std::string>();
            o.budget = item.at("budget").get<double>();
            o.target_impressions = item.at("target_impressions").get<double>();
            for (const auto& cell : item.at("demographics"))
                o.demographics.add(parse_cell(cell.get<std::string>()));
            if (item.contains("reach_target")) o.reach_target = item["reach_target"].get<double>();
            if (item.contains("forbid_consecutive"))
                o.forbid_consecutive = item["forbid_consecutive"].get<bool>();
        } catch (const json::exception& e) {
            fail(ErrorCode::parse, path + ": order " + std::to_string(orders.size()) + ": " + e.what());
        }
        if (o.budget <= 0) fail(ErrorCode::domain, "order " + o.order_id + ": budget must be > 0");
        if (o.target_impressions <= 0)
            fail(ErrorCode::domain, "order " + o.order_id + ": target_impressions must be > 0");
        if (o.demographics.empty())
            fail(ErrorCode::domain, "order " + o.order_id + ": demographics must be non-empty");
        orders.push_back(std::move(o));
    }
    return orders;
}

void save_orders(const std::vector<Order>& orders, const std::string& path) {
    json arr = json::array();
    for (const auto& o : orders) {
        json item;
        item["order_id"] = o.order_id;
        item["budget"] = o.budget;
        item["target_impressions"] = o.target_impressions;
        json cells = json::array();
        for (int i = 0; i < kCellCount; ++i)
            if (o.demographics.contains(i)) cells.push_back(cell_label(cell_from_index(i)));
        item["demographics"] = cells;
        if (o.reach_target) item["reach_target"] = *o.reach_target;
        if (o.forbid_consecutive) item["forbid_consecutive"] = true;
        arr.push_back(item);
    }
    auto out = open_output(path);
    out << arr.dump(2) << "\n";
}

SlotCatalog load_catalog(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::parse, path + ": empty file");
    if (split_csv_line(line) != std::vector<std::string>{"channel_id", "slot_index", "timestamp", "price"})
        fail(ErrorCode::parse, path + ":1: expected header channel_id,slot_index,timestamp,price");

    SlotCatalog catalog;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 4) fail_line(path, line_no, "expected 4 fields");
        CatalogSlot slot;
        slot.channel_id = f[0];
        slot.slot_index = std::atoi(f[1].c_str());
        try {
            slot.timestamp = parse_hour_stamp(f[2]);
        } catch (const Error& e) {
            fail_line(path, line_no, e.what());
        }
        slot.price = std::atof(f[3].c_str());
        if (slot.price <= 0) fail_line(path, line_no, "price must be > 0");
        catalog.slots.push_back(std::move(slot));
    }

    // invariant: (channel, slot_index) unique and contiguous from 1
    std::map<std::string, std::vector<int>> per_channel;
    for (const auto& s : catalog.slots) per_channel[s.channel_id].push_back(s.slot_index);
    for (auto& [channel, idx] : per_channel) {
        std::sort(idx.begin(), idx.end());
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (idx[i] != static_cast<int>(i) + 1)
                fail(ErrorCode::domain,
                     path + ": channel " + channel + " slot indices not contiguous from 1");
    }
    return catalog;
}

void save_catalog(const SlotCatalog& catalog, const std::string& path) {
    auto out = open_output(path);
    out << "channel_id,slot_index,timestamp,price\n";
    char buf[32];
    for (const auto& s : catalog.slots) {
        std::snprintf(buf, sizeof(buf), "%.2f", s.price);
        out << s.channel_id << ',' << s.slot_index << ',' << format_hour_stamp(s.timestamp) << ','
            << buf << "\n";
    }
}

ViewershipSeries interpolate_missing(const ViewershipSeries& series) {
    if (series.records.empty()) return series;
    if (series.records.front().missing || series.records.back().missing)
        fail(ErrorCode::domain, "cannot interpolate: boundary record missing");

    ViewershipSeries out = series;
    std::size_t n = out.records.size();
    std::size_t i = 0;
    while (i < n) {
        if (!out.records[i].missing) {
            ++i;
            continue;
        }
        std::size_t lo = i - 1; // known non-missing (boundary checked above)
        std::size_t hi = i;
        while (out.records[hi].missing) ++hi;
        double span = static_cast<double>(hi - lo);
        for (std::size_t k = i; k < hi; ++k) {
            double w = static_cast<double>(k - lo) / span;
            for (int c = 0; c < kCellCount; ++c) {
                double v = (1.0 - w) * out.records[lo].counts[c] + w * out.records[hi].counts[c];
                out.records[k].counts[c] = static_cast<std::int64_t>(std::floor(v + 0.5));
            }
            out.records[k].program_id = out.records[lo].program_id;
            out.records[k].missing = false;
        }
        i = hi;
    }
    return out;
}

std::int64_t aggregate_impressions(const ViewershipRecord& record, CellMask mask) {
    if (mask.empty()) fail(ErrorCode::invalid_argument, "empty demographic mask");
    std::int64_t sum = 0;
    for (int i = 0; i < kCellCount; ++i)
        if (mask.contains(i)) sum += record.counts[i];
    return sum;
}

std::vector<double> total_series(const ViewershipSeries& series) {
    std::vector<double> out;
    out.reserve(series.records.size());
    for (const auto& rec : series.records) out.push_back(static_cast<double>(rec.total()));
    return out;
}

} // namespace tvsched
