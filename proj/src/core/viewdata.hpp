#pragma once

#include "core/cells.hpp"
#include "core/timeutil.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tvsched {

struct ViewershipRecord {
    HourStamp timestamp = 0;
    std::string program_id;
    std::array<std::int64_t, kCellCount> counts{};
    bool missing = false;

    std::int64_t total() const {
        std::int64_t sum = 0;
        for (auto c : counts) sum += c;
        return sum;
    }
};

// Hourly impressions for one channel, uniform 1-hour spacing. Gaps in the
// source file are materialized as records with missing=true.
struct ViewershipSeries {
    std::string channel_id;
    std::vector<ViewershipRecord> records;

    std::size_t span_hours() const { return records.size(); }
    HourStamp start() const { return records.empty() ? 0 : records.front().timestamp; }
};

struct Order {
    std::string order_id;
    double budget = 0;                    // B
    double target_impressions = 0;        // R
    CellMask demographics;                // V
    std::optional<double> reach_target;
    bool forbid_consecutive = false;
};

struct CatalogSlot {
    std::string channel_id;
    int slot_index = 0; // contiguous per channel, starting at 1
    HourStamp timestamp = 0;
    double price = 0;
};

struct SlotCatalog {
    std::vector<CatalogSlot> slots;
};

// Viewer-level viewing events. Slots are keyed "<channel_id>:<slot_index>";
// viewer lists are kept sorted for set operations.
struct Panel {
    std::vector<std::string> slot_ids;
    std::vector<std::vector<std::uint32_t>> viewers; // parallel to slot_ids, sorted
    std::uint32_t viewer_count = 0;

    std::optional<std::size_t> find_slot(const std::string& slot_id) const;
};

std::string make_slot_id(const std::string& channel_id, int slot_index);

// --- file ingestion / emission (schemas in README) ---

ViewershipSeries load_viewership(const std::string& path,
                                 const std::optional<std::string>& channel = std::nullopt);
std::vector<ViewershipSeries> load_viewership_all(const std::string& path);
void save_viewership(const ViewershipSeries& series, const std::string& path);

Panel load_panel(const std::string& path);
void save_panel(const Panel& panel, const std::string& path);

std::vector<Order> load_orders(const std::string& path);
void save_orders(const std::vector<Order>& orders, const std::string& path);

SlotCatalog load_catalog(const std::string& path);
void save_catalog(const SlotCatalog& catalog, const std::string& path);

// --- operations ---

// Per-cell linear interpolation of missing records, rounded half-up.
ViewershipSeries interpolate_missing(const ViewershipSeries& series);

std::int64_t aggregate_impressions(const ViewershipRecord& record, CellMask mask);

std::vector<double> total_series(const ViewershipSeries& series);

} // namespace tvsched
