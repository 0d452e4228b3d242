#pragma once

#include "core/errors.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace tvsched {

// 30 demographic cells: 15 age bands x 2 genders. Column order in all files
// and count vectors is M01..M15 then F01..F15.
inline constexpr int kAgeBands = 15;
inline constexpr int kCellCount = 2 * kAgeBands;

enum class Gender { male, female };

struct DemographicCell {
    Gender gender;
    int band; // 1..15

    bool operator==(const DemographicCell&) const = default;
};

// Fixed age-band convention (the math only depends on the count).
inline constexpr std::array<const char*, kAgeBands> kBandLabels = {
    "2-5",   "6-8",   "9-11",  "12-14", "15-17", "18-20", "21-24", "25-29",
    "30-34", "35-39", "40-44", "45-49", "50-54", "55-64", "65+"};

inline int cell_index(DemographicCell cell) {
    return (cell.gender == Gender::male ? 0 : kAgeBands) + cell.band - 1;
}

inline DemographicCell cell_from_index(int index) {
    return {index < kAgeBands ? Gender::male : Gender::female, index % kAgeBands + 1};
}

inline std::string cell_label(DemographicCell cell) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%c%02d", cell.gender == Gender::male ? 'M' : 'F', cell.band);
    return buf;
}

inline DemographicCell parse_cell(const std::string& label) {
    if (label.size() == 3 && (label[0] == 'M' || label[0] == 'F')) {
        int band = (label[1] - '0') * 10 + (label[2] - '0');
        if (band >= 1 && band <= kAgeBands)
            return {label[0] == 'M' ? Gender::male : Gender::female, band};
    }
    fail(ErrorCode::parse, "unknown demographic cell '" + label + "'");
}

// Set of demographic cells as a 30-bit mask.
struct CellMask {
    std::uint32_t bits = 0;

    static CellMask all() { return {(1u << kCellCount) - 1}; }

    void add(DemographicCell cell) { bits |= 1u << cell_index(cell); }
    bool contains(int index) const { return (bits >> index) & 1u; }
    bool empty() const { return bits == 0; }
    int count() const { return __builtin_popcount(bits); }

    bool operator==(const CellMask&) const = default;
};

} // namespace tvsched
