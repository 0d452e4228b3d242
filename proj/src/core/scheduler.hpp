#pragma once

#include "core/lp.hpp"
#include "core/viewdata.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tvsched {

// BIP data: flattened slots (ordered by channel, then slot index), the order
// book, and the order x slot impressions matrix S.
struct Instance {
    std::vector<CatalogSlot> slots;
    std::vector<Order> orders;
    std::vector<std::vector<double>> impressions; // [order][slot]

    std::size_t slot_count() const { return slots.size(); }
    std::size_t order_count() const { return orders.size(); }

    // true when two flattened slots are consecutive on the same channel
    bool consecutive(std::size_t a, std::size_t b) const {
        return slots[a].channel_id == slots[b].channel_id &&
               std::abs(slots[a].slot_index - slots[b].slot_index) == 1;
    }

    void validate() const;
};

// Slot -> order assignment; the encoding makes the no-overlap constraint
// structural.
struct Schedule {
    std::vector<int> slot_order; // order index or -1

    static Schedule empty(std::size_t slot_count) { return {std::vector<int>(slot_count, -1)}; }
};

double revenue(const Instance& instance, const Schedule& schedule);

struct OrderCheck {
    std::string order_id;
    double spend = 0;
    double impressions = 0;
    bool budget_ok = true;
    bool impressions_ok = true; // enforced only when spend > 0
    bool consecutive_ok = true;
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<OrderCheck> orders;
    std::vector<std::string> violations;
};

FeasibilityReport check_feasible(const Instance& instance, const Schedule& schedule);

struct SolverConfig {
    long time_limit_ms = 120000;
    long node_limit = 200000;
    double lp_tolerance = 1e-7;
    long lp_iteration_limit = 500000;
    int mc_samples = 1000;
    std::optional<double> mc_bernoulli_p; // default: matched to the target, clamped [0.05, 0.5]
    double combine_weight_r = 0.0;        // r in W_COMB
    std::uint64_t seed = 0;
};

SolverConfig parse_solver_config(const std::string& json_text);

struct LpRelaxResult {
    bool feasible = false;
    bool iteration_limit = false;
    double bound = 0;
    std::vector<double> x; // flat: active-order position * slot_count + slot
};

// LP relaxation over the active orders only: per-slot occupancy <= 1, budget
// <= B and impressions >= R per active order, optional no-consecutive rows,
// 0 <= x <= 1. `fixed` pins individual variables (branching).
LpRelaxResult lp_relaxation(const Instance& instance, const std::vector<int>& active_orders,
                            const SolverConfig& config = {},
                            const std::vector<std::pair<int, int>>& fixed = {});

struct GreedyResult {
    Schedule schedule;
    std::vector<int> satisfied;
    std::vector<int> removed;
};

// Value-ratio greedy: repeatedly assign the (slot, order) pair with the
// largest (S/R)/(P/B) among affordable unmet orders, then drop incomplete
// orders, free their slots and repeat.
GreedyResult greedy_schedule(const Instance& instance);
GreedyResult greedy_schedule(const Instance& instance, const std::vector<int>& order_subset);

enum class SolveStatus {
    optimal,
    feasible,           // incumbent with a gap, limits hit
    infeasible,         // no integer assignment serves every active order
    limit_no_incumbent, // limits hit before any incumbent was found
};

struct BnbResult {
    SolveStatus status = SolveStatus::infeasible;
    Schedule schedule;
    double revenue = 0;
    double root_bound = 0;
    double best_bound = 0;
    long nodes = 0;
};

// Best-first branch and bound on the binary assignment variables, bounded by
// the LP relaxation, branching on the variable closest to 1/2, seeded with
// the greedy incumbent when none is supplied.
BnbResult branch_and_bound(const Instance& instance, const std::vector<int>& active_orders,
                           const SolverConfig& config,
                           const std::optional<Schedule>& incumbent = std::nullopt);

std::vector<int> prune_unreasonable(const Instance& instance, const std::vector<int>& orders);

double value_mc(const Instance& instance, int order, const SolverConfig& config);
double value_bid(const Instance& instance, int order, const SolverConfig& config);
double value_combined(double w_mc, double w_bid, double r);

struct Rejection {
    std::string order_id;
    std::string reason; // unreasonable | budget | triaged
};

struct SolveReport {
    Schedule schedule;
    double revenue = 0;
    std::vector<std::string> accepted;
    std::vector<Rejection> rejected;
    double lp_upper_bound = 0;
    double best_bound = 0;
    long nodes_explored = 0;
    double wall_time_ms = 0;
    bool proven_optimal = false;
    int rounds = 0;
    std::vector<std::pair<std::string, double>> order_values; // W_COMB per ranked order
};

// Ranks orders by W_COMB, then repeatedly solves, deactivating the
// lowest-valued active order after each infeasible round.
SolveReport triage_and_solve(const Instance& instance, const SolverConfig& config);

} // namespace tvsched
