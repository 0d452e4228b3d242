#include "core/scheduler.hpp"

#include "core/errors.hpp"
#include "core/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

namespace tvsched {

using nlohmann::json;

void Instance::validate() const {
    if (impressions.size() != orders.size())
        fail(ErrorCode::invalid_argument, "impressions matrix has wrong order count");
    for (const auto& row : impressions) {
        if (row.size() != slots.size())
            fail(ErrorCode::invalid_argument, "impressions matrix has wrong slot count");
        for (double v : row)
            if (v < 0) fail(ErrorCode::invalid_argument, "impressions must be >= 0");
    }
    for (const auto& s : slots)
        if (s.price <= 0) fail(ErrorCode::invalid_argument, "prices must be > 0");
}

double revenue(const Instance& instance, const Schedule& schedule) {
    double total = 0;
    for (std::size_t i = 0; i < schedule.slot_order.size(); ++i)
        if (schedule.slot_order[i] >= 0) total += instance.slots[i].price;
    return total;
}

FeasibilityReport check_feasible(const Instance& instance, const Schedule& schedule) {
    if (schedule.slot_order.size() != instance.slot_count())
        fail(ErrorCode::invalid_argument, "schedule dimensions do not match instance");

    FeasibilityReport report;
    report.orders.resize(instance.order_count());
    for (std::size_t a = 0; a < instance.order_count(); ++a)
        report.orders[a].order_id = instance.orders[a].order_id;

    for (std::size_t i = 0; i < schedule.slot_order.size(); ++i) {
        int a = schedule.slot_order[i];
        if (a < 0) continue;
        if (a >= static_cast<int>(instance.order_count()))
            fail(ErrorCode::invalid_argument, "schedule references unknown order");
        report.orders[static_cast<std::size_t>(a)].spend += instance.slots[i].price;
        report.orders[static_cast<std::size_t>(a)].impressions +=
            instance.impressions[static_cast<std::size_t>(a)][i];
    }

    for (std::size_t a = 0; a < instance.order_count(); ++a) {
        auto& oc = report.orders[a];
        const Order& order = instance.orders[a];
        if (oc.spend > order.budget + 1e-9) {
            oc.budget_ok = false;
            report.violations.push_back(order.order_id + ": spend exceeds budget");
        }
        if (oc.spend > 0 && oc.impressions < order.target_impressions - 1e-9) {
            oc.impressions_ok = false;
            report.violations.push_back(order.order_id + ": impressions below target");
        }
        if (order.forbid_consecutive) {
            for (std::size_t i = 0; i + 1 < schedule.slot_order.size(); ++i) {
                if (schedule.slot_order[i] == static_cast<int>(a) &&
                    schedule.slot_order[i + 1] == static_cast<int>(a) &&
                    instance.consecutive(i, i + 1)) {
                    oc.consecutive_ok = false;
                    report.violations.push_back(order.order_id + ": consecutive airing");
                    break;
                }
            }
        }
    }
    report.feasible = report.violations.empty();
    return report;
}

SolverConfig parse_solver_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("solver config: ") + e.what());
    }
    static const std::vector<std::string> known = {
        "time_limit_ms", "node_limit",     "lp_tolerance",     "lp_iteration_limit",
        "mc_samples",    "mc_bernoulli_p", "combine_weight_r", "seed"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            fail(ErrorCode::parse, "solver config: unknown key '" + it.key() + "'");

    SolverConfig cfg;
    try {
        cfg.time_limit_ms = doc.value("time_limit_ms", cfg.time_limit_ms);
        cfg.node_limit = doc.value("node_limit", cfg.node_limit);
        cfg.lp_tolerance = doc.value("lp_tolerance", cfg.lp_tolerance);
        cfg.lp_iteration_limit = doc.value("lp_iteration_limit", cfg.lp_iteration_limit);
        cfg.mc_samples = doc.value("mc_samples", cfg.mc_samples);
        if (doc.contains("mc_bernoulli_p")) cfg.mc_bernoulli_p = doc["mc_bernoulli_p"].get<double>();
        cfg.combine_weight_r = doc.value("combine_weight_r", cfg.combine_weight_r);
        cfg.seed = doc.value("seed", cfg.seed);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, std::string("solver config: ") + e.what());
    }
    if (cfg.time_limit_ms <= 0 || cfg.node_limit <= 0 || cfg.mc_samples < 1)
        fail(ErrorCode::invalid_argument, "solver config limits must be positive");
    if (cfg.combine_weight_r < 0 || cfg.combine_weight_r > 1)
        fail(ErrorCode::invalid_argument, "combine_weight_r must be in [0,1]");
    if (cfg.mc_bernoulli_p && (*cfg.mc_bernoulli_p <= 0 || *cfg.mc_bernoulli_p >= 1))
        fail(ErrorCode::invalid_argument, "mc_bernoulli_p must be in (0,1)");
    return cfg;
}

LpRelaxResult lp_relaxation(const Instance& instance, const std::vector<int>& active_orders,
                            const SolverConfig& config,
                            const std::vector<std::pair<int, int>>& fixed) {
    const int n_slots = static_cast<int>(instance.slot_count());
    const int n_active = static_cast<int>(active_orders.size());
    LpProblem lp;
    lp.resize(n_active * n_slots);

    auto var = [&](int k, int i) { return k * n_slots + i; };

    for (int k = 0; k < n_active; ++k) {
        const int a = active_orders[static_cast<std::size_t>(k)];
        for (int i = 0; i < n_slots; ++i)
            lp.objective[static_cast<std::size_t>(var(k, i))] =
                instance.slots[static_cast<std::size_t>(i)].price;

        // budget: sum P x <= B
        LpProblem::Row budget;
        for (int i = 0; i < n_slots; ++i)
            budget.terms.emplace_back(var(k, i), instance.slots[static_cast<std::size_t>(i)].price);
        budget.rhs = instance.orders[static_cast<std::size_t>(a)].budget;
        lp.rows.push_back(std::move(budget));

        // impressions: sum S x >= R, stored negated
        LpProblem::Row target;
        for (int i = 0; i < n_slots; ++i) {
            double s = instance.impressions[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
            if (s != 0.0) target.terms.emplace_back(var(k, i), -s);
        }
        target.rhs = -instance.orders[static_cast<std::size_t>(a)].target_impressions;
        lp.rows.push_back(std::move(target));

        if (instance.orders[static_cast<std::size_t>(a)].forbid_consecutive) {
            for (int i = 0; i + 1 < n_slots; ++i) {
                if (!instance.consecutive(static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1)))
                    continue;
                LpProblem::Row pair;
                pair.terms.emplace_back(var(k, i), 1.0);
                pair.terms.emplace_back(var(k, i + 1), 1.0);
                pair.rhs = 1.0;
                lp.rows.push_back(std::move(pair));
            }
        }
    }

    // no overlap: sum over orders <= 1 per slot
    for (int i = 0; i < n_slots; ++i) {
        LpProblem::Row row;
        for (int k = 0; k < n_active; ++k) row.terms.emplace_back(var(k, i), 1.0);
        row.rhs = 1.0;
        lp.rows.push_back(std::move(row));
    }

    for (auto [v, value] : fixed) {
        lp.lower[static_cast<std::size_t>(v)] = value;
        lp.upper[static_cast<std::size_t>(v)] = value;
    }

    LpOptions options;
    options.tolerance = config.lp_tolerance;
    options.max_iterations = config.lp_iteration_limit;
    auto sol = solve_lp(lp, options);

    LpRelaxResult result;
    result.iteration_limit = sol.status == LpStatus::iteration_limit;
    if (result.iteration_limit)
        fail(ErrorCode::no_convergence, "lp relaxation hit the iteration limit");
    result.feasible = sol.status == LpStatus::optimal;
    if (result.feasible) {
        result.bound = sol.objective;
        result.x = std::move(sol.x);
    }
    return result;
}

namespace {

struct GreedyState {
    std::vector<double> spend, imps;
    std::vector<char> met, removed;
};

bool order_can_take(const Instance& inst, const Schedule& sched, int a, std::size_t slot) {
    if (!inst.orders[static_cast<std::size_t>(a)].forbid_consecutive) return true;
    auto same = [&](std::size_t other) {
        return other < sched.slot_order.size() && sched.slot_order[other] == a &&
               inst.consecutive(slot, other);
    };
    if (slot > 0 && same(slot - 1)) return false;
    return !same(slot + 1);
}

} // namespace

GreedyResult greedy_schedule(const Instance& instance) {
    std::vector<int> all(instance.order_count());
    for (std::size_t a = 0; a < instance.order_count(); ++a) all[a] = static_cast<int>(a);
    return greedy_schedule(instance, all);
}

GreedyResult greedy_schedule(const Instance& instance, const std::vector<int>& order_subset) {
    const std::size_t n_slots = instance.slot_count();
    GreedyResult result;
    result.schedule = Schedule::empty(n_slots);

    std::vector<int> remaining = order_subset;
    std::vector<double> spend(instance.order_count(), 0.0);
    std::vector<double> imps(instance.order_count(), 0.0);

    auto drop = [&](int a) {
        for (std::size_t i = 0; i < n_slots; ++i)
            if (result.schedule.slot_order[i] == a) result.schedule.slot_order[i] = -1;
        spend[static_cast<std::size_t>(a)] = 0;
        imps[static_cast<std::size_t>(a)] = 0;
        result.removed.push_back(a);
        remaining.erase(std::remove(remaining.begin(), remaining.end(), a), remaining.end());
    };

    for (;;) {
        // assign best-value pairs until no slots, all met, or none affordable
        for (;;) {
            double best_v = -1;
            std::size_t best_slot = 0;
            int best_order = -1;
            for (std::size_t i = 0; i < n_slots; ++i) {
                if (result.schedule.slot_order[i] >= 0) continue;
                double price = instance.slots[i].price;
                for (int a : remaining) {
                    const Order& o = instance.orders[static_cast<std::size_t>(a)];
                    if (imps[static_cast<std::size_t>(a)] >= o.target_impressions) continue; // met
                    if (spend[static_cast<std::size_t>(a)] + price > o.budget + 1e-9) continue;
                    if (!order_can_take(instance, result.schedule, a, i)) continue;
                    double v = (instance.impressions[static_cast<std::size_t>(a)][i] /
                                o.target_impressions) /
                               (price / o.budget);
                    if (v > best_v) { // first maximum wins: lowest slot, then lowest order
                        best_v = v;
                        best_slot = i;
                        best_order = a;
                    }
                }
            }
            if (best_order < 0) break;
            result.schedule.slot_order[best_slot] = best_order;
            spend[static_cast<std::size_t>(best_order)] += instance.slots[best_slot].price;
            imps[static_cast<std::size_t>(best_order)] +=
                instance.impressions[static_cast<std::size_t>(best_order)][best_slot];
        }

        std::vector<int> unmet, partial;
        for (int a : remaining) {
            if (imps[static_cast<std::size_t>(a)] >=
                instance.orders[static_cast<std::size_t>(a)].target_impressions)
                continue;
            unmet.push_back(a);
            if (spend[static_cast<std::size_t>(a)] > 0) partial.push_back(a);
        }
        if (unmet.empty()) break;
        if (!partial.empty()) {
            // remove incomplete orders, free their slots, and retry: the
            // freed slots may serve the remaining unmet orders
            for (int a : partial) drop(a);
            continue;
        }
        // unmet orders with nothing assigned cannot progress either
        for (int a : unmet) drop(a);
        break;
    }

    for (int a : remaining)
        if (imps[static_cast<std::size_t>(a)] >=
            instance.orders[static_cast<std::size_t>(a)].target_impressions)
            result.satisfied.push_back(a);
    std::sort(result.satisfied.begin(), result.satisfied.end());
    std::sort(result.removed.begin(), result.removed.end());
    return result;
}

namespace {

// internal feasibility for a fixed active set: every active order must meet
// its target within budget (deactivated orders are absent entirely)
bool schedule_serves_active(const Instance& inst, const Schedule& sched,
                            const std::vector<int>& active) {
    auto report = check_feasible(inst, sched);
    if (!report.feasible) return false;
    for (int a : active) {
        const auto& oc = report.orders[static_cast<std::size_t>(a)];
        if (oc.impressions < inst.orders[static_cast<std::size_t>(a)].target_impressions - 1e-9)
            return false;
    }
    // schedule must not reference non-active orders
    for (int a : sched.slot_order)
        if (a >= 0 && std::find(active.begin(), active.end(), a) == active.end()) return false;
    return true;
}

std::vector<int> schedule_key(const Schedule& sched) {
    std::vector<int> key(sched.slot_order.size());
    for (std::size_t i = 0; i < key.size(); ++i) key[i] = sched.slot_order[i] + 1;
    return key;
}

// Revenue extension of a feasible schedule: hand every still-free slot to the
// active order with the most budget headroom. Targets only ever improve, so
// feasibility is preserved.
void fill_unassigned(const Instance& inst, Schedule& sched, const std::vector<int>& active) {
    std::vector<double> remaining(inst.order_count(), 0.0);
    for (int a : active) remaining[static_cast<std::size_t>(a)] =
        inst.orders[static_cast<std::size_t>(a)].budget;
    for (std::size_t i = 0; i < sched.slot_order.size(); ++i) {
        int a = sched.slot_order[i];
        if (a >= 0) remaining[static_cast<std::size_t>(a)] -= inst.slots[i].price;
    }
    std::vector<std::size_t> free_slots;
    for (std::size_t i = 0; i < sched.slot_order.size(); ++i)
        if (sched.slot_order[i] < 0) free_slots.push_back(i);
    std::sort(free_slots.begin(), free_slots.end(), [&](std::size_t x, std::size_t y) {
        if (inst.slots[x].price != inst.slots[y].price)
            return inst.slots[x].price > inst.slots[y].price;
        return x < y;
    });
    for (std::size_t i : free_slots) {
        int pick = -1;
        for (int a : active) {
            if (remaining[static_cast<std::size_t>(a)] < inst.slots[i].price - 1e-9) continue;
            if (!order_can_take(inst, sched, a, i)) continue;
            if (pick < 0 || remaining[static_cast<std::size_t>(a)] >
                                remaining[static_cast<std::size_t>(pick)])
                pick = a;
        }
        if (pick >= 0) {
            sched.slot_order[i] = pick;
            remaining[static_cast<std::size_t>(pick)] -= inst.slots[i].price;
        }
    }
}

// Integer candidate from a fractional LP point: round each slot to its
// heaviest order, top up orders that fell short of their target with the
// cheapest impressions available, then monetize the leftovers.
std::optional<Schedule> repair_from_lp(const Instance& inst, const std::vector<int>& active,
                                       const std::vector<double>& x) {
    const std::size_t n_slots = inst.slot_count();
    Schedule sched = Schedule::empty(n_slots);
    std::vector<double> spend(inst.order_count(), 0.0), imps(inst.order_count(), 0.0);

    for (std::size_t i = 0; i < n_slots; ++i) {
        int pick = -1;
        double best = 0.3; // ignore weak fractions
        for (std::size_t k = 0; k < active.size(); ++k) {
            double v = x[k * n_slots + i];
            if (v > best) {
                best = v;
                pick = active[k];
            }
        }
        if (pick < 0) continue;
        if (spend[static_cast<std::size_t>(pick)] + inst.slots[i].price >
            inst.orders[static_cast<std::size_t>(pick)].budget + 1e-9)
            continue;
        if (!order_can_take(inst, sched, pick, i)) continue;
        sched.slot_order[i] = pick;
        spend[static_cast<std::size_t>(pick)] += inst.slots[i].price;
        imps[static_cast<std::size_t>(pick)] +=
            inst.impressions[static_cast<std::size_t>(pick)][i];
    }

    // top up short orders with the best impressions-per-price slots
    for (int a : active) {
        const Order& order = inst.orders[static_cast<std::size_t>(a)];
        if (imps[static_cast<std::size_t>(a)] >= order.target_impressions) continue;
        std::vector<std::size_t> free_slots;
        for (std::size_t i = 0; i < n_slots; ++i)
            if (sched.slot_order[i] < 0 &&
                inst.impressions[static_cast<std::size_t>(a)][i] > 0)
                free_slots.push_back(i);
        std::sort(free_slots.begin(), free_slots.end(), [&](std::size_t p, std::size_t q) {
            double rp = inst.impressions[static_cast<std::size_t>(a)][p] / inst.slots[p].price;
            double rq = inst.impressions[static_cast<std::size_t>(a)][q] / inst.slots[q].price;
            if (rp != rq) return rp > rq;
            return p < q;
        });
        for (std::size_t i : free_slots) {
            if (imps[static_cast<std::size_t>(a)] >= order.target_impressions) break;
            if (spend[static_cast<std::size_t>(a)] + inst.slots[i].price > order.budget + 1e-9)
                continue;
            if (!order_can_take(inst, sched, a, i)) continue;
            sched.slot_order[i] = a;
            spend[static_cast<std::size_t>(a)] += inst.slots[i].price;
            imps[static_cast<std::size_t>(a)] += inst.impressions[static_cast<std::size_t>(a)][i];
        }
        if (imps[static_cast<std::size_t>(a)] < order.target_impressions) return std::nullopt;
    }

    fill_unassigned(inst, sched, active);
    return sched;
}

struct BnbNode {
    double bound = 0;
    long id = 0;
    std::vector<std::pair<int, int>> fixed;
};

struct NodeOrder {
    bool operator()(const BnbNode& a, const BnbNode& b) const {
        if (a.bound != b.bound) return a.bound < b.bound; // max-heap on bound
        return a.id > b.id;                               // FIFO on ties
    }
};

Schedule x_to_schedule(const Instance& inst, const std::vector<int>& active,
                       const std::vector<double>& x) {
    const std::size_t n_slots = inst.slot_count();
    Schedule sched = Schedule::empty(n_slots);
    for (std::size_t k = 0; k < active.size(); ++k)
        for (std::size_t i = 0; i < n_slots; ++i)
            if (x[k * n_slots + i] > 0.5) sched.slot_order[i] = active[k];
    return sched;
}

} // namespace

BnbResult branch_and_bound(const Instance& instance, const std::vector<int>& active_orders,
                           const SolverConfig& config, const std::optional<Schedule>& incumbent) {
    const std::size_t n_slots = instance.slot_count();
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    };

    BnbResult result;

    std::optional<Schedule> best;
    double best_rev = -1;
    auto offer_incumbent = [&](const Schedule& cand) {
        double rev = revenue(instance, cand);
        if (!best || rev > best_rev + 1e-9) {
            best = cand;
            best_rev = rev;
        } else if (std::abs(rev - best_rev) <= 1e-9 && schedule_key(cand) < schedule_key(*best)) {
            best = cand; // deterministic tie-break: lexicographically smallest assignment
        }
    };

    auto offer_with_fill = [&](Schedule cand) {
        offer_incumbent(cand);
        fill_unassigned(instance, cand, active_orders);
        offer_incumbent(cand);
    };

    if (incumbent) {
        if (!schedule_serves_active(instance, *incumbent, active_orders))
            fail(ErrorCode::invalid_argument, "provided incumbent is not feasible");
        offer_with_fill(*incumbent);
    } else {
        auto greedy = greedy_schedule(instance, active_orders);
        if (greedy.removed.empty() &&
            schedule_serves_active(instance, greedy.schedule, active_orders))
            offer_with_fill(greedy.schedule);
    }

    auto rounding_candidate = [&](const std::vector<double>& x) {
        auto cand = repair_from_lp(instance, active_orders, x);
        if (cand && schedule_serves_active(instance, *cand, active_orders))
            offer_incumbent(*cand);
    };

    std::priority_queue<BnbNode, std::vector<BnbNode>, NodeOrder> open;
    long next_id = 0;
    bool hit_limit = false;

    auto root = lp_relaxation(instance, active_orders, config, {});
    if (!root.feasible) {
        result.status = SolveStatus::infeasible;
        result.nodes = 1;
        return result;
    }
    result.root_bound = root.bound;
    open.push({root.bound, next_id++, {}});
    result.nodes = 0;

    const double int_tol = 1e-6;

    while (!open.empty()) {
        if (result.nodes >= config.node_limit || elapsed_ms() > static_cast<double>(config.time_limit_ms)) {
            hit_limit = true;
            break;
        }
        BnbNode node = open.top();
        open.pop();
        if (best && node.bound <= best_rev + 1e-9) {
            // best-first: every remaining node is bounded by this one
            while (!open.empty()) open.pop();
            break;
        }
        ++result.nodes;

        auto relax = lp_relaxation(instance, active_orders, config, node.fixed);
        if (!relax.feasible) continue;
        if (best && relax.bound <= best_rev + 1e-9) continue;

        // integral?
        int branch_var = -1;
        double branch_frac = 1.0; // distance from 1/2, smaller is more fractional
        for (std::size_t v = 0; v < relax.x.size(); ++v) {
            double frac = std::abs(relax.x[v] - std::round(relax.x[v]));
            if (frac > int_tol) {
                double dist = std::abs(relax.x[v] - 0.5);
                if (dist < branch_frac - 1e-12) {
                    branch_frac = dist;
                    branch_var = static_cast<int>(v);
                }
            }
        }

        if (branch_var < 0) {
            offer_with_fill(x_to_schedule(instance, active_orders, relax.x));
            continue;
        }

        rounding_candidate(relax.x);

        // children inherit the parent's bound estimate; the 1-branch gets the
        // smaller id so it is explored first on ties
        BnbNode one{relax.bound, next_id++, node.fixed};
        one.fixed.emplace_back(branch_var, 1);
        BnbNode zero{relax.bound, next_id++, node.fixed};
        zero.fixed.emplace_back(branch_var, 0);
        open.push(std::move(one));
        open.push(std::move(zero));
    }

    if (hit_limit) {
        result.best_bound = best ? best_rev : -std::numeric_limits<double>::infinity();
        if (!open.empty()) result.best_bound = std::max(result.best_bound, open.top().bound);
    } else {
        result.best_bound = best ? best_rev : -std::numeric_limits<double>::infinity();
    }

    if (best) {
        result.schedule = *best;
        result.revenue = best_rev;
        result.status = hit_limit ? SolveStatus::feasible : SolveStatus::optimal;
    } else {
        result.status = hit_limit ? SolveStatus::limit_no_incumbent : SolveStatus::infeasible;
    }
    return result;
}

std::vector<int> prune_unreasonable(const Instance& instance, const std::vector<int>& orders) {
    std::vector<int> kept;
    for (int a : orders) {
        double total = 0;
        for (double s : instance.impressions[static_cast<std::size_t>(a)]) total += s;
        if (total < instance.orders[static_cast<std::size_t>(a)].target_impressions)
            continue; // strict: equality is kept
        kept.push_back(a);
    }
    return kept;
}

namespace {

struct McOutcome {
    double w_mc = 0;
    double w_bid = 0;
};

double default_bernoulli_p(const Instance& inst, int order) {
    double mean_s = 0;
    for (double s : inst.impressions[static_cast<std::size_t>(order)]) mean_s += s;
    double n = static_cast<double>(inst.slot_count());
    mean_s /= n;
    if (mean_s <= 0) return 0.05;
    double p = inst.orders[static_cast<std::size_t>(order)].target_impressions / (mean_s * n);
    return std::clamp(std::min(1.0, p), 0.05, 0.5);
}

McOutcome mc_values(const Instance& inst, int order, const SolverConfig& cfg) {
    const Order& o = inst.orders[static_cast<std::size_t>(order)];
    double p = cfg.mc_bernoulli_p ? *cfg.mc_bernoulli_p : default_bernoulli_p(inst, order);
    Rng rng(derive_seed(cfg.seed, "mc:" + o.order_id));
    const std::size_t n_slots = inst.slot_count();
    long feasible = 0;
    double excess_sum = 0;
    for (int draw = 0; draw < cfg.mc_samples; ++draw) {
        double spend = 0, imps = 0;
        for (std::size_t i = 0; i < n_slots; ++i) {
            if (rng.uniform() < p) {
                spend += inst.slots[i].price;
                imps += inst.impressions[static_cast<std::size_t>(order)][i];
            }
        }
        if (spend <= o.budget + 1e-9 && imps >= o.target_impressions - 1e-9) {
            ++feasible;
            excess_sum += (o.budget - spend) / o.budget;
        }
    }
    McOutcome out;
    out.w_mc = static_cast<double>(feasible) / static_cast<double>(cfg.mc_samples);
    out.w_bid = excess_sum / static_cast<double>(cfg.mc_samples);
    return out;
}

} // namespace

double value_mc(const Instance& instance, int order, const SolverConfig& config) {
    return mc_values(instance, order, config).w_mc;
}

double value_bid(const Instance& instance, int order, const SolverConfig& config) {
    return mc_values(instance, order, config).w_bid;
}

double value_combined(double w_mc, double w_bid, double r) {
    if (r < 0 || r > 1) fail(ErrorCode::invalid_argument, "r must be in [0,1]");
    return (1.0 - r) * w_mc + r * w_bid;
}

SolveReport triage_and_solve(const Instance& instance, const SolverConfig& config) {
    instance.validate();
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    };

    SolveReport report;
    report.schedule = Schedule::empty(instance.slot_count());

    std::vector<int> all(instance.order_count());
    for (std::size_t a = 0; a < instance.order_count(); ++a) all[a] = static_cast<int>(a);

    auto reject = [&](int a, const char* reason) {
        report.rejected.push_back({instance.orders[static_cast<std::size_t>(a)].order_id, reason});
    };

    // step 1: unreasonable orders out (sum S < R)
    std::vector<int> survivors = prune_unreasonable(instance, all);
    for (int a : all)
        if (std::find(survivors.begin(), survivors.end(), a) == survivors.end())
            reject(a, "unreasonable");

    // budget screen: even spending the whole budget on the best S/P slots
    // (fractionally) cannot reach R
    {
        std::vector<int> affordable;
        for (int a : survivors) {
            const Order& o = instance.orders[static_cast<std::size_t>(a)];
            std::vector<std::size_t> idx(instance.slot_count());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
                double rx = instance.impressions[static_cast<std::size_t>(a)][x] /
                            instance.slots[x].price;
                double ry = instance.impressions[static_cast<std::size_t>(a)][y] /
                            instance.slots[y].price;
                if (rx != ry) return rx > ry;
                return x < y;
            });
            double budget = o.budget, max_imp = 0;
            for (std::size_t i : idx) {
                if (budget <= 0) break;
                double take = std::min(1.0, budget / instance.slots[i].price);
                max_imp += take * instance.impressions[static_cast<std::size_t>(a)][i];
                budget -= take * instance.slots[i].price;
            }
            if (max_imp < o.target_impressions - 1e-9)
                reject(a, "budget");
            else
                affordable.push_back(a);
        }
        survivors = std::move(affordable);
    }

    // step 2: rank by W_COMB descending, ties by order id
    std::vector<std::pair<double, int>> ranked;
    for (int a : survivors) {
        auto vals = mc_values(instance, a, config);
        double w = value_combined(vals.w_mc, vals.w_bid, config.combine_weight_r);
        ranked.emplace_back(w, a);
        report.order_values.emplace_back(instance.orders[static_cast<std::size_t>(a)].order_id, w);
    }
    std::sort(ranked.begin(), ranked.end(), [&](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return instance.orders[static_cast<std::size_t>(x.second)].order_id <
               instance.orders[static_cast<std::size_t>(y.second)].order_id;
    });
    std::sort(report.order_values.begin(), report.order_values.end(),
              [](const auto& x, const auto& y) {
                  if (x.second != y.second) return x.second > y.second;
                  return x.first < y.first;
              });

    std::vector<int> active;
    for (auto& [w, a] : ranked) active.push_back(a);
    std::sort(active.begin(), active.end());

    while (!active.empty()) {
        ++report.rounds;
        SolverConfig round_cfg = config;
        round_cfg.time_limit_ms =
            std::max<long>(1, config.time_limit_ms - static_cast<long>(elapsed_ms()));
        auto bnb = branch_and_bound(instance, active, round_cfg);
        report.nodes_explored += bnb.nodes;
        if (bnb.status == SolveStatus::optimal || bnb.status == SolveStatus::feasible) {
            report.schedule = bnb.schedule;
            report.revenue = bnb.revenue;
            report.lp_upper_bound = bnb.root_bound;
            report.best_bound = bnb.best_bound;
            report.proven_optimal = bnb.status == SolveStatus::optimal;
            for (int a : active)
                report.accepted.push_back(instance.orders[static_cast<std::size_t>(a)].order_id);
            break;
        }
        // deactivate the lowest-valued active order and try again
        int victim = ranked.back().second;
        ranked.pop_back();
        active.erase(std::remove(active.begin(), active.end(), victim), active.end());
        reject(victim, "triaged");
    }

    std::sort(report.accepted.begin(), report.accepted.end());
    std::sort(report.rejected.begin(), report.rejected.end(),
              [](const Rejection& x, const Rejection& y) { return x.order_id < y.order_id; });
    report.wall_time_ms = elapsed_ms();
    return report;
}

} // namespace tvsched
