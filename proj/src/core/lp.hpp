#pragma once

#include <utility>
#include <vector>

namespace tvsched {

// Dense-basis primal simplex for box-constrained LPs:
//   maximize c.x  subject to  a_i . x <= b_i,  lb <= x <= ub
// Constraints of the >= kind are passed negated by callers. Pricing is
// Dantzig with Bland's rule as the anti-cycling fallback.
struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<double> lower, upper;
    struct Row {
        std::vector<std::pair<int, double>> terms; // (variable, coefficient)
        double rhs = 0;
    };
    std::vector<Row> rows;

    void resize(int n) {
        num_vars = n;
        objective.assign(static_cast<std::size_t>(n), 0.0);
        lower.assign(static_cast<std::size_t>(n), 0.0);
        upper.assign(static_cast<std::size_t>(n), 1.0);
    }
    void add_row(std::vector<std::pair<int, double>> terms, double rhs) {
        rows.push_back({std::move(terms), rhs});
    }
};

enum class LpStatus { optimal, infeasible, iteration_limit };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective = 0;
    std::vector<double> x;
    long iterations = 0;
};

struct LpOptions {
    long max_iterations = 200000;
    double tolerance = 1e-7; // reduced-cost / feasibility tolerance
};

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

} // namespace tvsched
