#include "core/lp.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tvsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Simplex {
public:
    Simplex(const LpProblem& p, const LpOptions& opt) : opt_(opt), n_(p.num_vars), m_(static_cast<int>(p.rows.size())) {
        // variable order: structural, slack per row, artificials appended later
        cols_.resize(static_cast<std::size_t>(n_ + m_));
        lb_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
        ub_.assign(static_cast<std::size_t>(n_ + m_), kInf);
        cost_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
        for (int j = 0; j < n_; ++j) {
            lb_[static_cast<std::size_t>(j)] = p.lower[static_cast<std::size_t>(j)];
            ub_[static_cast<std::size_t>(j)] = p.upper[static_cast<std::size_t>(j)];
            cost_[static_cast<std::size_t>(j)] = p.objective[static_cast<std::size_t>(j)];
        }
        rhs_.resize(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) {
            rhs_[static_cast<std::size_t>(i)] = p.rows[static_cast<std::size_t>(i)].rhs;
            for (auto [v, coef] : p.rows[static_cast<std::size_t>(i)].terms)
                cols_[static_cast<std::size_t>(v)].emplace_back(i, coef);
            cols_[static_cast<std::size_t>(n_ + i)].emplace_back(i, 1.0); // slack
        }
    }

    LpSolution run() {
        LpSolution sol;
        init_basis();

        if (has_artificials_) {
            std::vector<double> phase1(cost_.size(), 0.0);
            for (int j = first_art_; j < total_; ++j) phase1[static_cast<std::size_t>(j)] = -1.0;
            LpStatus st = iterate(phase1, sol.iterations);
            if (st == LpStatus::iteration_limit) {
                sol.status = st;
                return sol;
            }
            double infeas = 0;
            for (int i = 0; i < m_; ++i)
                if (basic_[static_cast<std::size_t>(i)] >= first_art_)
                    infeas += xb_[static_cast<std::size_t>(i)];
            if (infeas > feas_tol()) {
                sol.status = LpStatus::infeasible;
                return sol;
            }
            for (int j = first_art_; j < total_; ++j) ub_[static_cast<std::size_t>(j)] = 0.0;
        }

        LpStatus st = iterate(cost_, sol.iterations);
        sol.status = st;
        if (st != LpStatus::optimal) return sol;

        sol.x.assign(static_cast<std::size_t>(n_), 0.0);
        for (int j = 0; j < n_; ++j) sol.x[static_cast<std::size_t>(j)] = value_of(j);
        sol.objective = 0;
        for (int j = 0; j < n_; ++j)
            sol.objective += cost_[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
        return sol;
    }

private:
    const LpOptions& opt_;
    int n_, m_;
    int total_ = 0, first_art_ = 0;
    bool has_artificials_ = false;

    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> lb_, ub_, cost_, rhs_;
    std::vector<double> binv_; // m*m row-major
    std::vector<int> basic_;   // row -> variable
    std::vector<int> pos_in_basis_; // variable -> row or -1
    std::vector<char> at_upper_;
    std::vector<double> xb_;

    double feas_tol() const { return std::max(1e-9, opt_.tolerance); }

    double value_of(int var) const {
        int pos = pos_in_basis_[static_cast<std::size_t>(var)];
        if (pos >= 0) return xb_[static_cast<std::size_t>(pos)];
        return at_upper_[static_cast<std::size_t>(var)] ? ub_[static_cast<std::size_t>(var)]
                                                        : lb_[static_cast<std::size_t>(var)];
    }

    void init_basis() {
        // start with structural vars at a finite bound, slacks basic
        std::vector<double> residual = rhs_;
        at_upper_.assign(cols_.size(), 0);
        for (int j = 0; j < n_; ++j) {
            double v = lb_[static_cast<std::size_t>(j)];
            if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "lp: variables need finite lower bounds");
            if (v != 0.0)
                for (auto [row, coef] : cols_[static_cast<std::size_t>(j)])
                    residual[static_cast<std::size_t>(row)] -= coef * v;
        }

        std::vector<int> art_rows;
        for (int i = 0; i < m_; ++i)
            if (residual[static_cast<std::size_t>(i)] < -feas_tol()) art_rows.push_back(i);

        first_art_ = n_ + m_;
        total_ = first_art_ + static_cast<int>(art_rows.size());
        has_artificials_ = !art_rows.empty();
        cols_.resize(static_cast<std::size_t>(total_));
        lb_.resize(static_cast<std::size_t>(total_), 0.0);
        ub_.resize(static_cast<std::size_t>(total_), kInf);
        cost_.resize(static_cast<std::size_t>(total_), 0.0);
        at_upper_.resize(static_cast<std::size_t>(total_), 0);

        basic_.assign(static_cast<std::size_t>(m_), -1);
        pos_in_basis_.assign(static_cast<std::size_t>(total_), -1);
        xb_.assign(static_cast<std::size_t>(m_), 0.0);
        binv_.assign(static_cast<std::size_t>(m_) * static_cast<std::size_t>(m_), 0.0);

        int art = first_art_;
        for (int i = 0; i < m_; ++i) {
            double r = residual[static_cast<std::size_t>(i)];
            int var;
            if (r < -feas_tol()) {
                cols_[static_cast<std::size_t>(art)].emplace_back(i, -1.0);
                var = art++;
                xb_[static_cast<std::size_t>(i)] = -r;
                binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) +
                      static_cast<std::size_t>(i)] = -1.0;
            } else {
                var = n_ + i;
                xb_[static_cast<std::size_t>(i)] = std::max(0.0, r);
                binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) +
                      static_cast<std::size_t>(i)] = 1.0;
            }
            basic_[static_cast<std::size_t>(i)] = var;
            pos_in_basis_[static_cast<std::size_t>(var)] = i;
        }
    }

    // y = c_B * B^-1
    void compute_duals(const std::vector<double>& cost, std::vector<double>& y) const {
        y.assign(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            double cb = cost[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])];
            if (cb == 0.0) continue;
            const double* row = &binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_)];
            for (int k = 0; k < m_; ++k) y[static_cast<std::size_t>(k)] += cb * row[k];
        }
    }

    double reduced_cost(const std::vector<double>& cost, const std::vector<double>& y, int j) const {
        double d = cost[static_cast<std::size_t>(j)];
        for (auto [row, coef] : cols_[static_cast<std::size_t>(j)])
            d -= y[static_cast<std::size_t>(row)] * coef;
        return d;
    }

    // w = B^-1 * A_j
    void ftran(int j, std::vector<double>& w) const {
        w.assign(static_cast<std::size_t>(m_), 0.0);
        for (auto [row, coef] : cols_[static_cast<std::size_t>(j)])
            for (int i = 0; i < m_; ++i)
                w[static_cast<std::size_t>(i)] +=
                    binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) +
                          static_cast<std::size_t>(row)] *
                    coef;
    }

    void refactorize() {
        int m = m_;
        std::vector<double> dense(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < m; ++i) {
            int var = basic_[static_cast<std::size_t>(i)];
            for (auto [row, coef] : cols_[static_cast<std::size_t>(var)])
                dense[static_cast<std::size_t>(row) * static_cast<std::size_t>(m) +
                      static_cast<std::size_t>(i)] = coef;
        }
        // Gauss-Jordan inverse with partial pivoting
        std::vector<double> inv(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < m; ++i)
            inv[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(i)] = 1.0;
        for (int col = 0; col < m; ++col) {
            int piv = col;
            double best = std::abs(dense[static_cast<std::size_t>(col) * static_cast<std::size_t>(m) +
                                         static_cast<std::size_t>(col)]);
            for (int r = col + 1; r < m; ++r) {
                double v = std::abs(dense[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) +
                                          static_cast<std::size_t>(col)]);
                if (v > best) {
                    best = v;
                    piv = r;
                }
            }
            if (best < 1e-12) fail(ErrorCode::domain, "lp: singular basis during refactorization");
            if (piv != col) {
                for (int k = 0; k < m; ++k) {
                    std::swap(dense[static_cast<std::size_t>(piv) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)],
                              dense[static_cast<std::size_t>(col) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)]);
                    std::swap(inv[static_cast<std::size_t>(piv) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)],
                              inv[static_cast<std::size_t>(col) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)]);
                }
            }
            double d = dense[static_cast<std::size_t>(col) * static_cast<std::size_t>(m) + static_cast<std::size_t>(col)];
            double invd = 1.0 / d;
            for (int k = 0; k < m; ++k) {
                dense[static_cast<std::size_t>(col) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] *= invd;
                inv[static_cast<std::size_t>(col) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] *= invd;
            }
            for (int r = 0; r < m; ++r) {
                if (r == col) continue;
                double f = dense[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) + static_cast<std::size_t>(col)];
                if (f == 0.0) continue;
                for (int k = 0; k < m; ++k) {
                    dense[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] -=
                        f * dense[static_cast<std::size_t>(col) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)];
                    inv[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] -=
                        f * inv[static_cast<std::size_t>(col) * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)];
                }
            }
        }
        binv_ = std::move(inv);
        recompute_basics();
    }

    void recompute_basics() {
        std::vector<double> r = rhs_;
        for (int j = 0; j < total_; ++j) {
            if (pos_in_basis_[static_cast<std::size_t>(j)] >= 0) continue;
            double v = at_upper_[static_cast<std::size_t>(j)] ? ub_[static_cast<std::size_t>(j)]
                                                              : lb_[static_cast<std::size_t>(j)];
            if (v == 0.0) continue;
            for (auto [row, coef] : cols_[static_cast<std::size_t>(j)])
                r[static_cast<std::size_t>(row)] -= coef * v;
        }
        for (int i = 0; i < m_; ++i) {
            double acc = 0;
            const double* row = &binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_)];
            for (int k = 0; k < m_; ++k) acc += row[k] * r[static_cast<std::size_t>(k)];
            xb_[static_cast<std::size_t>(i)] = acc;
        }
    }

    LpStatus iterate(const std::vector<double>& cost, long& iterations) {
        std::vector<double> y, w;
        int degenerate_streak = 0;
        long since_refactor = 0;
        const double dtol = opt_.tolerance;

        for (;;) {
            if (iterations >= opt_.max_iterations) return LpStatus::iteration_limit;
            ++iterations;
            if (++since_refactor >= 256) {
                refactorize();
                since_refactor = 0;
            }

            compute_duals(cost, y);
            bool bland = degenerate_streak > 40;

            int enter = -1;
            double best_score = dtol;
            for (int j = 0; j < total_; ++j) {
                if (pos_in_basis_[static_cast<std::size_t>(j)] >= 0) continue;
                if (lb_[static_cast<std::size_t>(j)] >= ub_[static_cast<std::size_t>(j)]) continue;
                double d = reduced_cost(cost, y, j);
                double score = at_upper_[static_cast<std::size_t>(j)] ? -d : d;
                if (score > (bland ? dtol : best_score)) {
                    enter = j;
                    if (bland) break;
                    best_score = score;
                }
            }
            if (enter < 0) return LpStatus::optimal;

            ftran(enter, w);
            double delta = at_upper_[static_cast<std::size_t>(enter)] ? -1.0 : 1.0;

            // ratio test: how far can the entering variable move. Starts at the
            // entering variable's own travel (a bound flip); any tighter basic
            // bound forces a pivot instead.
            double t_max = ub_[static_cast<std::size_t>(enter)] - lb_[static_cast<std::size_t>(enter)];
            int leave_pos = -1;
            double leave_rate = 0;
            for (int i = 0; i < m_; ++i) {
                double rate = -delta * w[static_cast<std::size_t>(i)]; // d(xb_i)/dt
                int bvar = basic_[static_cast<std::size_t>(i)];
                double t_i;
                if (rate < -1e-11) {
                    t_i = (xb_[static_cast<std::size_t>(i)] - lb_[static_cast<std::size_t>(bvar)]) / (-rate);
                } else if (rate > 1e-11) {
                    double u = ub_[static_cast<std::size_t>(bvar)];
                    if (!std::isfinite(u)) continue;
                    t_i = (u - xb_[static_cast<std::size_t>(i)]) / rate;
                } else {
                    continue;
                }
                if (t_i < 0) t_i = 0;
                if (t_i < t_max - 1e-12) {
                    t_max = t_i;
                    leave_pos = i;
                    leave_rate = rate;
                } else if (leave_pos >= 0 && t_i <= t_max + 1e-12 &&
                           tie_break(i, leave_pos, rate, leave_rate, bland)) {
                    leave_pos = i;
                    leave_rate = rate;
                }
            }
            if (!std::isfinite(t_max)) fail(ErrorCode::domain, "lp: unbounded direction");

            degenerate_streak = t_max < 1e-10 ? degenerate_streak + 1 : 0;

            // apply the step
            for (int i = 0; i < m_; ++i)
                xb_[static_cast<std::size_t>(i)] -= delta * t_max * w[static_cast<std::size_t>(i)];

            if (leave_pos < 0) {
                // bound flip, basis unchanged
                at_upper_[static_cast<std::size_t>(enter)] ^= 1;
                continue;
            }

            int leave_var = basic_[static_cast<std::size_t>(leave_pos)];
            at_upper_[static_cast<std::size_t>(leave_var)] = leave_rate > 0 ? 1 : 0;
            pos_in_basis_[static_cast<std::size_t>(leave_var)] = -1;

            double enter_start = at_upper_[static_cast<std::size_t>(enter)]
                                     ? ub_[static_cast<std::size_t>(enter)]
                                     : lb_[static_cast<std::size_t>(enter)];
            basic_[static_cast<std::size_t>(leave_pos)] = enter;
            pos_in_basis_[static_cast<std::size_t>(enter)] = leave_pos;
            xb_[static_cast<std::size_t>(leave_pos)] = enter_start + delta * t_max;

            // eta update of B^-1
            double pivot = w[static_cast<std::size_t>(leave_pos)];
            if (std::abs(pivot) < 1e-11) {
                refactorize();
                since_refactor = 0;
                continue;
            }
            double inv_pivot = 1.0 / pivot;
            double* prow = &binv_[static_cast<std::size_t>(leave_pos) * static_cast<std::size_t>(m_)];
            for (int k = 0; k < m_; ++k) prow[k] *= inv_pivot;
            for (int i = 0; i < m_; ++i) {
                if (i == leave_pos) continue;
                double f = w[static_cast<std::size_t>(i)];
                if (f == 0.0) continue;
                double* row = &binv_[static_cast<std::size_t>(i) * static_cast<std::size_t>(m_)];
                for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
            }
        }
    }

    bool tie_break(int cand_row, int cur_row, double cand_rate, double cur_rate, bool bland) const {
        int cand_var = basic_[static_cast<std::size_t>(cand_row)];
        int cur_var = basic_[static_cast<std::size_t>(cur_row)];
        bool cand_art = cand_var >= first_art_;
        bool cur_art = cur_var >= first_art_;
        if (cand_art != cur_art) return cand_art; // kick artificials out first
        if (bland) return cand_var < cur_var;
        return std::abs(cand_rate) > std::abs(cur_rate); // stability
    }
};

} // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
    if (problem.num_vars <= 0) {
        // vacuous problem: feasible iff every row accepts x = empty
        LpSolution sol;
        sol.status = LpStatus::optimal;
        for (const auto& row : problem.rows)
            if (row.rhs < -options.tolerance) sol.status = LpStatus::infeasible;
        return sol;
    }
    for (int j = 0; j < problem.num_vars; ++j)
        if (problem.lower[static_cast<std::size_t>(j)] >
            problem.upper[static_cast<std::size_t>(j)] + 1e-12)
            return {};
    Simplex simplex(problem, options);
    return simplex.run();
}

} // namespace tvsched
