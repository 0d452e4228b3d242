#pragma once

#include <algorithm>
#include <functional>
#include <vector>

namespace tvsched {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0;
    bool converged = false;
    int iterations = 0;
};

// Derivative-free simplex minimization. Converges when the simplex function
// spread drops below tol (absolute).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& start,
                                    const std::vector<double>& step,
                                    double tol,
                                    int max_iter) {
    const std::size_t dim = start.size();
    std::vector<std::vector<double>> pts(dim + 1, start);
    for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += step[i];
    std::vector<double> vals(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) vals[i] = f(pts[i]);

    NelderMeadResult result;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        std::vector<std::size_t> order(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::size_t best = order[0], worst = order[dim], second = order[dim - 1];

        if (vals[worst] - vals[best] < tol) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += pts[i][d];
        }
        for (auto& c : centroid) c /= static_cast<double>(dim);

        auto blend = [&](double coef) {
            std::vector<double> p(dim);
            for (std::size_t d = 0; d < dim; ++d)
                p[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
            return p;
        };

        auto reflected = blend(-1.0);
        double fr = f(reflected);
        if (fr < vals[order[0]]) {
            auto expanded = blend(-2.0);
            double fe = f(expanded);
            if (fe < fr) {
                pts[worst] = std::move(expanded);
                vals[worst] = fe;
            } else {
                pts[worst] = std::move(reflected);
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = std::move(reflected);
            vals[worst] = fr;
        } else {
            auto contracted = blend(fr < vals[worst] ? -0.5 : 0.5);
            double fc = f(contracted);
            if (fc < std::min(fr, vals[worst])) {
                pts[worst] = std::move(contracted);
                vals[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < dim; ++d)
                        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i)
        if (vals[i] < vals[best]) best = i;
    result.x = pts[best];
    result.value = vals[best];
    result.iterations = iter;
    return result;
}

} // namespace tvsched
