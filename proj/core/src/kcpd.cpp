#include <algorithm>
#include <cmath>
#include <limits>

#include "driftbench/detectors.hpp"

namespace driftbench {

KcpdTable kcpd_segment(const KernelMatrix& k, std::size_t n_max) {
    const std::size_t n = k.size();
    if (n == 0) throw InvalidArgument("kcpd_segment: empty chunk");
    if (n_max >= n) throw InvalidArgument("kcpd_segment: n_max must be below the chunk length");

    const SegmentCost cost(k.values);
    constexpr double inf = std::numeric_limits<double>::infinity();
    KcpdTable table;
    table.objective.assign(n_max + 1, std::vector<double>(n + 1, inf));
    std::vector<std::vector<std::size_t>> arg(n_max + 1, std::vector<std::size_t>(n + 1, 0));

    for (std::size_t t = 1; t <= n; ++t) table.objective[0][t] = cost(0, t);
    for (std::size_t kk = 1; kk <= n_max; ++kk) {
        const auto& prev = table.objective[kk - 1];
        auto& cur = table.objective[kk];
        for (std::size_t t = kk + 1; t <= n; ++t) {
            double best = inf;
            std::size_t best_s = kk;
            for (std::size_t s = kk; s < t; ++s) {
                const double v = prev[s] + cost(s, t);
                // rounding-level differences count as ties, resolved toward the smaller split
                if (v < best - 1e-12 * (1.0 + std::abs(best == inf ? 0.0 : best))) {
                    best = v;
                    best_s = s;
                }
            }
            cur[t] = best;
            arg[kk][t] = best_s;
        }
    }

    table.change_points.resize(n_max + 1);
    for (std::size_t kk = 1; kk <= n_max; ++kk) {
        std::vector<std::size_t> cps(kk);
        std::size_t t = n;
        for (std::size_t j = kk; j >= 1; --j) {
            t = arg[j][t];
            cps[j - 1] = t;
        }
        table.change_points[kk] = std::move(cps);
    }
    return table;
}

double kcpd_improvement(const KcpdTable& table, std::size_t k) {
    if (k == 0 || k >= table.objective.size()) {
        throw InvalidArgument("kcpd_improvement: k out of range");
    }
    const double base = table.final_objective(0);
    if (!(base > 1e-14)) return 0.0;
    const double r = (table.final_objective(k - 1) - table.final_objective(k)) / base;
    return std::clamp(r, 0.0, 1.0);
}

double alpha_score(double improvement, std::span<const double> alpha_grid) {
    if (alpha_grid.empty()) throw InvalidArgument("alpha grid must not be empty");
    double best = std::numeric_limits<double>::infinity();
    for (double a : alpha_grid) {
        if (a >= improvement && a < best) best = a;
    }
    return std::isinf(best) ? improvement : best;
}

DriftScore kcpd_detect(const Matrix& chunk, const KernelSpec& kernel, std::span<const double> alpha_grid) {
    if (alpha_grid.empty()) throw InvalidArgument("alpha grid must not be empty");
    if (chunk.rows() < 2) throw InvalidArgument("kcpd_detect: chunk needs at least 2 samples");
    const KernelMatrix k = kernel_matrix(chunk, kernel);
    const KcpdTable table = kcpd_segment(k, 1);
    const double r = kcpd_improvement(table, 1);
    return DriftScore::from_score(r, alpha_score(r, alpha_grid), table.change_points[1][0]);
}

}  // namespace driftbench
