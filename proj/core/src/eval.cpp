#include "driftbench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftbench {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double roc_auc(std::span<const double> scores, const Labels& labels) {
    if (scores.size() != labels.size()) {
        throw InvalidArgument("roc_auc: scores and labels differ in length");
    }
    const auto ranks = average_ranks(scores);
    double rank_sum = 0.0;
    double n_pos = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0) {
            rank_sum += ranks[i];
            n_pos += 1.0;
        }
    }
    const double n_neg = static_cast<double>(labels.size()) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) {
        throw InvalidArgument("roc_auc: both classes must be present");
    }
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
    Labels y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] ? 1 : 0;
    return roc_auc(scores, y);
}

double permutation_p(double observed, std::span<const double> permuted) {
    if (permuted.empty()) throw InvalidArgument("permutation_p: no permuted statistics");
    const auto exceed = std::count_if(permuted.begin(), permuted.end(),
                                      [&](double v) { return v >= observed; });
    return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(permuted.size()) + 1.0);
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgument("quantile: empty input");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean(values);
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return s / static_cast<double>(values.size() - 1);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw InvalidArgument("spearman: need two equally long series of length >= 2");
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double ma = mean(ra);
    const double mb = mean(rb);
    double cov = 0.0;
    double va = 0.0;
    double vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

}  // namespace driftbench
