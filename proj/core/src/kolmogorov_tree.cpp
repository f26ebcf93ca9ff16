#include <algorithm>
#include <limits>

#include "driftbench/detectors.hpp"
#include "driftbench/localizers.hpp"

namespace driftbench {

void KolmogorovTreeConfig::validate() const {
    if (min_leaf < 1) throw InvalidArgument("kolmogorov tree: min_leaf must be positive");
    if (!(p_split > 0.0 && p_split < 1.0)) throw InvalidArgument("kolmogorov tree: p_split must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("kolmogorov tree: alpha must lie in (0, 1)");
    if (max_candidates < 1) throw InvalidArgument("kolmogorov tree: max_candidates must be positive");
}

namespace {

struct Segment {
    std::vector<std::size_t> rows;
    std::vector<double> lower;
    std::vector<double> upper;
};

class Grower {
public:
    Grower(const Matrix& x, std::span<const std::int64_t> t, const KolmogorovTreeConfig& config)
        : x_(x), t_(t), config_(config) {}

    void grow(Segment seg) {
        const std::size_t n = seg.rows.size();
        if (n < 2 * config_.min_leaf) {
            leaves_.push_back(std::move(seg));
            return;
        }
        double best_stat = -1.0;
        double best_p = 1.0;
        std::size_t best_dim = 0;
        double best_threshold = 0.0;
        std::size_t candidates = 0;

        std::vector<double> values(n);
        std::vector<double> left;
        std::vector<double> right;
        for (Eigen::Index j = 0; j < x_.cols(); ++j) {
            for (std::size_t r = 0; r < n; ++r) values[r] = x_(static_cast<Eigen::Index>(seg.rows[r]), j);
            std::vector<double> unique = values;
            std::sort(unique.begin(), unique.end());
            unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
            if (unique.size() < 2) continue;
            const std::size_t m = unique.size() - 1;
            const std::size_t take = std::min(m, config_.max_candidates);
            for (std::size_t c = 0; c < take; ++c) {
                const std::size_t idx = take == m ? c : (2 * c + 1) * m / (2 * take);
                const double threshold = 0.5 * (unique[idx] + unique[idx + 1]);
                left.clear();
                right.clear();
                for (std::size_t r = 0; r < n; ++r) {
                    (values[r] < threshold ? left : right).push_back(static_cast<double>(t_[seg.rows[r]]));
                }
                if (left.size() < config_.min_leaf || right.size() < config_.min_leaf) continue;
                ++candidates;
                const KsResult ks = ks_two_sample(left, right);
                if (ks.statistic > best_stat) {
                    best_stat = ks.statistic;
                    best_p = ks.p_value;
                    best_dim = static_cast<std::size_t>(j);
                    best_threshold = threshold;
                }
            }
        }
        if (candidates == 0 || std::min(1.0, best_p * static_cast<double>(candidates)) >= config_.p_split) {
            leaves_.push_back(std::move(seg));
            return;
        }
        Segment l{{}, seg.lower, seg.upper};
        Segment r{{}, seg.lower, seg.upper};
        l.upper[best_dim] = best_threshold;
        r.lower[best_dim] = best_threshold;
        for (std::size_t row : seg.rows) {
            (x_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(best_dim)) < best_threshold ? l : r)
                .rows.push_back(row);
        }
        grow(std::move(l));
        grow(std::move(r));
    }

    std::vector<Segment>& leaves() { return leaves_; }

private:
    const Matrix& x_;
    std::span<const std::int64_t> t_;
    const KolmogorovTreeConfig& config_;
    std::vector<Segment> leaves_;
};

}  // namespace

LocalizationResult kolmogorov_segment(const Matrix& x, std::span<const std::int64_t> t,
                                      const KolmogorovTreeConfig& config) {
    config.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    if (n == 0) throw InvalidArgument("kolmogorov_segment: empty window");
    if (t.size() != n) throw InvalidArgument("kolmogorov_segment: one time stamp per sample required");
    if (!x.allFinite()) throw InputError("kolmogorov_segment: non-finite feature value");

    const double inf = std::numeric_limits<double>::infinity();
    Segment root;
    root.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) root.rows[i] = i;
    root.lower.assign(static_cast<std::size_t>(x.cols()), -inf);
    root.upper.assign(static_cast<std::size_t>(x.cols()), inf);

    Grower grower(x, t, config);
    grower.grow(std::move(root));
    auto& leaves = grower.leaves();

    std::vector<double> all_times(n);
    for (std::size_t i = 0; i < n; ++i) all_times[i] = static_cast<double>(t[i]);

    LocalizationResult result;
    result.per_sample_scores.assign(n, 0.0);
    result.segments = std::vector<std::size_t>(n, 0);
    result.threshold = 1.0 - config.alpha / static_cast<double>(leaves.size());
    std::vector<RegionScore> regions;
    std::vector<double> times;
    for (std::size_t s = 0; s < leaves.size(); ++s) {
        times.clear();
        for (std::size_t row : leaves[s].rows) times.push_back(all_times[row]);
        const double p = ks_two_sample(times, all_times).p_value;
        for (std::size_t row : leaves[s].rows) {
            result.per_sample_scores[row] = 1.0 - p;
            (*result.segments)[row] = s;
        }
        regions.push_back({leaves[s].lower, leaves[s].upper, 1.0 - p, p});
    }
    result.per_region = std::move(regions);
    return result;
}

}  // namespace driftbench
