#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "driftbench/classifiers.hpp"
#include "driftbench/rng.hpp"

namespace driftbench::detail {
namespace {

struct Node {
    // internal: feature >= 0, go left iff x[feature] <= threshold
    int feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
};

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

class TreeBuilder {
public:
    TreeBuilder(const ClassifierSpec& spec, const Matrix& x, const Labels& y, Rng& rng)
        : spec_(spec), x_(x), y_(y), rng_(rng) {
        const auto d = static_cast<std::size_t>(x.cols());
        const auto default_features = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(d))));
        max_features_ = std::clamp<std::size_t>(spec.max_features.value_or(std::max<std::size_t>(1, default_features)), 1, d);
        max_depth_ = spec.max_depth.value_or(std::numeric_limits<std::size_t>::max());
    }

    std::vector<Node> build(std::vector<std::size_t> rows) {
        nodes_.clear();
        grow(rows, 0);
        return std::move(nodes_);
    }

private:
    std::int32_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        std::size_t pos = 0;
        for (std::size_t r : rows) pos += y_[r] != 0 ? 1 : 0;
        nodes_[static_cast<std::size_t>(id)].value = static_cast<double>(pos) / static_cast<double>(rows.size());

        const bool pure = pos == 0 || pos == rows.size();
        if (pure || depth >= max_depth_ || rows.size() < 2 * spec_.min_leaf) return id;

        const Split split = find_split(rows);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : rows) {
            (x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const std::int32_t l = grow(left, depth + 1);
        const std::int32_t r = grow(right, depth + 1);
        Node& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    // Features are visited in random order; the search stops once max_features
    // have been inspected and at least one valid split exists.
    Split find_split(const std::vector<std::size_t>& rows) {
        std::vector<int> features(static_cast<std::size_t>(x_.cols()));
        std::iota(features.begin(), features.end(), 0);
        rng_.shuffle(features);
        Split best;
        std::size_t visited = 0;
        for (int f : features) {
            if (visited >= max_features_ && best.feature >= 0) break;
            ++visited;
            const Split s = spec_.extra_trees ? random_split(rows, f) : best_split(rows, f);
            if (s.feature >= 0 && s.impurity < best.impurity) best = s;
        }
        return best;
    }

    Split best_split(const std::vector<std::size_t>& rows, int f) {
        const auto fi = static_cast<Eigen::Index>(f);
        std::vector<std::pair<double, std::uint8_t>> vals(rows.size());
        double total_pos = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            vals[i] = {x_(static_cast<Eigen::Index>(rows[i]), fi), y_[rows[i]]};
            total_pos += y_[rows[i]] != 0 ? 1.0 : 0.0;
        }
        std::sort(vals.begin(), vals.end());
        const double n = static_cast<double>(rows.size());
        Split best;
        double left_pos = 0.0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            left_pos += vals[i].second != 0 ? 1.0 : 0.0;
            const std::size_t n_left = i + 1;
            if (vals[i].first == vals[i + 1].first) continue;
            if (n_left < spec_.min_leaf || vals.size() - n_left < spec_.min_leaf) continue;
            const double nl = static_cast<double>(n_left);
            const double nr = n - nl;
            const double right_pos = total_pos - left_pos;
            // n_l * gini_l + n_r * gini_r with gini = 2 p (1 - p)
            const double impurity = 2.0 * (left_pos * (nl - left_pos) / nl + right_pos * (nr - right_pos) / nr);
            if (impurity < best.impurity) {
                best.feature = f;
                best.impurity = impurity;
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                // midpoint can round up to the right value; keep the left value on the left
                if (!(best.threshold < vals[i + 1].first)) best.threshold = vals[i].first;
            }
        }
        return best;
    }

    Split random_split(const std::vector<std::size_t>& rows, int f) {
        const auto fi = static_cast<Eigen::Index>(f);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t r : rows) {
            lo = std::min(lo, x_(static_cast<Eigen::Index>(r), fi));
            hi = std::max(hi, x_(static_cast<Eigen::Index>(r), fi));
        }
        if (!(lo < hi)) return {};
        double threshold = rng_.uniform(lo, hi);
        if (threshold >= hi) threshold = lo;
        double nl = 0.0;
        double lp = 0.0;
        double tp = 0.0;
        for (std::size_t r : rows) {
            const bool pos = y_[r] != 0;
            tp += pos ? 1.0 : 0.0;
            if (x_(static_cast<Eigen::Index>(r), fi) <= threshold) {
                nl += 1.0;
                lp += pos ? 1.0 : 0.0;
            }
        }
        const double nr = static_cast<double>(rows.size()) - nl;
        if (nl < static_cast<double>(spec_.min_leaf) || nr < static_cast<double>(spec_.min_leaf)) return {};
        const double rp = tp - lp;
        Split s;
        s.feature = f;
        s.threshold = threshold;
        s.impurity = 2.0 * (lp * (nl - lp) / nl + rp * (nr - rp) / nr);
        return s;
    }

    const ClassifierSpec& spec_;
    const Matrix& x_;
    const Labels& y_;
    Rng& rng_;
    std::size_t max_features_ = 1;
    std::size_t max_depth_ = 0;
    std::vector<Node> nodes_;
};

class RandomForest final : public ProbabilisticClassifier {
public:
    RandomForest(const ClassifierSpec& spec, const Matrix& x, const Labels& y, std::uint64_t seed) {
        const auto n = static_cast<std::size_t>(x.rows());
        trees_.reserve(spec.n_trees);
        for (std::size_t t = 0; t < spec.n_trees; ++t) {
            // per-tree seed: independent of training order and of thread layout
            Rng rng(derive_seed(seed, t));
            std::vector<std::size_t> rows(n);
            if (spec.bootstrap) {
                for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
            } else {
                std::iota(rows.begin(), rows.end(), std::size_t{0});
            }
            TreeBuilder builder(spec, x, y, rng);
            trees_.push_back(builder.build(std::move(rows)));
        }
    }

    double predict_proba(std::span<const double> x) const override {
        double sum = 0.0;
        for (const auto& tree : trees_) {
            std::size_t node = 0;
            while (tree[node].feature >= 0) {
                const Node& nd = tree[node];
                node = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
            }
            sum += tree[node].value;
        }
        return sum / static_cast<double>(trees_.size());
    }

private:
    std::vector<std::vector<Node>> trees_;
};

}  // namespace

std::unique_ptr<ProbabilisticClassifier> fit_random_forest(const ClassifierSpec& spec,
                                                           const Matrix& x, const Labels& y,
                                                           std::uint64_t seed) {
    return std::make_unique<RandomForest>(spec, x, y, seed);
}

}  // namespace driftbench::detail
