#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftbench/eval.hpp"
#include "driftbench/localizers.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

namespace {

std::span<const double> row_span(const Matrix& x, Eigen::Index i) {
    return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
}

}  // namespace

KdqTree KdqTree::build(const Matrix& x, std::size_t min_samples, std::size_t max_depth) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    if (n == 0 || d == 0) throw InvalidArgument("kdq-tree: empty sample");
    if (!x.allFinite()) throw InputError("kdq-tree: non-finite feature value");

    KdqTree tree;
    Node root;
    root.lower.resize(d);
    root.upper.resize(d);
    bool any_extent = false;
    for (std::size_t j = 0; j < d; ++j) {
        root.lower[j] = x.col(static_cast<Eigen::Index>(j)).minCoeff();
        root.upper[j] = x.col(static_cast<Eigen::Index>(j)).maxCoeff();
        any_extent = any_extent || root.upper[j] > root.lower[j];
    }
    if (!any_extent) throw InvalidArgument("kdq-tree: bounding box has zero extent in every dimension");
    root.count = n;
    tree.nodes_.push_back(root);
    tree.assignments_.assign(n, 0);

    std::vector<std::size_t> members(n);
    std::iota(members.begin(), members.end(), std::size_t{0});
    struct Task {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<Task> stack;
    stack.push_back({0, std::move(members)});
    while (!stack.empty()) {
        Task task = std::move(stack.back());
        stack.pop_back();
        const std::size_t id = task.node;
        for (std::size_t r : task.rows) tree.assignments_[r] = id;
        if (task.rows.size() <= min_samples || tree.nodes_[id].depth >= max_depth) continue;

        std::optional<std::size_t> dim;
        for (std::size_t step = 0; step < d; ++step) {
            const std::size_t j = (tree.nodes_[id].depth + step) % d;
            if (tree.nodes_[id].upper[j] > tree.nodes_[id].lower[j]) {
                dim = j;
                break;
            }
        }
        if (!dim) continue;
        const std::size_t j = *dim;
        const double mid = 0.5 * (tree.nodes_[id].lower[j] + tree.nodes_[id].upper[j]);

        Task left{tree.nodes_.size(), {}};
        Task right{tree.nodes_.size() + 1, {}};
        for (std::size_t r : task.rows) {
            (x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) < mid ? left : right).rows.push_back(r);
        }
        Node l = tree.nodes_[id];
        Node rnode = tree.nodes_[id];
        l.depth = rnode.depth = tree.nodes_[id].depth + 1;
        l.split_dim.reset();
        rnode.split_dim.reset();
        l.upper[j] = mid;
        rnode.lower[j] = mid;
        l.count = left.rows.size();
        rnode.count = right.rows.size();
        tree.nodes_[id].split_dim = j;
        tree.nodes_[id].split = mid;
        tree.nodes_[id].left = left.node;
        tree.nodes_[id].right = right.node;
        tree.nodes_.push_back(std::move(l));
        tree.nodes_.push_back(std::move(rnode));
        stack.push_back(std::move(left));
        stack.push_back(std::move(right));
    }
    return tree;
}

std::size_t KdqTree::leaf_of(std::span<const double> x) const {
    std::size_t id = 0;
    while (!nodes_[id].is_leaf()) {
        const Node& node = nodes_[id];
        id = x[*node.split_dim] < node.split ? node.left : node.right;
    }
    return id;
}

std::vector<std::size_t> KdqTree::leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].is_leaf()) out.push_back(i);
    }
    return out;
}

double kdq_leaf_score(std::size_t a, std::size_t n_a, std::size_t b, std::size_t n_b, std::size_t leaves) {
    const double half = 0.5 * static_cast<double>(leaves);
    const double p = (static_cast<double>(a) + 0.5) / (static_cast<double>(n_a) + half);
    const double q = (static_cast<double>(b) + 0.5) / (static_cast<double>(n_b) + half);
    return (p - q) * std::log(p / q);
}

void KdqConfig::validate() const {
    if (max_depth == 0) throw InvalidArgument("kdq: max_depth must be positive");
    if (bootstrap < 1) throw InvalidArgument("kdq: bootstrap count must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("kdq: alpha must lie in (0, 1)");
}

LocalizationResult kdq_localize(const WindowPair& pair, const KdqConfig& config, std::uint64_t seed) {
    config.validate();
    if (pair.reference.rows() == 0 || pair.current.rows() == 0) {
        throw InvalidArgument("kdq_localize: both windows must be non-empty");
    }
    const Matrix pooled = pair.pooled();
    const Labels labels = pair.labels();
    const KdqTree tree = KdqTree::build(pooled, config.min_samples, config.max_depth);
    const std::vector<std::size_t> leaves = tree.leaves();
    std::vector<std::size_t> slot(tree.nodes().size(), 0);
    for (std::size_t i = 0; i < leaves.size(); ++i) slot[leaves[i]] = i;

    const std::size_t n = labels.size();
    const auto n_a = static_cast<std::size_t>(pair.reference.rows());
    const auto n_b = static_cast<std::size_t>(pair.current.rows());
    std::vector<std::size_t> leaf_of_sample(n);
    for (std::size_t i = 0; i < n; ++i) leaf_of_sample[i] = slot[tree.assignments()[i]];

    auto leaf_scores = [&](const Labels& lab) {
        std::vector<std::size_t> ca(leaves.size(), 0);
        std::vector<std::size_t> cb(leaves.size(), 0);
        for (std::size_t i = 0; i < n; ++i) (lab[i] ? cb : ca)[leaf_of_sample[i]]++;
        std::vector<double> s(leaves.size());
        for (std::size_t k = 0; k < leaves.size(); ++k) {
            s[k] = kdq_leaf_score(ca[k], n_a, cb[k], n_b, leaves.size());
        }
        return s;
    };

    const std::vector<double> observed = leaf_scores(labels);
    std::vector<double> null_max(config.bootstrap);
    Labels perm = labels;
    for (std::size_t b = 0; b < config.bootstrap; ++b) {
        Rng rng(derive_seed(seed, b));
        rng.shuffle(perm);
        const auto s = leaf_scores(perm);
        null_max[b] = *std::max_element(s.begin(), s.end());
    }

    LocalizationResult result;
    result.threshold = quantile(null_max, 1.0 - config.alpha);
    result.per_sample_scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.per_sample_scores[i] = observed[leaf_of_sample[i]];
    std::vector<RegionScore> regions;
    regions.reserve(leaves.size());
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        const auto& node = tree.nodes()[leaves[k]];
        regions.push_back({node.lower, node.upper, observed[k], permutation_p(observed[k], null_max)});
    }
    result.per_region = std::move(regions);
    return result;
}

double local_drift_degree(std::size_t same, std::size_t other) {
    return static_cast<double>(same) / static_cast<double>(std::max<std::size_t>(other, 1)) - 1.0;
}

void LddConfig::validate() const {
    if (k < 1) throw InvalidArgument("ldd_dis: k must be positive");
    if (bootstrap < 1) throw InvalidArgument("ldd_dis: bootstrap count must be at least 1");
}

LocalizationResult ldd_dis(const WindowPair& pair, const LddConfig& config, std::uint64_t seed) {
    config.validate();
    if (pair.reference.rows() < 1 || pair.current.rows() < 1) {
        throw InvalidArgument("ldd_dis: both windows must be non-empty");
    }
    const Matrix pooled = pair.pooled();
    const Labels labels = pair.labels();
    const std::size_t n = labels.size();
    if (config.k >= n) throw InvalidArgument("ldd_dis: k must be below the pooled sample size");
    if (!pooled.allFinite()) throw InputError("ldd_dis: non-finite feature value");

    const Vector sq = pooled.rowwise().squaredNorm();
    const Matrix gram = pooled * pooled.transpose();
    std::vector<std::size_t> neighbours(n * config.k);
    std::vector<std::pair<double, std::size_t>> dist(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            dist[m++] = {sq[ii] + sq[jj] - 2.0 * gram(ii, jj), j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(config.k), dist.end());
        for (std::size_t r = 0; r < config.k; ++r) neighbours[i * config.k + r] = dist[r].second;
    }

    auto ldd = [&](const Labels& lab, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t same = 0;
            for (std::size_t r = 0; r < config.k; ++r) same += lab[neighbours[i * config.k + r]] == lab[i];
            out[i] = local_drift_degree(same, config.k - same);
        }
    };

    std::vector<double> observed(n);
    ldd(labels, observed);

    std::vector<double> pooled_null;
    pooled_null.reserve(n * config.bootstrap);
    std::vector<double> buffer(n);
    Labels perm = labels;
    for (std::size_t b = 0; b < config.bootstrap; ++b) {
        Rng rng(derive_seed(seed, b));
        rng.shuffle(perm);
        ldd(perm, buffer);
        pooled_null.insert(pooled_null.end(), buffer.begin(), buffer.end());
    }
    const double mu = mean(pooled_null);
    const double sd = std::sqrt(variance(pooled_null));

    LocalizationResult result;
    result.per_sample_scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.per_sample_scores[i] = sd > 0.0 ? std::abs(observed[i] - mu) / sd : 0.0;
    }
    return result;
}

double informativity(double p, double prior) {
    if (!(prior > 0.0 && prior < 1.0)) throw InvalidArgument("informativity: prior must lie in (0, 1)");
    auto term = [](double a, double b) { return a > 0.0 ? a * std::log(a / b) : 0.0; };
    const double pc = std::clamp(p, 0.0, 1.0);
    const double kl = term(pc, prior) + term(1.0 - pc, 1.0 - prior);
    const double norm = -std::log(std::min(prior, 1.0 - prior));
    return std::clamp(kl / norm, 0.0, 1.0);
}

ClassifierSpec default_mb_classifier() {
    ClassifierSpec spec = ClassifierSpec::random_forest();
    spec.min_leaf = 10;
    return spec;
}

void MbConfig::validate() const {
    classifier.validate();
    if (cv.n_folds < 2) throw InvalidArgument("mb_localize: cv needs at least 2 folds");
}

LocalizationResult mb_localize(const WindowPair& pair, const MbConfig& config) {
    config.validate();
    const auto folds = static_cast<Eigen::Index>(config.cv.n_folds);
    if (pair.reference.rows() < folds || pair.current.rows() < folds) {
        throw InvalidArgument("mb_localize: each window needs at least n_folds samples");
    }
    const Matrix pooled = pair.pooled();
    const Labels labels = pair.labels();
    const double prior = static_cast<double>(pair.current.rows()) / static_cast<double>(labels.size());

    auto scores = [&](const Labels& lab, std::uint64_t cv_seed) {
        CvConfig cv = config.cv;
        cv.seed = cv_seed;
        const Vector p = cross_val_predict(config.classifier, pooled, lab, cv);
        std::vector<double> s(labels.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = informativity(p[static_cast<Eigen::Index>(i)], prior);
        return s;
    };

    LocalizationResult result;
    result.per_sample_scores = scores(labels, config.cv.seed);
    if (config.bootstrap > 0) {
        const std::size_t n = labels.size();
        std::vector<std::size_t> exceed(n, 0);
        Labels perm = labels;
        for (std::size_t b = 0; b < config.bootstrap; ++b) {
            Rng rng(derive_seed(config.cv.seed, 1000003 + b));
            rng.shuffle(perm);
            const auto s = scores(perm, derive_seed(config.cv.seed, b + 1));
            for (std::size_t i = 0; i < n; ++i) exceed[i] += s[i] >= result.per_sample_scores[i];
        }
        std::vector<RegionScore> regions(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = row_span(pooled, static_cast<Eigen::Index>(i));
            regions[i].lower.assign(row.begin(), row.end());
            regions[i].upper = regions[i].lower;
            regions[i].score = result.per_sample_scores[i];
            regions[i].p_value = (1.0 + static_cast<double>(exceed[i])) / (static_cast<double>(config.bootstrap) + 1.0);
        }
        result.per_region = std::move(regions);
    }
    return result;
}

}  // namespace driftbench
