#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftbench/classifiers.hpp"
#include "driftbench/common.hpp"
#include "driftbench/streams.hpp"

namespace driftbench {

/// Axis-aligned region of data space with its drift score.
struct RegionScore {
    std::vector<double> lower;
    std::vector<double> upper;
    double score = 0.0;
    std::optional<double> p_value;
};

struct LocalizationResult {
    /// One entry per sample, higher = more likely inside the drift locus.
    std::vector<double> per_sample_scores;
    std::optional<std::vector<RegionScore>> per_region;
    std::optional<std::vector<std::size_t>> segments;
    /// Region score above which a region is declared drifting, when the method has one.
    std::optional<double> threshold;
};

/// kd-tree over a pooled sample that always splits a node's box in the middle.
class KdqTree {
public:
    struct Node {
        std::vector<double> lower;
        std::vector<double> upper;
        std::size_t depth = 0;
        std::size_t count = 0;
        std::optional<std::size_t> split_dim;
        double split = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;

        bool is_leaf() const { return !split_dim.has_value(); }
    };

    /// A node is split while it holds more than `min_samples` samples and lies
    /// above `max_depth`. Split dimensions cycle with depth, skipping
    /// dimensions of zero extent; samples with x < midpoint go left.
    static KdqTree build(const Matrix& x, std::size_t min_samples = 10, std::size_t max_depth = 20);

    std::size_t leaf_of(std::span<const double> x) const;
    /// Leaf node index for every row used to build the tree.
    const std::vector<std::size_t>& assignments() const { return assignments_; }
    std::vector<std::size_t> leaves() const;
    const std::vector<Node>& nodes() const { return nodes_; }

private:
    std::vector<Node> nodes_;
    std::vector<std::size_t> assignments_;
};

/// Symmetrized KL contribution (p - q) log(p / q) of a leaf holding `a` of
/// `n_a` reference and `b` of `n_b` current samples, with 0.5 added per leaf
/// and window.
double kdq_leaf_score(std::size_t a, std::size_t n_a, std::size_t b, std::size_t n_b, std::size_t leaves);

struct KdqConfig {
    std::size_t min_samples = 10;
    std::size_t max_depth = 20;
    std::size_t bootstrap = 500;
    double alpha = 0.05;

    void validate() const;
};

LocalizationResult kdq_localize(const WindowPair& pair, const KdqConfig& config, std::uint64_t seed);

/// Local drift degree from a neighbourhood count: same / other - 1, with the
/// denominator replaced by 1 when no neighbour comes from the other window.
double local_drift_degree(std::size_t same, std::size_t other);

struct LddConfig {
    std::size_t k = 30;
    std::size_t bootstrap = 100;

    void validate() const;
};

LocalizationResult ldd_dis(const WindowPair& pair, const LddConfig& config, std::uint64_t seed);

/// KL(Bernoulli(p) || Bernoulli(prior)) / -log min(prior, 1 - prior), clamped to [0, 1].
double informativity(double p, double prior);

/// Random forest with leaves of at least 10 samples.
ClassifierSpec default_mb_classifier();

struct MbConfig {
    ClassifierSpec classifier = default_mb_classifier();
    CvConfig cv;
    /// Label permutations for per-sample p-values; 0 skips them.
    std::size_t bootstrap = 0;

    void validate() const;
};

LocalizationResult mb_localize(const WindowPair& pair, const MbConfig& config);

struct KolmogorovTreeConfig {
    std::size_t min_leaf = 20;
    double p_split = 0.01;
    double alpha = 0.05;
    std::size_t max_candidates = 32;

    void validate() const;
};

/// Drift segmentation of a single timestamped window. Splits maximize the KS
/// distance between the children's time stamps; a split is kept when its
/// p-value, corrected for the number of candidate splits, is below p_split.
/// Per-sample scores are 1 - p of the sample's segment against all time stamps;
/// regions are flagged drifting when p < alpha / #segments.
LocalizationResult kolmogorov_segment(const Matrix& x, std::span<const std::int64_t> t,
                                      const KolmogorovTreeConfig& config);

}  // namespace driftbench
