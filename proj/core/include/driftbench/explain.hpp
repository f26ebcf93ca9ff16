#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "driftbench/classifiers.hpp"
#include "driftbench/common.hpp"
#include "driftbench/streams.hpp"

namespace driftbench {

/// Rows whose index lies in the open interval (center - l/2, center + l/2).
std::vector<std::size_t> window_rows(std::size_t n, double center, double l);

/// ceil(|W|^(1 / (dims + 1))) clamped to [2, 32].
std::size_t default_bins(std::size_t window_size, std::size_t dims);

/// Total variation 1/2 sum |p - q| between two histograms given as counts.
double total_variation(std::span<const double> a, std::span<const double> b);

/// Feature-wise drift magnitude: TV distance between the equal-width
/// histograms of features F in the windows around s and t. The grid spans
/// the union of both windows. `bins` defaults to default_bins(|W_s|, |F|).
double drift_magnitude(const Matrix& x, double s, double t, double l, std::span<const std::size_t> features,
                       std::optional<std::size_t> bins = std::nullopt);

/// Conditional drift magnitude of F given F': TV of F within every F' cell,
/// weighted by the cell's probability in the union window. A cell populated
/// by only one window counts as TV 1. `bins` defaults to
/// default_bins(|W_s|, |F| + |F'|).
double conditional_drift_magnitude(const Matrix& x, double s, double t, double l,
                                   std::span<const std::size_t> features,
                                   std::span<const std::size_t> given,
                                   std::optional<std::size_t> bins = std::nullopt);

struct FeatureImportance {
    std::size_t feature = 0;
    double baseline = 0.0;
    double permuted = 0.0;
    double importance = 0.0;
};

struct FeatureImportanceReport {
    std::vector<FeatureImportance> features;
};

/// Permutation importance of the window classifier: a feature's values are
/// shuffled among the held-out rows of each fold and the out-of-fold AUC is
/// recomputed, averaged over `n_repeats` shuffles.
FeatureImportanceReport permutation_importance(const WindowPair& pair, const ClassifierSpec& classifier,
                                               const CvConfig& cv, std::size_t n_repeats, std::uint64_t seed);

}  // namespace driftbench
