#pragma once

#include <span>
#include <vector>

#include "driftbench/common.hpp"

namespace driftbench {

/// Mann-Whitney ROC-AUC with average ranks for ties.
/// Throws InvalidArgument unless both classes are present.
double roc_auc(std::span<const double> scores, const Labels& labels);
double roc_auc(std::span<const double> scores, const std::vector<bool>& labels);

/// (1 + #{permuted >= observed}) / (B + 1).
double permutation_p(double observed, std::span<const double> permuted);

/// Linear-interpolated quantile (numpy default) of unsorted data.
double quantile(std::vector<double> values, double q);

double mean(std::span<const double> values);
double variance(std::span<const double> values);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

/// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace driftbench
