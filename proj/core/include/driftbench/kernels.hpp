#pragma once

#include <optional>
#include <span>
#include <vector>

#include "driftbench/common.hpp"

namespace driftbench {

enum class KernelFamily { Rbf, Linear };

/// RBF: k(x,y) = exp(-|x-y|^2 / (2 h^2)); Linear: k(x,y) = <x,y>.
struct KernelSpec {
    KernelFamily family = KernelFamily::Rbf;
    /// Explicit RBF bandwidth h; nullopt selects the median heuristic.
    std::optional<double> bandwidth;

    static KernelSpec rbf(double h) { return {KernelFamily::Rbf, h}; }
    static KernelSpec rbf_median() { return {KernelFamily::Rbf, std::nullopt}; }
    static KernelSpec linear() { return {KernelFamily::Linear, std::nullopt}; }

    void validate() const;
};

/// Symmetric kernel matrix with provenance of its rows.
struct KernelMatrix {
    Matrix values;
    std::vector<std::size_t> sample_ids;

    std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

/// Median of the non-zero pairwise Euclidean distances; 1.0 if there are none.
double median_heuristic(const Matrix& x);

/// Kernel with the bandwidth fixed for data `x` (no-op for explicit bandwidths).
KernelSpec resolve_kernel(const KernelSpec& spec, const Matrix& x);

/// k(a, b) for a resolved spec.
double kernel_value(const KernelSpec& resolved, const double* a, const double* b, Eigen::Index d);

/// Throws InputError on non-finite features.
KernelMatrix kernel_matrix(const Matrix& x, const KernelSpec& spec);

/// Biased MMD^2 estimate with reference rows [0, split) and current rows [split, n).
double mmd_biased(const Matrix& k, std::size_t split);
double mmd_biased(const KernelMatrix& k, std::size_t split);

/// H K H with H = I - 11^T / n.
Matrix double_center(const Matrix& k);

/// trace(K_X H K_T H) / n^2.
double hsic_statistic(const KernelMatrix& kx, const KernelMatrix& kt);
/// Same statistic against a precomputed H K_T H.
double hsic_statistic_centered(const Matrix& kx, const Matrix& centered_kt);

/// Weighted kernel variance of contiguous segments, O(1) per query.
///
/// cost(a, b] = (1/n) * [ sum_i K_ii - (1/(b-a)) sum_ij K_ij ] over rows a..b-1,
/// which is the kernel variance of the segment weighted by its length / n.
class SegmentCost {
public:
    explicit SegmentCost(const Matrix& k);

    double operator()(std::size_t a, std::size_t b) const;
    std::size_t size() const { return n_; }

private:
    double block_sum(std::size_t a, std::size_t b) const;

    std::size_t n_;
    std::vector<double> diag_prefix_;
    // (n+1)^2 table of rectangle sums from the origin
    std::vector<double> prefix_;
};

double segment_cost(const KernelMatrix& k, std::size_t a, std::size_t b);

/// MMD between consecutive windows of length l: entry i covers samples
/// [i, i+2l) split at i+l, so the series has n - 2l + 1 entries (empty when
/// n < 2l). Kernel values are only evaluated inside the 2l band.
std::vector<double> moving_mmd(const Matrix& x, std::size_t l, const KernelSpec& spec);

}  // namespace driftbench
