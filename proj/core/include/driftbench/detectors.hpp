#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "driftbench/classifiers.hpp"
#include "driftbench/common.hpp"
#include "driftbench/kernels.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/streams.hpp"

namespace driftbench {

/// Evidence of drift, oriented so that a higher score means more drift.
struct DriftScore {
    double statistic = 0.0;
    std::optional<double> p_value;
    double score = 0.0;
    /// Index of the first sample of the new concept, when the method locates it.
    std::optional<std::size_t> change_point;

    static DriftScore from_p_value(double statistic, double p,
                                   std::optional<std::size_t> change_point = std::nullopt);
    static DriftScore from_score(double statistic, double score,
                                 std::optional<std::size_t> change_point = std::nullopt);
};

enum class Method { Kswin, Ks, Mmd, D3, ShapeDD, Dawidd, Kcpd, KcpdGlobal };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
std::vector<std::string_view> method_names();

/// Uniform grid {0, 0.001, ..., 1} used to turn the KCpD improvement ratio into a score.
std::vector<double> default_alpha_grid();

struct DetectorConfig {
    Method method = Method::Mmd;
    KernelSpec kernel = KernelSpec::rbf_median();
    std::size_t bootstrap = 2500;
    double p_detect = 0.05;

    // KSWIN windows
    std::size_t kswin_reference = 100;
    std::size_t kswin_current = 100;
    std::size_t kswin_min = 50;

    // D3 window classifier
    ClassifierSpec classifier = ClassifierSpec::logistic();
    CvConfig cv;

    // ShapeDD moving-MMD window l and test window per side (0: same as l)
    std::size_t shape_window = 50;
    std::size_t shape_test_window = 0;

    // KCpD
    std::vector<double> alpha_grid = default_alpha_grid();
    std::size_t kcpd_max_change_points = 8;

    std::uint64_t seed = 0;

    void validate() const;
};

// --- Kolmogorov-Smirnov -----------------------------------------------------

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// Two-sample KS test with the asymptotic p-value at the effective sample size.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Feature-wise KS on a window pair. p is the minimum over features; the
/// statistic is the KS distance of the feature attaining it.
DriftScore ks_detect(const WindowPair& pair);

struct KswinConfig {
    std::size_t n_max1 = 100;  ///< reference window cap
    std::size_t n_max2 = 100;  ///< current window cap
    std::size_t n_min = 50;    ///< test once the reference window exceeds this
    double p_detect = 0.05;

    void validate() const;
};

/// Streaming two-window KS detector. Each update appends to the current
/// window, moves its overflow into the reference window and drops the oldest
/// reference sample on overflow. Alarm iff min_j p_j < p_detect / d.
class Kswin {
public:
    struct Step {
        bool evaluated = false;
        bool alarm = false;
        DriftScore score;
    };

    Kswin(KswinConfig config, std::size_t dims, std::uint64_t seed);

    Step update(std::span<const double> x);

    std::size_t reference_size() const { return reference_.size(); }
    std::size_t current_size() const { return current_.size(); }

private:
    KswinConfig config_;
    std::size_t dims_;
    Rng rng_;
    std::deque<std::vector<double>> reference_;
    std::deque<std::vector<double>> current_;
};

struct KswinResult {
    std::vector<std::size_t> alarms;
    /// One entry per sample; `evaluated` is false while the reference window fills.
    std::vector<Kswin::Step> steps;
};

KswinResult kswin_stream(const Matrix& x, const KswinConfig& config, std::uint64_t seed);

// --- kernel two-sample / independence tests ---------------------------------

/// Permutation test of the biased MMD on a kernel matrix whose first `split`
/// rows are the reference window.
DriftScore mmd_permutation_test(const Matrix& k, std::size_t split, std::size_t bootstrap,
                                std::uint64_t seed);

/// MMD two-sample test on the pooled window pair with B random relabelings.
DriftScore mmd_detect(const WindowPair& pair, const KernelSpec& kernel, std::size_t bootstrap,
                      std::uint64_t seed);

/// Virtual classifier: cross-validated ROC-AUC of reference (0) vs current (1).
DriftScore d3_detect(const WindowPair& pair, const ClassifierSpec& classifier, const CvConfig& cv);

/// HSIC independence test between data and time with a cached H K_T H per chunk size.
class DawiddTest {
public:
    explicit DawiddTest(KernelSpec kernel = KernelSpec::rbf_median(),
                        KernelSpec time_kernel = KernelSpec::rbf_median());

    DriftScore operator()(const Matrix& chunk, std::size_t bootstrap, std::uint64_t seed);

    /// H K_T H for sample indices rescaled to [0, 1].
    const Matrix& centered_time_kernel(std::size_t n);

private:
    KernelSpec kernel_;
    KernelSpec time_kernel_;
    std::map<std::size_t, Matrix> cache_;
};

DriftScore dawidd_detect(const Matrix& chunk, const KernelSpec& kernel, const KernelSpec& time_kernel,
                         std::size_t bootstrap, std::uint64_t seed);

// --- ShapeDD ------------------------------------------------------------------

/// Shape match of a moving-MMD series: entry t is the mean of the next l
/// values minus the mean of the l values ending at t, so it changes sign from
/// positive to negative at a peak. NaN where the window leaves the series.
std::vector<double> shape_match(std::span<const double> series, std::size_t l);

/// Indices t with match[t] > 0 and match[t + 1] <= 0.
std::vector<std::size_t> shape_crossings(std::span<const double> match);

/// Scan test of a ShapeDD candidate. The test window w per side is
/// test_window shrunk to the distance to the neighbouring candidates `lower`
/// and `upper` (but not below l) and to the stream boundary. The statistic is
/// the largest MMD between adjacent w-windows over splits within
/// max(l, test_window) of `cp`; the null is the same maximum under
/// permutations of the samples those windows cover. The change point is the
/// maximizing split.
DriftScore shapedd_candidate_test(const Matrix& x, std::size_t cp, std::size_t l, std::size_t test_window,
                                  const KernelSpec& resolved, std::size_t bootstrap, std::uint64_t seed,
                                  std::size_t lower = 0, std::size_t upper = SIZE_MAX);

/// Candidate change points one step after the positive-to-negative crossings
/// of the shape match. A candidate is tested unless another one within
/// test_window has a larger MMD at its own position; of tests that locate
/// changes within test_window of each other only the strongest is kept.
/// `test_window` 0 means l. Empty when the stream is shorter than 4l.
std::vector<DriftScore> shapedd_detect(const Matrix& x, std::size_t l, const KernelSpec& kernel,
                                       std::size_t bootstrap, std::uint64_t seed, std::size_t test_window = 0);

// --- KCpD -----------------------------------------------------------------------

struct KcpdTable {
    /// objective[k][t]: optimal cost of splitting the first t samples into k+1 segments.
    std::vector<std::vector<double>> objective;
    /// change_points[k]: segment starts of the optimal (k+1)-segmentation of all samples.
    std::vector<std::vector<std::size_t>> change_points;

    double final_objective(std::size_t k) const { return objective[k].back(); }
};

/// Exact dynamic program over segment_cost for 0..n_max change points.
KcpdTable kcpd_segment(const KernelMatrix& k, std::size_t n_max);

/// Relative improvement (L[k-1] - L[k]) / L[0] of adding the k-th change point.
double kcpd_improvement(const KcpdTable& table, std::size_t k);

/// Smallest alpha in the grid at which no drift is declared for improvement r.
double alpha_score(double improvement, std::span<const double> alpha_grid);

DriftScore kcpd_detect(const Matrix& chunk, const KernelSpec& kernel, std::span<const double> alpha_grid);

// --- chunk scoring ----------------------------------------------------------------

/// Scores every chunk with the configured method. Two-window methods split at
/// the chunk midpoint; ShapeDD and global KCpD score the whole stream and
/// keep the strongest candidate inside each chunk.
std::vector<DriftScore> score_chunks(const Stream& stream, const std::vector<Chunk>& chunks,
                                     const DetectorConfig& config);

}  // namespace driftbench
