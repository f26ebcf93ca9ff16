#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "driftbench/detectors.hpp"
#include "driftbench/eval.hpp"

namespace driftbench {

namespace {

constexpr std::string_view kMethodNames[] = {"kswin", "ks",      "mmd",  "d3",
                                             "shapedd", "dawidd", "kcpd", "kcpd-global"};

// Permuted statistics that equal the observed one up to rounding count as ties.
double tie_tolerance(const Matrix& k) { return 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff()); }

void require_bootstrap(std::size_t bootstrap) {
    if (bootstrap < 1) {
        throw InvalidArgument("bootstrap count B must be at least 1");
    }
}

}  // namespace

DriftScore DriftScore::from_p_value(double statistic, double p, std::optional<std::size_t> change_point) {
    DriftScore s;
    s.statistic = statistic;
    s.p_value = std::clamp(p, 0.0, 1.0);
    s.score = 1.0 - *s.p_value;
    s.change_point = change_point;
    return s;
}

DriftScore DriftScore::from_score(double statistic, double score, std::optional<std::size_t> change_point) {
    DriftScore s;
    s.statistic = statistic;
    s.score = score;
    s.change_point = change_point;
    return s;
}

std::string_view to_string(Method method) { return kMethodNames[static_cast<int>(method)]; }

Method parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::replace(lower.begin(), lower.end(), '_', '-');
    for (std::size_t i = 0; i < std::size(kMethodNames); ++i) {
        if (lower == kMethodNames[i]) {
            return static_cast<Method>(i);
        }
    }
    if (lower == "kcpdglobal") return Method::KcpdGlobal;
    throw InvalidArgument("unknown detector '" + std::string(name) + "'");
}

std::vector<std::string_view> method_names() {
    return {std::begin(kMethodNames), std::end(kMethodNames)};
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid(1001);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = static_cast<double>(i) / 1000.0;
    }
    return grid;
}

void DetectorConfig::validate() const {
    kernel.validate();
    require_bootstrap(bootstrap);
    if (!(p_detect > 0.0 && p_detect < 1.0)) {
        throw InvalidArgument("p_detect must lie in (0, 1)");
    }
    KswinConfig{kswin_reference, kswin_current, kswin_min, p_detect}.validate();
    classifier.validate();
    if (cv.n_folds < 2) {
        throw InvalidArgument("cv.n_folds must be at least 2");
    }
    if (shape_window < 1) {
        throw InvalidArgument("shape_window must be positive");
    }
    if (alpha_grid.empty()) {
        throw InvalidArgument("alpha_grid must not be empty");
    }
    for (double a : alpha_grid) {
        if (!(a > 0.0 || a == 0.0) || a > 1.0) {
            throw InvalidArgument("alpha_grid values must lie in [0, 1]");
        }
    }
    if (kcpd_max_change_points < 1) {
        throw InvalidArgument("kcpd_max_change_points must be positive");
    }
}

DriftScore mmd_permutation_test(const Matrix& k, std::size_t split, std::size_t bootstrap,
                                std::uint64_t seed) {
    require_bootstrap(bootstrap);
    const std::size_t n = static_cast<std::size_t>(k.rows());
    if (split < 2 || n - split < 2 || split >= n) {
        throw InvalidArgument("mmd test: both windows need at least 2 samples");
    }
    const double wa = 1.0 / static_cast<double>(split);
    const double wb = -1.0 / static_cast<double>(n - split);
    Vector w(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        w[static_cast<Eigen::Index>(i)] = i < split ? wa : wb;
    }
    const double observed = w.dot(k * w);

    std::vector<double> permuted(bootstrap);
    std::vector<std::size_t> order(n);
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t b = 0; b < bootstrap; ++b) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, b));
        rng.shuffle(order);
        for (std::size_t i = 0; i < n; ++i) {
            v[static_cast<Eigen::Index>(order[i])] = i < split ? wa : wb;
        }
        permuted[b] = v.dot(k * v);
    }
    const double p = permutation_p(observed - tie_tolerance(k), permuted);
    return DriftScore::from_p_value(std::max(observed, 0.0), p, split);
}

DriftScore mmd_detect(const WindowPair& pair, const KernelSpec& kernel, std::size_t bootstrap,
                      std::uint64_t seed) {
    require_bootstrap(bootstrap);
    if (pair.reference.rows() < 2 || pair.current.rows() < 2) {
        throw InvalidArgument("mmd_detect: both windows need at least 2 samples");
    }
    const Matrix pooled = pair.pooled();
    const KernelMatrix k = kernel_matrix(pooled, kernel);
    DriftScore s = mmd_permutation_test(k.values, static_cast<std::size_t>(pair.reference.rows()),
                                        bootstrap, seed);
    s.change_point = pair.split_index;
    return s;
}

DriftScore d3_detect(const WindowPair& pair, const ClassifierSpec& classifier, const CvConfig& cv) {
    const auto folds = static_cast<Eigen::Index>(cv.n_folds);
    if (pair.reference.rows() < folds || pair.current.rows() < folds) {
        throw InvalidArgument("d3_detect: each window needs at least n_folds samples");
    }
    const double auc = cv_auc(classifier, pair.pooled(), pair.labels(), cv);
    return DriftScore::from_score(auc, auc, pair.split_index);
}

DawiddTest::DawiddTest(KernelSpec kernel, KernelSpec time_kernel)
    : kernel_(kernel), time_kernel_(time_kernel) {
    kernel_.validate();
    time_kernel_.validate();
}

const Matrix& DawiddTest::centered_time_kernel(std::size_t n) {
    auto it = cache_.find(n);
    if (it != cache_.end()) {
        return it->second;
    }
    Matrix t(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) {
        t(static_cast<Eigen::Index>(i), 0) = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    }
    const KernelMatrix kt = kernel_matrix(t, time_kernel_);
    return cache_.emplace(n, double_center(kt.values)).first->second;
}

DriftScore DawiddTest::operator()(const Matrix& chunk, std::size_t bootstrap, std::uint64_t seed) {
    require_bootstrap(bootstrap);
    const std::size_t n = static_cast<std::size_t>(chunk.rows());
    if (n < 3) {
        throw InvalidArgument("dawidd_detect: chunk needs at least 3 samples");
    }
    const Matrix& m = centered_time_kernel(n);
    const Matrix kx = kernel_matrix(chunk, kernel_).values;
    const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    const double observed = kx.cwiseProduct(m).sum() * norm;

    std::vector<double> permuted(bootstrap);
    std::vector<std::size_t> order(n);
    for (std::size_t b = 0; b < bootstrap; ++b) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, b));
        rng.shuffle(order);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* krow = kx.data() + order[i] * n;
            const double* mrow = m.data() + i * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                acc += krow[order[j]] * mrow[j];
            }
            total += acc;
        }
        permuted[b] = total * norm;
    }
    const double tol = 1e-12 * std::max(1.0, kx.cwiseAbs().maxCoeff()) * m.cwiseAbs().maxCoeff();
    return DriftScore::from_p_value(observed, permutation_p(observed - tol, permuted));
}

DriftScore dawidd_detect(const Matrix& chunk, const KernelSpec& kernel, const KernelSpec& time_kernel,
                         std::size_t bootstrap, std::uint64_t seed) {
    DawiddTest test(kernel, time_kernel);
    return test(chunk, bootstrap, seed);
}

namespace {

DriftScore kswin_chunk(const Matrix& rows, const DetectorConfig& config, std::uint64_t seed) {
    const std::size_t n = static_cast<std::size_t>(rows.rows());
    KswinConfig kc;
    kc.n_max2 = n / 2;
    kc.n_max1 = n - kc.n_max2;
    kc.n_min = std::min(config.kswin_min, kc.n_max1 - 1);
    kc.p_detect = config.p_detect;
    const KswinResult res = kswin_stream(rows, kc, seed);
    DriftScore s = res.steps.back().score;
    s.change_point = kc.n_max1;
    return s;
}

// Strongest candidate strictly inside each chunk; no candidate scores as p = 1.
std::vector<DriftScore> reduce_candidates(const std::vector<DriftScore>& candidates,
                                          const std::vector<Chunk>& chunks) {
    std::vector<DriftScore> out;
    out.reserve(chunks.size());
    for (const Chunk& c : chunks) {
        DriftScore best = DriftScore::from_p_value(0.0, 1.0);
        bool found = false;
        for (const DriftScore& s : candidates) {
            if (!s.change_point) continue;
            const std::size_t cp = *s.change_point;
            if (cp > c.start && cp < c.end && (!found || s.score > best.score)) {
                best = s;
                found = true;
            }
        }
        if (found) {
            best.change_point = *best.change_point - c.start;
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace

std::vector<DriftScore> score_chunks(const Stream& stream, const std::vector<Chunk>& chunks,
                                     const DetectorConfig& config) {
    config.validate();
    for (const Chunk& c : chunks) {
        if (c.end > stream.size() || c.start >= c.end) {
            throw InvalidArgument("score_chunks: chunk outside the stream");
        }
    }

    if (config.method == Method::ShapeDD) {
        const auto candidates =
            shapedd_detect(stream.x, config.shape_window, config.kernel, config.bootstrap, config.seed,
                           config.shape_test_window);
        return reduce_candidates(candidates, chunks);
    }
    if (config.method == Method::KcpdGlobal) {
        const KernelMatrix k = kernel_matrix(stream.x, config.kernel);
        const std::size_t n_max = std::min(config.kcpd_max_change_points, stream.size() - 1);
        const KcpdTable table = kcpd_segment(k, n_max);
        std::vector<DriftScore> out;
        out.reserve(chunks.size());
        for (const Chunk& c : chunks) {
            double best = 0.0;
            double running_min = 1.0;
            std::optional<std::size_t> where;
            for (std::size_t kk = 1; kk <= n_max; ++kk) {
                running_min = std::min(running_min, kcpd_improvement(table, kk));
                for (std::size_t cp : table.change_points[kk]) {
                    if (cp > c.start && cp < c.end && running_min > best) {
                        best = running_min;
                        where = cp - c.start;
                    }
                }
            }
            out.push_back(DriftScore::from_score(best, alpha_score(best, config.alpha_grid), where));
        }
        return out;
    }

    DawiddTest dawidd(config.kernel, KernelSpec::rbf_median());
    std::vector<DriftScore> out;
    out.reserve(chunks.size());
    for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
        const Chunk& c = chunks[ci];
        const std::uint64_t seed = derive_seed(config.seed, ci);
        const Matrix rows = slice_rows(stream.x, c.start, c.end);
        switch (config.method) {
            case Method::Kswin:
                out.push_back(kswin_chunk(rows, config, seed));
                break;
            case Method::Ks:
                out.push_back(ks_detect(split_mid(rows)));
                break;
            case Method::Mmd:
                out.push_back(mmd_detect(split_mid(rows), config.kernel, config.bootstrap, seed));
                break;
            case Method::D3: {
                CvConfig cv = config.cv;
                cv.seed = derive_seed(config.cv.seed ^ config.seed, ci);
                out.push_back(d3_detect(split_mid(rows), config.classifier, cv));
                break;
            }
            case Method::Dawidd:
                out.push_back(dawidd(rows, config.bootstrap, seed));
                break;
            case Method::Kcpd:
                out.push_back(kcpd_detect(rows, config.kernel, config.alpha_grid));
                break;
            default:
                throw InvalidArgument("score_chunks: unsupported method");
        }
    }
    return out;
}

}  // namespace driftbench
