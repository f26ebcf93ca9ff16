#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "driftbench/eval.hpp"
#include "driftbench/explain.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

std::vector<std::size_t> window_rows(std::size_t n, double center, double l) {
    std::vector<std::size_t> rows;
    const double lo = center - 0.5 * l;
    const double hi = center + 0.5 * l;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = static_cast<double>(i);
        if (v > lo && v < hi) rows.push_back(i);
    }
    return rows;
}

std::size_t default_bins(std::size_t window_size, std::size_t dims) {
    const double b = std::ceil(std::pow(static_cast<double>(window_size), 1.0 / static_cast<double>(dims + 1)));
    return static_cast<std::size_t>(std::clamp(b, 2.0, 32.0));
}

double total_variation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("total_variation: histograms differ in size");
    const double sa = std::accumulate(a.begin(), a.end(), 0.0);
    const double sb = std::accumulate(b.begin(), b.end(), 0.0);
    if (!(sa > 0.0) || !(sb > 0.0)) throw InvalidArgument("total_variation: empty histogram");
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] / sa - b[i] / sb);
    return std::min(1.0, 0.5 * tv);
}

namespace {

struct Grid {
    std::vector<std::size_t> features;
    std::vector<double> lo;
    std::vector<double> width;
    std::size_t bins = 1;

    Grid(const Matrix& x, const std::vector<std::size_t>& rows, std::span<const std::size_t> f, std::size_t b)
        : features(f.begin(), f.end()), bins(b) {
        for (std::size_t j : features) {
            double mn = std::numeric_limits<double>::infinity();
            double mx = -mn;
            for (std::size_t r : rows) {
                const double v = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            lo.push_back(mn);
            width.push_back(mx - mn);
        }
    }

    std::uint64_t cell(const Matrix& x, std::size_t row) const {
        std::uint64_t key = 0;
        for (std::size_t k = 0; k < features.size(); ++k) {
            const double v = x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(features[k]));
            std::size_t idx = 0;
            if (width[k] > 0.0) {
                idx = static_cast<std::size_t>(std::floor((v - lo[k]) / width[k] * static_cast<double>(bins)));
                idx = std::min(idx, bins - 1);
            }
            key = key * bins + idx;
        }
        return key;
    }
};

void check_features(const Matrix& x, std::span<const std::size_t> f) {
    if (f.empty()) throw InvalidArgument("drift magnitude: feature set must not be empty");
    for (std::size_t j : f) {
        if (j >= static_cast<std::size_t>(x.cols())) throw InvalidArgument("drift magnitude: feature index out of range");
    }
}

struct Windows {
    std::vector<std::size_t> s;
    std::vector<std::size_t> t;
    std::vector<std::size_t> both;
};

Windows make_windows(const Matrix& x, double s, double t, double l) {
    Windows w;
    const auto n = static_cast<std::size_t>(x.rows());
    w.s = window_rows(n, s, l);
    w.t = window_rows(n, t, l);
    if (w.s.empty() || w.t.empty()) throw InvalidArgument("drift magnitude: empty window");
    w.both = w.s;
    w.both.insert(w.both.end(), w.t.begin(), w.t.end());
    return w;
}

double tv_of_maps(const std::map<std::uint64_t, double>& a, const std::map<std::uint64_t, double>& b) {
    double sa = 0.0;
    double sb = 0.0;
    for (const auto& [k, v] : a) sa += v;
    for (const auto& [k, v] : b) sb += v;
    std::map<std::uint64_t, std::pair<double, double>> joint;
    for (const auto& [k, v] : a) joint[k].first = v / sa;
    for (const auto& [k, v] : b) joint[k].second = v / sb;
    double tv = 0.0;
    for (const auto& [k, pq] : joint) tv += std::abs(pq.first - pq.second);
    return std::min(1.0, 0.5 * tv);
}

}  // namespace

double drift_magnitude(const Matrix& x, double s, double t, double l, std::span<const std::size_t> features,
                       std::optional<std::size_t> bins) {
    check_features(x, features);
    if (bins && *bins < 1) throw InvalidArgument("drift magnitude: bins must be positive");
    const Windows w = make_windows(x, s, t, l);
    const Grid grid(x, w.both, features, bins.value_or(default_bins(w.s.size(), features.size())));
    std::map<std::uint64_t, double> hs;
    std::map<std::uint64_t, double> ht;
    for (std::size_t r : w.s) hs[grid.cell(x, r)] += 1.0;
    for (std::size_t r : w.t) ht[grid.cell(x, r)] += 1.0;
    return tv_of_maps(hs, ht);
}

double conditional_drift_magnitude(const Matrix& x, double s, double t, double l,
                                   std::span<const std::size_t> features, std::span<const std::size_t> given,
                                   std::optional<std::size_t> bins) {
    check_features(x, features);
    check_features(x, given);
    for (std::size_t j : features) {
        if (std::find(given.begin(), given.end(), j) != given.end()) {
            throw InvalidArgument("conditional drift magnitude: feature sets overlap");
        }
    }
    if (bins && *bins < 1) throw InvalidArgument("drift magnitude: bins must be positive");
    const Windows w = make_windows(x, s, t, l);
    const std::size_t b = bins.value_or(default_bins(w.s.size(), features.size() + given.size()));
    const Grid fgrid(x, w.both, features, b);
    const Grid ggrid(x, w.both, given, b);

    struct Cell {
        std::map<std::uint64_t, double> hs;
        std::map<std::uint64_t, double> ht;
        double weight = 0.0;
    };
    std::map<std::uint64_t, Cell> cells;
    for (std::size_t r : w.s) {
        Cell& c = cells[ggrid.cell(x, r)];
        c.hs[fgrid.cell(x, r)] += 1.0;
        c.weight += 1.0;
    }
    for (std::size_t r : w.t) {
        Cell& c = cells[ggrid.cell(x, r)];
        c.ht[fgrid.cell(x, r)] += 1.0;
        c.weight += 1.0;
    }
    const double total = static_cast<double>(w.both.size());
    double out = 0.0;
    for (const auto& [key, c] : cells) {
        const double tv = (c.hs.empty() || c.ht.empty()) ? 1.0 : tv_of_maps(c.hs, c.ht);
        out += c.weight / total * tv;
    }
    return std::min(1.0, out);
}

FeatureImportanceReport permutation_importance(const WindowPair& pair, const ClassifierSpec& classifier,
                                               const CvConfig& cv, std::size_t n_repeats, std::uint64_t seed) {
    if (n_repeats < 1) throw InvalidArgument("permutation_importance: n_repeats must be positive");
    const auto folds_needed = static_cast<Eigen::Index>(cv.n_folds);
    if (pair.reference.rows() < folds_needed || pair.current.rows() < folds_needed) {
        throw InvalidArgument("permutation_importance: each window needs at least n_folds samples");
    }
    const Matrix x = pair.pooled();
    const Labels y = pair.labels();
    const auto d = static_cast<std::size_t>(x.cols());
    const auto fold = assign_folds(y, cv);

    std::vector<std::vector<Eigen::Index>> test(cv.n_folds);
    std::vector<std::unique_ptr<ProbabilisticClassifier>> models;
    for (std::size_t i = 0; i < fold.size(); ++i) test[fold[i]].push_back(static_cast<Eigen::Index>(i));
    for (std::size_t f = 0; f < cv.n_folds; ++f) {
        Matrix xt(x.rows() - static_cast<Eigen::Index>(test[f].size()), x.cols());
        Labels yt;
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < fold.size(); ++i) {
            if (fold[i] == f) continue;
            xt.row(r++) = x.row(static_cast<Eigen::Index>(i));
            yt.push_back(y[i]);
        }
        models.push_back(fit(classifier, xt, yt, derive_seed(cv.seed, f + 1)));
    }

    auto oof_auc = [&](const Matrix& data) {
        std::vector<double> p(y.size());
        for (std::size_t f = 0; f < cv.n_folds; ++f) {
            for (Eigen::Index i : test[f]) {
                p[static_cast<std::size_t>(i)] =
                    models[f]->predict_proba(std::span<const double>(data.row(i).data(), d));
            }
        }
        return roc_auc(p, y);
    };

    const double baseline = oof_auc(x);
    FeatureImportanceReport report;
    Matrix shuffled = x;
    for (std::size_t j = 0; j < d; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        double sum = 0.0;
        for (std::size_t rep = 0; rep < n_repeats; ++rep) {
            Rng rng(derive_seed(derive_seed(seed, j), rep));
            for (std::size_t f = 0; f < cv.n_folds; ++f) {
                std::vector<Eigen::Index> order = test[f];
                rng.shuffle(order);
                for (std::size_t k = 0; k < order.size(); ++k) shuffled(test[f][k], jj) = x(order[k], jj);
            }
            sum += oof_auc(shuffled);
        }
        shuffled.col(jj) = x.col(jj);
        const double permuted = sum / static_cast<double>(n_repeats);
        report.features.push_back({j, baseline, permuted, baseline - permuted});
    }
    return report;
}

}  // namespace driftbench
