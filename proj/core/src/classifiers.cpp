#include "driftbench/classifiers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "driftbench/eval.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {
namespace {

void check_training_data(const Matrix& x, const Labels& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw InvalidArgument("fit: feature rows and labels differ in length");
    }
    if (x.cols() == 0) throw InvalidArgument("fit: need at least one feature");
    if (!x.allFinite()) throw InputError("fit: non-finite feature values");
    const auto pos = std::count_if(y.begin(), y.end(), [](std::uint8_t v) { return v != 0; });
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size())) {
        throw InvalidArgument("fit: training labels contain a single class");
    }
}

class LogisticRegression final : public ProbabilisticClassifier {
public:
    LogisticRegression(const ClassifierSpec& spec, const Matrix& x, const Labels& y) {
        const Eigen::Index n = x.rows();
        const Eigen::Index d = x.cols();
        mean_ = x.colwise().mean();
        scale_ = Eigen::RowVectorXd::Ones(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double sd = std::sqrt((x.col(j).array() - mean_(j)).square().mean());
            if (sd > 0.0) scale_(j) = sd;
        }
        Matrix z = x;
        z.rowwise() -= mean_;
        z.array().rowwise() /= scale_.array();

        Eigen::VectorXd target(n);
        for (Eigen::Index i = 0; i < n; ++i) target(i) = y[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;

        weights_ = Eigen::VectorXd::Zero(d);
        bias_ = 0.0;
        // Hessian of the mean loss is bounded by 0.25 * trace([1 z]^T [1 z] / n) <= 0.25 (1 + d)
        const double lipschitz = 0.25 * (1.0 + static_cast<double>(d)) + spec.l2;
        const double step = 1.0 / lipschitz;
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t it = 0; it < spec.max_iterations; ++it) {
            Eigen::VectorXd margin = (z * weights_).array() + bias_;
            Eigen::VectorXd resid(n);
            for (Eigen::Index i = 0; i < n; ++i) resid(i) = sigmoid(margin(i)) - target(i);
            const Eigen::VectorXd grad_w = inv_n * (z.transpose() * resid) + spec.l2 * weights_;
            const double grad_b = inv_n * resid.sum();
            const double norm = std::sqrt(grad_w.squaredNorm() + grad_b * grad_b);
            if (norm <= spec.tolerance) break;
            weights_ -= step * grad_w;
            bias_ -= step * grad_b;
        }
    }

    double predict_proba(std::span<const double> x) const override {
        double m = bias_;
        for (Eigen::Index j = 0; j < weights_.size(); ++j) {
            m += weights_(j) * (x[static_cast<std::size_t>(j)] - mean_(j)) / scale_(j);
        }
        return sigmoid(m);
    }

private:
    static double sigmoid(double m) {
        if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
        const double e = std::exp(m);
        return e / (1.0 + e);
    }

    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
    Eigen::VectorXd weights_;
    double bias_ = 0.0;
};

class KNearestNeighbor final : public ProbabilisticClassifier {
public:
    KNearestNeighbor(std::size_t k, const Matrix& x, const Labels& y)
        : k_(std::min<std::size_t>(k, static_cast<std::size_t>(x.rows()))), x_(x), y_(y) {}

    double predict_proba(std::span<const double> q) const override {
        const Eigen::Index n = x_.rows();
        const Eigen::Index d = x_.cols();
        std::vector<std::pair<double, std::size_t>> dist(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = 0.0;
            const double* row = x_.row(i).data();
            for (Eigen::Index j = 0; j < d; ++j) {
                const double diff = row[j] - q[static_cast<std::size_t>(j)];
                s += diff * diff;
            }
            dist[static_cast<std::size_t>(i)] = {s, static_cast<std::size_t>(i)};
        }
        // pairs compare by distance then index, which breaks ties by sample index
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
        std::size_t pos = 0;
        for (std::size_t i = 0; i < k_; ++i) pos += y_[dist[i].second] != 0 ? 1 : 0;
        return static_cast<double>(pos) / static_cast<double>(k_);
    }

private:
    std::size_t k_;
    Matrix x_;
    Labels y_;
};

}  // namespace

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Logistic: return "logistic";
        case ClassifierKind::KNearestNeighbor: return "knn";
        case ClassifierKind::RandomForest: return "random-forest";
    }
    return "unknown";
}

ClassifierKind parse_classifier(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "logistic" || s == "lr" || s == "logistic-regression") return ClassifierKind::Logistic;
    if (s == "knn" || s == "k-nn") return ClassifierKind::KNearestNeighbor;
    if (s == "random-forest" || s == "rf" || s == "forest") return ClassifierKind::RandomForest;
    throw InvalidArgument("unknown classifier '" + std::string(name) +
                          "' (expected logistic, knn or random-forest)");
}

void ClassifierSpec::validate() const {
    if (kind == ClassifierKind::Logistic) {
        if (!(l2 >= 0.0)) throw InvalidArgument("l2: must be non-negative");
        if (max_iterations == 0) throw InvalidArgument("max_iterations: must be positive");
    }
    if (kind == ClassifierKind::KNearestNeighbor && k == 0) {
        throw InvalidArgument("k: must be positive");
    }
    if (kind == ClassifierKind::RandomForest) {
        if (n_trees == 0) throw InvalidArgument("n_trees: must be positive");
        if (min_leaf == 0) throw InvalidArgument("min_leaf: must be positive");
        if (max_features && *max_features == 0) throw InvalidArgument("max_features: must be positive");
    }
}

Vector ProbabilisticClassifier::predict_proba(const Matrix& x) const {
    Vector out(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out(i) = predict_proba(std::span<const double>(x.row(i).data(), d));
    }
    return out;
}

std::unique_ptr<ProbabilisticClassifier> fit(const ClassifierSpec& spec, const Matrix& x,
                                             const Labels& y, std::uint64_t seed) {
    spec.validate();
    check_training_data(x, y);
    switch (spec.kind) {
        case ClassifierKind::Logistic: return std::make_unique<LogisticRegression>(spec, x, y);
        case ClassifierKind::KNearestNeighbor: return std::make_unique<KNearestNeighbor>(spec.k, x, y);
        case ClassifierKind::RandomForest: return detail::fit_random_forest(spec, x, y, seed);
    }
    throw InvalidArgument("unknown classifier kind");
}

std::vector<std::size_t> assign_folds(const Labels& y, const CvConfig& cv) {
    if (cv.n_folds < 2) throw InvalidArgument("n_folds: must be at least 2");
    const std::size_t n = y.size();
    const auto pos = static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [](std::uint8_t v) { return v != 0; }));
    const std::size_t minority = std::min(pos, n - pos);
    if (cv.n_folds > minority) {
        throw InvalidArgument("n_folds: " + std::to_string(cv.n_folds) +
                              " exceeds the minority-class count " + std::to_string(minority));
    }
    Rng rng(cv.seed);
    std::vector<std::size_t> fold(n, 0);
    if (cv.stratified) {
        for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < n; ++i) {
                if ((y[i] != 0) == (cls != 0)) idx.push_back(i);
            }
            rng.shuffle(idx);
            for (std::size_t r = 0; r < idx.size(); ++r) fold[idx[r]] = r % cv.n_folds;
        }
    } else {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        rng.shuffle(idx);
        for (std::size_t r = 0; r < n; ++r) fold[idx[r]] = r % cv.n_folds;
    }
    return fold;
}

Vector cross_val_predict(const ClassifierSpec& spec, const Matrix& x, const Labels& y,
                         const CvConfig& cv) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw InvalidArgument("cross_val_predict: feature rows and labels differ in length");
    }
    const auto fold = assign_folds(y, cv);
    Vector out(x.rows());
    for (std::size_t f = 0; f < cv.n_folds; ++f) {
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> test;
        for (std::size_t i = 0; i < fold.size(); ++i) {
            (fold[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
        }
        Matrix xt(static_cast<Eigen::Index>(train.size()), x.cols());
        Labels yt(train.size());
        for (std::size_t r = 0; r < train.size(); ++r) {
            xt.row(static_cast<Eigen::Index>(r)) = x.row(train[r]);
            yt[r] = y[static_cast<std::size_t>(train[r])];
        }
        const auto yt_pos = std::count_if(yt.begin(), yt.end(), [](std::uint8_t v) { return v != 0; });
        if (yt_pos == 0 || yt_pos == static_cast<std::ptrdiff_t>(yt.size())) {
            throw InvalidArgument("cross_val_predict: fold " + std::to_string(f) + " lacks a class");
        }
        const auto model = fit(spec, xt, yt, derive_seed(cv.seed, f + 1));
        const auto d = static_cast<std::size_t>(x.cols());
        for (Eigen::Index i : test) {
            out(i) = model->predict_proba(std::span<const double>(x.row(i).data(), d));
        }
    }
    return out;
}

double cv_auc(const ClassifierSpec& spec, const Matrix& x, const Labels& y, const CvConfig& cv) {
    const Vector p = cross_val_predict(spec, x, y, cv);
    return roc_auc(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), y);
}

}  // namespace driftbench
