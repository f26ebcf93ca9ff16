#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "driftbench/common.hpp"

namespace driftbench {

enum class ClassifierKind { Logistic, KNearestNeighbor, RandomForest };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier(std::string_view name);

/// Hyperparameters for the built-in classifiers. Fields that do not apply to
/// `kind` are ignored.
struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Logistic;

    // logistic regression (features standardized internally)
    double l2 = 1e-2;
    double tolerance = 1e-6;
    std::size_t max_iterations = 10000;

    // k-nearest neighbours
    std::size_t k = 5;

    // random forest
    std::size_t n_trees = 100;
    std::optional<std::size_t> max_depth;
    std::size_t min_leaf = 2;
    /// Features tried per split; defaults to round(sqrt(d)).
    std::optional<std::size_t> max_features;
    bool bootstrap = true;
    /// Extremely randomized trees: one uniform threshold per candidate feature.
    bool extra_trees = false;

    static ClassifierSpec logistic() { return {}; }
    static ClassifierSpec knn(std::size_t k) {
        ClassifierSpec s;
        s.kind = ClassifierKind::KNearestNeighbor;
        s.k = k;
        return s;
    }
    static ClassifierSpec random_forest(std::size_t n_trees = 100) {
        ClassifierSpec s;
        s.kind = ClassifierKind::RandomForest;
        s.n_trees = n_trees;
        return s;
    }

    void validate() const;
};

/// Fitted binary classifier returning P(y = 1 | x).
class ProbabilisticClassifier {
public:
    virtual ~ProbabilisticClassifier() = default;

    virtual double predict_proba(std::span<const double> x) const = 0;

    Vector predict_proba(const Matrix& x) const;
};

/// Throws InvalidArgument when `y` lacks one of the two classes.
std::unique_ptr<ProbabilisticClassifier> fit(const ClassifierSpec& spec, const Matrix& x,
                                             const Labels& y, std::uint64_t seed);

struct CvConfig {
    std::size_t n_folds = 5;
    bool stratified = true;
    std::uint64_t seed = 0;
};

/// Fold id per sample. Stratified folds deal each class round-robin after a
/// seeded shuffle.
std::vector<std::size_t> assign_folds(const Labels& y, const CvConfig& cv);

/// Out-of-fold probability for every sample.
Vector cross_val_predict(const ClassifierSpec& spec, const Matrix& x, const Labels& y,
                         const CvConfig& cv);

/// ROC-AUC of the pooled out-of-fold probabilities.
double cv_auc(const ClassifierSpec& spec, const Matrix& x, const Labels& y, const CvConfig& cv);

namespace detail {
std::unique_ptr<ProbabilisticClassifier> fit_random_forest(const ClassifierSpec& spec,
                                                           const Matrix& x, const Labels& y,
                                                           std::uint64_t seed);
}  // namespace detail

}  // namespace driftbench
