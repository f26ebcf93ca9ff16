#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "driftbench/eval.hpp"
#include "driftbench/explain.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/streams.hpp"

using namespace driftbench;

namespace {

Matrix stationary(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform();
    }
    return x;
}

const std::vector<std::size_t> kDim0{0};
const std::vector<std::size_t> kDim1{1};

}  // namespace

TEST_SUITE("explain") {

TEST_CASE("window rows and default bins") {
    CHECK(window_rows(100, 10.0, 4.0) == std::vector<std::size_t>{9, 10, 11});
    CHECK(window_rows(5, 0.0, 4.0) == std::vector<std::size_t>{0, 1});
    CHECK(default_bins(500, 1) == 23);
    CHECK(default_bins(1, 1) == 2);
    CHECK(default_bins(1000000, 1) == 32);
    CHECK(default_bins(124, 2) == 5);
}

TEST_CASE("total variation examples") {
    const std::vector<double> a{1, 0}, b{0, 1}, c{3, 1}, d{1, 1};
    CHECK(total_variation(a, b) == 1.0);
    CHECK(total_variation(a, a) == 0.0);
    CHECK(total_variation(c, d) == doctest::Approx(0.25));
}

TEST_CASE("drift magnitude is zero for s = t and symmetric") {
    const Matrix x = stationary(2000, 2, 1);
    CHECK(drift_magnitude(x, 500.0, 500.0, 400.0, kDim0) == 0.0);
    CHECK(conditional_drift_magnitude(x, 500.0, 500.0, 400.0, kDim0, kDim1) == 0.0);
    const double st = drift_magnitude(x, 300.0, 1500.0, 400.0, kDim0, 10);
    const double ts = drift_magnitude(x, 1500.0, 300.0, 400.0, kDim0, 10);
    CHECK(st == doctest::Approx(ts).epsilon(1e-14));
    CHECK(st >= 0.0);
    CHECK(st <= 1.0);
}

TEST_CASE("drift magnitude on disjoint supports is one") {
    Matrix x(200, 1);
    for (Eigen::Index i = 0; i < 200; ++i) x(i, 0) = i < 100 ? 0.001 * static_cast<double>(i) : 10.0 + 0.001 * static_cast<double>(i);
    CHECK(drift_magnitude(x, 50.0, 150.0, 80.0, kDim0, 4) == doctest::Approx(1.0));
}

TEST_CASE("drift magnitude null calibration") {
    std::vector<double> values;
    for (std::uint64_t r = 0; r < 200; ++r) {
        const Matrix x = stationary(1200, 1, 1000 + r);
        values.push_back(drift_magnitude(x, 300.0, 900.0, 500.0, kDim0, 10));
    }
    CHECK(quantile(values, 0.95) <= 0.15);
}

TEST_CASE("triangle inequality for a fixed binning") {
    Matrix x = stationary(3000, 1, 7);
    for (Eigen::Index i = 1000; i < 3000; ++i) x(i, 0) += 0.2 * static_cast<double>(i / 1000);
    // common grid over [0, 1.4)
    auto hist = [&](double center) {
        std::vector<double> h(10, 0.0);
        for (std::size_t r : window_rows(3000, center, 800.0)) {
            const double v = x(static_cast<Eigen::Index>(r), 0);
            const auto b = static_cast<std::size_t>(std::clamp(v / 1.4 * 10.0, 0.0, 9.999));
            h[b] += 1.0;
        }
        return h;
    };
    const auto hs = hist(500.0), ht = hist(1500.0), hu = hist(2500.0);
    CHECK(total_variation(hs, hu) <= total_variation(hs, ht) + total_variation(ht, hu) + 1e-15);
}

TEST_CASE("conditional magnitude of independent stationary features shrinks with the window") {
    std::vector<double> means;
    for (std::size_t w : {100u, 400u, 1600u}) {
        double total = 0.0;
        for (std::uint64_t r = 0; r < 30; ++r) {
            const Matrix x = stationary(4 * w, 2, 77 + r + 1000 * w);
            total += conditional_drift_magnitude(x, static_cast<double>(w), static_cast<double>(3 * w),
                                                 static_cast<double>(w), kDim0, kDim1);
        }
        means.push_back(total / 30.0);
    }
    CHECK(means[0] > means[1]);
    CHECK(means[1] > means[2]);
}

TEST_CASE("conditional magnitude exposes a correlation flip") {
    SyntheticStreamSpec spec;
    spec.dataset = Dataset::Gauss;
    spec.intensity = 0.8;
    spec.length = 2000;
    spec.dims = 2;
    spec.n_drifts = 1;
    spec.drift_min = spec.drift_max = 1000;
    spec.seed = 5;
    const Stream s = generate_stream(spec);
    const double marginal = drift_magnitude(s.x, 500.0, 1500.0, 1000.0, kDim0);
    const double conditional = conditional_drift_magnitude(s.x, 500.0, 1500.0, 1000.0, kDim0, kDim1);
    CHECK(conditional > 2.0 * marginal);
}

TEST_CASE("explain errors") {
    const Matrix x = stationary(100, 2, 3);
    CHECK_THROWS_AS(conditional_drift_magnitude(x, 20.0, 70.0, 20.0, kDim0, kDim0), InvalidArgument);
    CHECK_THROWS_AS(drift_magnitude(x, 500.0, 20.0, 10.0, kDim0), InvalidArgument);
    CHECK_THROWS_AS(drift_magnitude(x, 20.0, 70.0, 20.0, kDim0, 0), InvalidArgument);
}

TEST_CASE("permutation importance ranks the drifting feature first") {
    SyntheticStreamSpec spec;
    spec.dataset = Dataset::Uniform;
    spec.intensity = 0.5;
    spec.drifting_dims = 1;
    spec.dims = 4;
    spec.length = 400;
    spec.n_drifts = 1;
    spec.drift_min = spec.drift_max = 200;
    spec.seed = 11;
    const Stream s = generate_stream(spec);
    CvConfig cv;
    cv.seed = 1;
    const auto rep = permutation_importance(split_at(s.x, 200), ClassifierSpec::random_forest(), cv, 3, 2);
    REQUIRE(rep.features.size() == 4);
    for (std::size_t j = 1; j < 4; ++j) CHECK(rep.features[0].importance > rep.features[j].importance);
    for (const auto& f : rep.features) CHECK(f.importance == doctest::Approx(f.baseline - f.permuted));
}

TEST_CASE("permutation importance of a constant column is exactly zero") {
    Matrix x = stationary(200, 3, 4);
    x.col(2).setConstant(1.5);
    for (Eigen::Index i = 100; i < 200; ++i) x(i, 0) += 0.6;
    CvConfig cv;
    cv.seed = 3;
    const auto rep = permutation_importance(split_at(x, 100), ClassifierSpec::random_forest(), cv, 3, 9);
    CHECK(rep.features[2].importance == 0.0);
}

TEST_CASE("permutation importance null") {
    double total = 0.0;
    std::size_t count = 0;
    for (std::uint64_t r = 0; r < 5; ++r) {
        const Matrix x = stationary(200, 3, 300 + r);
        CvConfig cv;
        cv.seed = r;
        const auto rep = permutation_importance(split_at(x, 100), ClassifierSpec::random_forest(), cv, 2, r);
        for (const auto& f : rep.features) {
            total += f.importance;
            ++count;
        }
    }
    CHECK(std::abs(total / static_cast<double>(count)) < 0.05);
}

}
