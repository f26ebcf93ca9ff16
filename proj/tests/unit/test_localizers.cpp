#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "driftbench/eval.hpp"
#include "driftbench/localizers.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/streams.hpp"

using namespace driftbench;

namespace {

Matrix uniform_rows(std::size_t n, std::size_t d, double lo, double hi, Rng& rng) {
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = lo + (hi - lo) * rng.uniform();
    }
    return x;
}

WindowPair pair_of(const Matrix& a, const Matrix& b) {
    return WindowPair{a, b, static_cast<std::size_t>(a.rows())};
}

// Brute-force LDD straight from the definition.
std::vector<double> brute_ldd(const Matrix& x, const Labels& y, std::size_t k) {
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) d.push_back({(x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm(), j});
        }
        std::sort(d.begin(), d.end());
        std::size_t same = 0;
        for (std::size_t r = 0; r < k; ++r) same += y[d[r].second] == y[i];
        const double other = static_cast<double>(k - same);
        out[i] = static_cast<double>(same) / std::max(other, 1.0) - 1.0;
    }
    return out;
}

}  // namespace

TEST_SUITE("localizers") {

TEST_CASE("kdq-tree leaves partition the sample") {
    Rng rng(3);
    const Matrix x = uniform_rows(300, 3, -1.0, 2.0, rng);
    const KdqTree tree = KdqTree::build(x, 10);
    std::size_t total = 0;
    for (std::size_t leaf : tree.leaves()) {
        const auto& node = tree.nodes()[leaf];
        CHECK(node.count <= 10);
        total += node.count;
    }
    CHECK(total == 300);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const std::size_t leaf = tree.assignments()[static_cast<std::size_t>(i)];
        CHECK(tree.nodes()[leaf].is_leaf());
        CHECK(tree.leaf_of({x.row(i).data(), 3}) == leaf);
        const auto& node = tree.nodes()[leaf];
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(x(i, static_cast<Eigen::Index>(j)) >= node.lower[j]);
            CHECK(x(i, static_cast<Eigen::Index>(j)) <= node.upper[j]);
        }
    }
    // split dimensions cycle with depth
    for (const auto& node : tree.nodes()) {
        if (!node.is_leaf()) {
            CHECK(*node.split_dim == node.depth % 3);
            CHECK(node.split == doctest::Approx(0.5 * (node.lower[*node.split_dim] + node.upper[*node.split_dim])));
        }
    }
}

TEST_CASE("kdq-tree degenerate inputs") {
    Matrix flat = Matrix::Constant(5, 2, 1.0);
    CHECK_THROWS_AS(KdqTree::build(flat), InvalidArgument);
    Rng rng(4);
    const Matrix x = uniform_rows(40, 2, 0.0, 1.0, rng);
    const KdqTree single = KdqTree::build(x, 100);
    CHECK(single.leaves().size() == 1);
}

TEST_CASE("kdq leaf score hand computation") {
    // 1-D, A in [0, 0.5), B in [0.5, 1): one split gives leaves (10, 0) and (0, 10)
    const double p = 10.5 / 11.0;
    const double q = 0.5 / 11.0;
    const double expected = (p - q) * std::log(p / q);
    CHECK(kdq_leaf_score(10, 10, 0, 10, 2) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(kdq_leaf_score(0, 10, 10, 10, 2) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(kdq_leaf_score(4, 10, 4, 10, 3) == 0.0);

    Matrix a(10, 1), b(10, 1);
    for (Eigen::Index i = 0; i < 10; ++i) {
        a(i, 0) = 0.05 * static_cast<double>(i);
        b(i, 0) = 0.5 + 0.05 * static_cast<double>(i);
    }
    KdqConfig cfg;
    cfg.min_samples = 10;
    cfg.bootstrap = 50;
    const auto res = kdq_localize(pair_of(a, b), cfg, 1);
    REQUIRE(res.per_region);
    CHECK(res.per_region->size() == 2);
    for (double s : res.per_sample_scores) CHECK(s == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("kdq identical windows score zero and a single leaf gives no signal") {
    Rng rng(5);
    const Matrix a = uniform_rows(80, 2, 0.0, 1.0, rng);
    KdqConfig cfg;
    cfg.bootstrap = 20;
    const auto same = kdq_localize(pair_of(a, a), cfg, 2);
    for (double s : same.per_sample_scores) CHECK(s == 0.0);

    const Matrix b = uniform_rows(80, 2, 0.3, 1.3, rng);
    cfg.min_samples = 1000;
    const auto one = kdq_localize(pair_of(a, b), cfg, 2);
    CHECK(std::all_of(one.per_sample_scores.begin(), one.per_sample_scores.end(),
                      [&](double s) { return s == one.per_sample_scores.front(); }));
}

TEST_CASE("kdq threshold and region scores") {
    Rng rng(6);
    const Matrix a = uniform_rows(200, 2, 0.0, 1.0, rng);
    const Matrix b = uniform_rows(200, 2, 0.5, 1.5, rng);
    KdqConfig cfg;
    cfg.bootstrap = 100;
    const auto res = kdq_localize(pair_of(a, b), cfg, 8);
    REQUIRE(res.threshold);
    REQUIRE(res.per_region);
    CHECK(res.per_sample_scores.size() == 400);
    bool flagged = false;
    for (const auto& r : *res.per_region) {
        CHECK(r.score >= 0.0);
        CHECK(*r.p_value > 0.0);
        CHECK(*r.p_value <= 1.0);
        flagged = flagged || r.score > *res.threshold;
    }
    CHECK(flagged);
    CHECK_THROWS_AS(kdq_localize(pair_of(a, Matrix(0, 2)), cfg, 1), InvalidArgument);
}

TEST_CASE("local drift degree examples") {
    CHECK(local_drift_degree(3, 1) == 2.0);
    CHECK(local_drift_degree(4, 0) == 3.0);
    CHECK(local_drift_degree(2, 2) == 0.0);
    CHECK(local_drift_degree(30, 0) == 29.0);
}

TEST_CASE("ldd_dis matches a brute-force LDD and standardizes by the permutation null") {
    Rng rng(9);
    const Matrix a = uniform_rows(40, 2, 0.0, 1.0, rng);
    const Matrix b = uniform_rows(40, 2, 0.4, 1.4, rng);
    const WindowPair pair = pair_of(a, b);
    LddConfig cfg;
    cfg.k = 6;
    cfg.bootstrap = 30;
    const auto res = ldd_dis(pair, cfg, 12);
    const auto ldd = brute_ldd(pair.pooled(), pair.labels(), cfg.k);

    // rebuild the null exactly as specified: pooled over B label permutations
    std::vector<double> null;
    Labels perm = pair.labels();
    for (std::size_t bi = 0; bi < cfg.bootstrap; ++bi) {
        Rng r(derive_seed(12, bi));
        r.shuffle(perm);
        const auto v = brute_ldd(pair.pooled(), perm, cfg.k);
        null.insert(null.end(), v.begin(), v.end());
    }
    const double mu = mean(null);
    const double sd = std::sqrt(variance(null));
    REQUIRE(res.per_sample_scores.size() == ldd.size());
    for (std::size_t i = 0; i < ldd.size(); ++i) {
        CHECK(res.per_sample_scores[i] == doctest::Approx(std::abs(ldd[i] - mu) / sd).epsilon(1e-12));
    }
}

TEST_CASE("ldd_dis interleaved windows and errors") {
    Matrix a(50, 1), b(50, 1);
    for (Eigen::Index i = 0; i < 50; ++i) {
        a(i, 0) = 2.0 * static_cast<double>(i);
        b(i, 0) = 2.0 * static_cast<double>(i) + 1.0;
    }
    LddConfig cfg;
    cfg.k = 4;
    cfg.bootstrap = 50;
    const auto res = ldd_dis(pair_of(a, b), cfg, 3);
    CHECK(mean(res.per_sample_scores) < 1.0);
    cfg.k = 0;
    CHECK_THROWS_AS(ldd_dis(pair_of(a, b), cfg, 3), InvalidArgument);
    cfg.k = 100;
    CHECK_THROWS_AS(ldd_dis(pair_of(a, b), cfg, 3), InvalidArgument);
}

TEST_CASE("informativity examples and bounds") {
    CHECK(informativity(0.5, 0.5) == 0.0);
    CHECK(informativity(0.3, 0.3) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(informativity(1.0, 0.5) == doctest::Approx(1.0));
    CHECK(informativity(0.0, 0.5) == doctest::Approx(1.0));
    for (double p = 0.0; p <= 1.0; p += 0.05) {
        for (double prior : {0.1, 0.3, 0.5, 0.8}) {
            const double v = informativity(p, prior);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK_THROWS_AS(informativity(0.5, 0.0), InvalidArgument);
    CHECK_THROWS_AS(informativity(0.5, 1.0), InvalidArgument);
}

TEST_CASE("mb_localize null mean informativity is small") {
    double total = 0.0;
    const int runs = 10;
    for (int r = 0; r < runs; ++r) {
        Rng rng(100 + static_cast<std::uint64_t>(r));
        const Matrix a = uniform_rows(250, 2, 0.0, 1.0, rng);
        const Matrix b = uniform_rows(250, 2, 0.0, 1.0, rng);
        MbConfig cfg;
        cfg.cv.seed = static_cast<std::uint64_t>(r);
        const auto res = mb_localize(pair_of(a, b), cfg);
        total += mean(res.per_sample_scores);
        for (double s : res.per_sample_scores) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
    }
    CHECK(total / runs < 0.05);
}

TEST_CASE("mb_localize ranks the drift locus above the overlap") {
    Rng rng(21);
    const Matrix a = uniform_rows(300, 2, 0.0, 1.0, rng);
    Matrix b = uniform_rows(300, 2, 0.0, 1.0, rng);
    b.col(0).array() += 0.5;
    const WindowPair pair = pair_of(a, b);
    MbConfig cfg;
    const auto res = mb_localize(pair, cfg);
    const Matrix pooled = pair.pooled();
    std::vector<bool> locus(600);
    for (Eigen::Index i = 0; i < 600; ++i) locus[static_cast<std::size_t>(i)] = pooled(i, 0) < 0.5 || pooled(i, 0) >= 1.0;
    CHECK(roc_auc(res.per_sample_scores, locus) > 0.8);
}

TEST_CASE("localizers are permutation equivariant within windows") {
    Rng rng(31);
    const Matrix a = uniform_rows(60, 2, 0.0, 1.0, rng);
    const Matrix b = uniform_rows(60, 2, 0.3, 1.3, rng);
    std::vector<std::size_t> order(60);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::reverse(order.begin(), order.end());
    Matrix ar(60, 2), br(60, 2);
    for (std::size_t i = 0; i < 60; ++i) {
        ar.row(static_cast<Eigen::Index>(i)) = a.row(static_cast<Eigen::Index>(order[i]));
        br.row(static_cast<Eigen::Index>(i)) = b.row(static_cast<Eigen::Index>(order[i]));
    }
    KdqConfig kcfg;
    kcfg.bootstrap = 10;
    const auto k1 = kdq_localize(pair_of(a, b), kcfg, 1);
    const auto k2 = kdq_localize(pair_of(ar, br), kcfg, 1);
    for (std::size_t i = 0; i < 60; ++i) {
        CHECK(k2.per_sample_scores[i] == k1.per_sample_scores[order[i]]);
        CHECK(k2.per_sample_scores[60 + i] == k1.per_sample_scores[60 + order[i]]);
    }
}

TEST_CASE("kolmogorov tree on a stationary stream keeps one segment") {
    KolmogorovTreeConfig cfg;
    std::size_t flagged = 0;
    const std::size_t runs = 200;
    for (std::size_t r = 0; r < runs; ++r) {
        Rng rng(500 + r);
        const Matrix x = uniform_rows(200, 2, 0.0, 1.0, rng);
        std::vector<std::int64_t> t(200);
        std::iota(t.begin(), t.end(), std::int64_t{0});
        const auto res = kolmogorov_segment(x, t, cfg);
        REQUIRE(res.per_region);
        bool any = false;
        for (const auto& region : *res.per_region) any = any || *region.p_value < cfg.alpha / static_cast<double>(res.per_region->size());
        flagged += any;
    }
    CHECK(static_cast<double>(flagged) / runs <= 2.0 * cfg.p_split);
}

TEST_CASE("kolmogorov tree splits a half-range drift at 0.5") {
    Rng rng(77);
    Matrix x(400, 1);
    std::vector<std::int64_t> t(400);
    for (Eigen::Index i = 0; i < 400; ++i) {
        t[static_cast<std::size_t>(i)] = i;
        x(i, 0) = i < 200 ? 0.5 * rng.uniform() : 0.5 + 0.5 * rng.uniform();
    }
    const auto res = kolmogorov_segment(x, t, KolmogorovTreeConfig{});
    REQUIRE(res.segments);
    REQUIRE(res.per_region);
    REQUIRE(res.per_region->size() == 2);
    const auto& r0 = (*res.per_region)[0];
    const double boundary = r0.upper[0] < (*res.per_region)[1].upper[0] ? r0.upper[0] : (*res.per_region)[1].upper[0];
    CHECK(boundary == doctest::Approx(0.5).epsilon(0.02));
    for (const auto& region : *res.per_region) CHECK(*region.p_value < 0.05 / 2.0);
    CHECK((*res.segments)[0] != (*res.segments)[399]);
}

TEST_CASE("kolmogorov tree with too few samples returns a single segment") {
    Rng rng(1);
    const Matrix x = uniform_rows(30, 2, 0.0, 1.0, rng);
    std::vector<std::int64_t> t(30);
    std::iota(t.begin(), t.end(), std::int64_t{0});
    const auto res = kolmogorov_segment(x, t, KolmogorovTreeConfig{});
    REQUIRE(res.segments);
    CHECK(std::all_of(res.segments->begin(), res.segments->end(), [](std::size_t s) { return s == 0; }));
}

TEST_CASE("kolmogorov tree three alternating segments") {
    // Below-left early, right late, upper half throughout
    Rng rng(88);
    Matrix x(900, 2);
    std::vector<std::int64_t> t(900);
    for (Eigen::Index i = 0; i < 900; ++i) {
        t[static_cast<std::size_t>(i)] = i;
        const bool upper = rng.uniform() < 0.5;
        x(i, 1) = upper ? 0.5 + 0.5 * rng.uniform() : 0.5 * rng.uniform();
        x(i, 0) = upper ? rng.uniform() : (i < 450 ? 0.5 * rng.uniform() : 0.5 + 0.5 * rng.uniform());
    }
    const auto res = kolmogorov_segment(x, t, KolmogorovTreeConfig{});
    REQUIRE(res.per_region);
    CHECK(res.per_region->size() >= 2);
}

}
