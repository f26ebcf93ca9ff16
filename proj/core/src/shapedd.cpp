#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "driftbench/eval.hpp"

#include "driftbench/detectors.hpp"

namespace driftbench {

std::vector<double> shape_match(std::span<const double> series, std::size_t l) {
    if (l == 0) throw InvalidArgument("shape_match: window length must be positive");
    const std::size_t n = series.size();
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    if (n < 2 * l) return out;
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
    const double inv = 1.0 / static_cast<double>(l);
    for (std::size_t t = l - 1; t + l < n; ++t) {
        const double ahead = prefix[t + l + 1] - prefix[t + 1];
        const double behind = prefix[t + 1] - prefix[t + 1 - l];
        out[t] = (ahead - behind) * inv;
    }
    return out;
}

std::vector<std::size_t> shape_crossings(std::span<const double> match) {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t + 1 < match.size(); ++t) {
        if (match[t] > 0.0 && match[t + 1] <= 0.0) {
            out.push_back(t);
        }
    }
    return out;
}

namespace {

struct ScanMax {
    double value;
    std::size_t split;
};

// Largest biased MMD over splits tau in [lo, hi] of windows [tau-w, tau) vs
// [tau, tau+w), with rows read through `order`.
ScanMax local_max_mmd(const Matrix& k, const std::vector<std::size_t>& order, std::size_t w, std::size_t lo,
                     std::size_t hi) {
    auto kv = [&](std::size_t p, std::size_t q) {
        return k(static_cast<Eigen::Index>(order[p]), static_cast<Eigen::Index>(order[q]));
    };
    auto row_sum = [&](std::size_t p, std::size_t q0, std::size_t q1) {
        double s = 0.0;
        for (std::size_t q = q0; q < q1; ++q) s += kv(p, q);
        return s;
    };
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    const std::size_t a0 = lo - w;
    for (std::size_t p = a0; p < lo; ++p) {
        sxx += row_sum(p, a0, lo);
        sxy += row_sum(p, lo, lo + w);
    }
    for (std::size_t p = lo; p < lo + w; ++p) syy += row_sum(p, lo, lo + w);
    const double norm = 1.0 / (static_cast<double>(w) * static_cast<double>(w));
    ScanMax best{(sxx + syy - 2.0 * sxy) * norm, lo};
    for (std::size_t tau = lo; tau < hi; ++tau) {
        const std::size_t i = tau - w;
        const std::size_t end = tau + w;
        sxx += -2.0 * row_sum(i, i, tau) + kv(i, i) + 2.0 * row_sum(tau, i + 1, tau + 1) - kv(tau, tau);
        syy += -2.0 * row_sum(tau, tau, end) + kv(tau, tau) + 2.0 * row_sum(end, tau + 1, end + 1) - kv(end, end);
        sxy -= row_sum(i, tau, end);
        sxy -= row_sum(tau, i + 1, tau);
        sxy += row_sum(tau, tau + 1, end);
        sxy += row_sum(end, i + 1, tau + 1);
        const double v = (sxx + syy - 2.0 * sxy) * norm;
        if (v > best.value) best = {v, tau + 1};
    }
    return best;
}

std::size_t candidate_window(std::size_t n, std::size_t cp, std::size_t l, std::size_t test_window,
                             std::size_t lower, std::size_t upper) {
    const std::size_t edge = std::min(cp, n - cp);
    const std::size_t gap = std::min(cp - lower, upper - cp);
    return std::min(edge, std::max(std::min(test_window, gap), std::min(l, test_window)));
}

}  // namespace

DriftScore shapedd_candidate_test(const Matrix& x, std::size_t cp, std::size_t l, std::size_t test_window,
                                  const KernelSpec& resolved, std::size_t bootstrap, std::uint64_t seed,
                                  std::size_t lower, std::size_t upper) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    if (l < 1 || test_window < 2) throw InvalidArgument("shapedd: window lengths too small");
    upper = std::min(upper, n);
    if (!(lower < cp && cp < upper)) throw InvalidArgument("shapedd: candidate outside its bounds");
    const std::size_t w = candidate_window(n, cp, l, test_window, lower, upper);
    if (w < 2) throw InvalidArgument("shapedd: candidate too close to the stream boundary");
    const std::size_t radius = std::max(l, test_window);
    const std::size_t lo_abs = std::max(w, cp >= radius ? cp - radius : 0);
    const std::size_t hi_abs = std::min(n - w, cp + radius);
    const std::size_t begin = lo_abs - w;
    const std::size_t end = hi_abs + w;
    const Matrix k = kernel_matrix(slice_rows(x, begin, end), resolved).values;
    const std::size_t m = end - begin;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const ScanMax observed = local_max_mmd(k, order, w, lo_abs - begin, hi_abs - begin);
    std::vector<double> permuted(bootstrap);
    for (std::size_t b = 0; b < bootstrap; ++b) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, b));
        rng.shuffle(order);
        permuted[b] = local_max_mmd(k, order, w, lo_abs - begin, hi_abs - begin).value;
    }
    const double tol = 1e-12 * std::max(1.0, k.cwiseAbs().maxCoeff());
    return DriftScore::from_p_value(std::max(0.0, observed.value), permutation_p(observed.value - tol, permuted),
                                    begin + observed.split);
}

std::vector<DriftScore> shapedd_detect(const Matrix& x, std::size_t l, const KernelSpec& kernel,
                                       std::size_t bootstrap, std::uint64_t seed, std::size_t test_window) {
    if (l < 2) throw InvalidArgument("shapedd: window length must be at least 2");
    if (bootstrap < 1) throw InvalidArgument("bootstrap count B must be at least 1");
    const std::size_t n = static_cast<std::size_t>(x.rows());
    if (n < 4 * l) return {};
    const std::size_t w = test_window == 0 ? l : test_window;

    const KernelSpec resolved = resolve_kernel(kernel, x);
    const std::vector<double> sigma = moving_mmd(x, l, resolved);
    const std::vector<double> match = shape_match(sigma, l);

    // sigma[t] compares [t, t+l) with [t+l, t+2l); its apex sits one step
    // after the crossing, where the split coincides with the change.
    std::vector<std::size_t> cps;
    for (std::size_t crossing : shape_crossings(match)) {
        const std::size_t cp = crossing + l + 1;
        if (cp >= 2 && cp + 2 <= n) cps.push_back(cp);
    }
    std::vector<double> at_cp;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const std::size_t lower = i == 0 ? 0 : cps[i - 1];
        const std::size_t upper = i + 1 == cps.size() ? n : cps[i + 1];
        const std::size_t v = candidate_window(n, cps[i], l, w, lower, upper);
        at_cp.push_back(mmd_biased(kernel_matrix(slice_rows(x, cps[i] - v, cps[i] + v), resolved), v));
    }
    // test a candidate only if no stronger candidate lies within one test window
    std::vector<DriftScore> out;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < cps.size() && !dominated; ++j) {
            const std::size_t dist = cps[i] > cps[j] ? cps[i] - cps[j] : cps[j] - cps[i];
            dominated = j != i && dist <= w && at_cp[j] > at_cp[i];
        }
        if (dominated) continue;
        const std::size_t lower = i == 0 ? 0 : cps[i - 1];
        const std::size_t upper = i + 1 == cps.size() ? n : cps[i + 1];
        out.push_back(shapedd_candidate_test(x, cps[i], l, w, resolved, bootstrap, derive_seed(seed, i), lower, upper));
    }
    // tests that located the same change keep only the strongest
    std::vector<DriftScore> kept;
    for (std::size_t i = 0; i < out.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < out.size() && !dominated; ++j) {
            const std::size_t a = *out[i].change_point, b = *out[j].change_point;
            const std::size_t dist = a > b ? a - b : b - a;
            dominated = j != i && dist <= w &&
                        (out[j].statistic > out[i].statistic || (out[j].statistic == out[i].statistic && j < i));
        }
        if (!dominated) kept.push_back(out[i]);
    }
    out = std::move(kept);
    return out;
}

}  // namespace driftbench
