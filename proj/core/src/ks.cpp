#include <algorithm>
#include <cmath>
#include <numbers>

#include "driftbench/detectors.hpp"

namespace driftbench {

double kolmogorov_survival(double lambda) {
    if (!(lambda > 0.0)) {
        return 1.0;
    }
    if (lambda < 1.18) {
        // Jacobi-transformed series for the CDF converges fast for small lambda.
        const double pi = std::numbers::pi;
        const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
        double cdf = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double e = static_cast<double>((2 * k - 1) * (2 * k - 1));
            const double term = std::pow(y, e);
            cdf += term;
            if (term < 1e-12 * cdf || term == 0.0) {
                break;
            }
        }
        cdf *= std::sqrt(2.0 * pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12) {
            break;
        }
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw InvalidArgument("ks_two_sample: both samples must be non-empty");
    }
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }

    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_survival(lambda)};
}

DriftScore ks_detect(const WindowPair& pair) {
    const Eigen::Index d = pair.reference.cols();
    if (d == 0 || pair.current.cols() != d) {
        throw InvalidArgument("ks_detect: windows need the same positive dimension");
    }
    if (pair.reference.rows() == 0 || pair.current.rows() == 0) {
        throw InvalidArgument("ks_detect: windows must be non-empty");
    }
    KsResult best{0.0, 2.0};
    std::vector<double> a(static_cast<std::size_t>(pair.reference.rows()));
    std::vector<double> b(static_cast<std::size_t>(pair.current.rows()));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (std::size_t r = 0; r < a.size(); ++r) a[r] = pair.reference(static_cast<Eigen::Index>(r), j);
        for (std::size_t r = 0; r < b.size(); ++r) b[r] = pair.current(static_cast<Eigen::Index>(r), j);
        const KsResult res = ks_two_sample(a, b);
        if (res.p_value < best.p_value) {
            best = res;
        }
    }
    return DriftScore::from_p_value(best.statistic, best.p_value, pair.split_index);
}

void KswinConfig::validate() const {
    if (n_max1 == 0) throw InvalidArgument("kswin: n_max1 must be positive");
    if (n_min > n_max1) throw InvalidArgument("kswin: n_min must not exceed n_max1");
    if (n_max2 < 2) throw InvalidArgument("kswin: n_max2 must be at least 2");
    if (!(p_detect > 0.0 && p_detect < 1.0)) throw InvalidArgument("kswin: p_detect must lie in (0, 1)");
}

Kswin::Kswin(KswinConfig config, std::size_t dims, std::uint64_t seed)
    : config_(config), dims_(dims), rng_(seed) {
    config_.validate();
    if (dims_ == 0) {
        throw InvalidArgument("kswin: dimension must be positive");
    }
}

Kswin::Step Kswin::update(std::span<const double> x) {
    if (x.size() != dims_) {
        throw InvalidArgument("kswin: sample dimension mismatch");
    }
    current_.emplace_back(x.begin(), x.end());
    if (current_.size() > config_.n_max2) {
        reference_.push_back(std::move(current_.front()));
        current_.pop_front();
        if (reference_.size() > config_.n_max1) {
            reference_.pop_front();
        }
    }

    Step step;
    if (reference_.size() <= config_.n_min) {
        return step;
    }
    step.evaluated = true;

    std::vector<std::size_t> rows;
    if (reference_.size() > config_.n_max2) {
        rows = rng_.sample_without_replacement(reference_.size(), config_.n_max2);
    } else {
        rows.resize(reference_.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }

    KsResult best{0.0, 2.0};
    std::vector<double> a(rows.size());
    std::vector<double> b(current_.size());
    for (std::size_t j = 0; j < dims_; ++j) {
        for (std::size_t r = 0; r < rows.size(); ++r) a[r] = reference_[rows[r]][j];
        for (std::size_t r = 0; r < current_.size(); ++r) b[r] = current_[r][j];
        const KsResult res = ks_two_sample(a, b);
        if (res.p_value < best.p_value) {
            best = res;
        }
    }
    step.score = DriftScore::from_p_value(best.statistic, best.p_value);
    step.alarm = best.p_value < config_.p_detect / static_cast<double>(dims_);
    return step;
}

KswinResult kswin_stream(const Matrix& x, const KswinConfig& config, std::uint64_t seed) {
    Kswin detector(config, static_cast<std::size_t>(x.cols()), seed);
    KswinResult result;
    result.steps.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double* row = x.data() + i * x.cols();
        Kswin::Step step = detector.update(std::span<const double>(row, static_cast<std::size_t>(x.cols())));
        if (step.alarm) {
            result.alarms.push_back(static_cast<std::size_t>(i));
        }
        result.steps.push_back(step);
    }
    return result;
}

}  // namespace driftbench
