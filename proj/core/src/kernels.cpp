#include "driftbench/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace driftbench {
namespace {

void check_finite(const Matrix& x) {
    if (!x.allFinite()) throw InputError("kernel input contains NaN or infinite values");
}

// Deterministic row stride keeping at most `cap` rows.
std::vector<Eigen::Index> heuristic_rows(Eigen::Index n, Eigen::Index cap) {
    std::vector<Eigen::Index> rows;
    const Eigen::Index step = n > cap ? (n + cap - 1) / cap : 1;
    for (Eigen::Index i = 0; i < n; i += step) rows.push_back(i);
    return rows;
}

}  // namespace

void KernelSpec::validate() const {
    if (family == KernelFamily::Rbf && bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
        throw InvalidArgument("RBF bandwidth must be positive");
    }
}

double median_heuristic(const Matrix& x) {
    check_finite(x);
    const auto rows = heuristic_rows(x.rows(), 1500);
    std::vector<double> dist;
    dist.reserve(rows.size() * (rows.size() - 1) / 2);
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
            const double dd = (x.row(rows[a]) - x.row(rows[b])).norm();
            if (dd > 0.0) dist.push_back(dd);
        }
    }
    if (dist.empty()) return 1.0;
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    const double upper = dist[mid];
    if (dist.size() % 2 == 1) return upper;
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

KernelSpec resolve_kernel(const KernelSpec& spec, const Matrix& x) {
    spec.validate();
    if (spec.family == KernelFamily::Rbf && !spec.bandwidth) {
        return KernelSpec::rbf(median_heuristic(x));
    }
    return spec;
}

double kernel_value(const KernelSpec& resolved, const double* a, const double* b, Eigen::Index d) {
    if (resolved.family == KernelFamily::Linear) {
        double dot = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) dot += a[j] * b[j];
        return dot;
    }
    double sq = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        sq += diff * diff;
    }
    const double h = *resolved.bandwidth;
    return std::exp(-sq / (2.0 * h * h));
}

KernelMatrix kernel_matrix(const Matrix& x, const KernelSpec& spec) {
    if (x.rows() == 0) throw InvalidArgument("kernel_matrix: need at least one sample");
    check_finite(x);
    const KernelSpec k = resolve_kernel(spec, x);
    const Eigen::Index n = x.rows();
    KernelMatrix out;
    out.sample_ids.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < out.sample_ids.size(); ++i) out.sample_ids[i] = i;

    if (k.family == KernelFamily::Linear) {
        out.values = x * x.transpose();
        return out;
    }
    // exp(-(|a|^2 + |b|^2 - 2<a,b>) / 2h^2), clamped so rounding cannot make d^2 negative
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Matrix gram = x * x.transpose();
    const double scale = -1.0 / (2.0 * *k.bandwidth * *k.bandwidth);
    out.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = std::max(0.0, sq(i) + sq(j) - 2.0 * gram(i, j));
            const double v = std::exp(scale * d2);
            out.values(i, j) = v;
            out.values(j, i) = v;
        }
    }
    return out;
}

double mmd_biased(const Matrix& k, std::size_t split) {
    const auto n = static_cast<std::size_t>(k.rows());
    if (split == 0 || split >= n) {
        throw InvalidArgument("mmd_biased: split " + std::to_string(split) + " out of range (0, " +
                              std::to_string(n) + ")");
    }
    const auto s = static_cast<Eigen::Index>(split);
    const auto m = static_cast<Eigen::Index>(n - split);
    const double xx = k.topLeftCorner(s, s).sum();
    const double yy = k.bottomRightCorner(m, m).sum();
    const double xy = k.topRightCorner(s, m).sum();
    const double nx = static_cast<double>(s);
    const double ny = static_cast<double>(m);
    return xx / (nx * nx) - 2.0 * xy / (nx * ny) + yy / (ny * ny);
}

double mmd_biased(const KernelMatrix& k, std::size_t split) { return mmd_biased(k.values, split); }

Matrix double_center(const Matrix& k) {
    const Eigen::Index n = k.rows();
    const Eigen::VectorXd row_mean = k.rowwise().mean();
    const Eigen::RowVectorXd col_mean = k.colwise().mean();
    const double total_mean = k.mean();
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(i, j) = k(i, j) - row_mean(i) - col_mean(j) + total_mean;
        }
    }
    return out;
}

double hsic_statistic_centered(const Matrix& kx, const Matrix& centered_kt) {
    const double n = static_cast<double>(kx.rows());
    return kx.cwiseProduct(centered_kt).sum() / (n * n);
}

double hsic_statistic(const KernelMatrix& kx, const KernelMatrix& kt) {
    if (kx.size() != kt.size()) {
        throw InvalidArgument("hsic_statistic: kernel matrices differ in size");
    }
    if (kx.size() == 0) throw InvalidArgument("hsic_statistic: empty kernel matrix");
    return hsic_statistic_centered(kx.values, double_center(kt.values));
}

SegmentCost::SegmentCost(const Matrix& k)
    : n_(static_cast<std::size_t>(k.rows())), diag_prefix_(n_ + 1, 0.0), prefix_((n_ + 1) * (n_ + 1), 0.0) {
    const std::size_t w = n_ + 1;
    for (std::size_t i = 0; i < n_; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        diag_prefix_[i + 1] = diag_prefix_[i] + k(ii, ii);
        double row = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            row += k(ii, static_cast<Eigen::Index>(j));
            prefix_[(i + 1) * w + (j + 1)] = prefix_[i * w + (j + 1)] + row;
        }
    }
}

double SegmentCost::block_sum(std::size_t a, std::size_t b) const {
    const std::size_t w = n_ + 1;
    return prefix_[b * w + b] - prefix_[a * w + b] - prefix_[b * w + a] + prefix_[a * w + a];
}

double SegmentCost::operator()(std::size_t a, std::size_t b) const {
    if (!(a < b && b <= n_)) {
        throw InvalidArgument("segment_cost: need 0 <= a < b <= n");
    }
    const double len = static_cast<double>(b - a);
    const double value = (diag_prefix_[b] - diag_prefix_[a]) - block_sum(a, b) / len;
    return value / static_cast<double>(n_);
}

double segment_cost(const KernelMatrix& k, std::size_t a, std::size_t b) {
    return SegmentCost(k.values)(a, b);
}

std::vector<double> moving_mmd(const Matrix& x, std::size_t l, const KernelSpec& spec) {
    if (l == 0) throw InvalidArgument("moving_mmd: window length must be positive");
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < 2 * l) return {};
    check_finite(x);
    const KernelSpec k = resolve_kernel(spec, x);
    const Eigen::Index d = x.cols();
    const std::size_t band = 2 * l;

    // band(p, delta) = k(p, p + delta) for 0 <= delta < 2l
    std::vector<double> cache(n * band, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        const double* xp = x.row(static_cast<Eigen::Index>(p)).data();
        for (std::size_t delta = 0; delta < band && p + delta < n; ++delta) {
            cache[p * band + delta] = kernel_value(k, xp, x.row(static_cast<Eigen::Index>(p + delta)).data(), d);
        }
    }
    auto kv = [&](std::size_t p, std::size_t q) {
        return p <= q ? cache[p * band + (q - p)] : cache[q * band + (p - q)];
    };
    auto block = [&](std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
        double s = 0.0;
        for (std::size_t p = a0; p < a1; ++p) {
            for (std::size_t q = b0; q < b1; ++q) s += kv(p, q);
        }
        return s;
    };
    auto row_sum = [&](std::size_t p, std::size_t q0, std::size_t q1) {
        double s = 0.0;
        for (std::size_t q = q0; q < q1; ++q) s += kv(p, q);
        return s;
    };

    const std::size_t count = n - band + 1;
    std::vector<double> series(count);
    const double norm = 1.0 / (static_cast<double>(l) * static_cast<double>(l));
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % l == 0) {
            // periodic exact refresh bounds rounding drift; amortized O(l) per step
            sxx = block(i, i + l, i, i + l);
            syy = block(i + l, i + band, i + l, i + band);
            sxy = block(i, i + l, i + l, i + band);
        }
        series[i] = std::max(0.0, (sxx + syy - 2.0 * sxy) * norm);
        if (i + 1 == count) break;
        const std::size_t mid = i + l;
        const std::size_t end = i + band;
        // reference [i, mid) -> [i+1, mid]
        sxx += -2.0 * row_sum(i, i, mid) + kv(i, i) + 2.0 * row_sum(mid, i + 1, mid + 1) - kv(mid, mid);
        // current [mid, end) -> [mid+1, end]
        syy += -2.0 * row_sum(mid, mid, end) + kv(mid, mid) + 2.0 * row_sum(end, mid + 1, end + 1) - kv(end, end);
        // cross terms: drop i, move mid across, add end
        sxy -= row_sum(i, mid, end);
        sxy -= row_sum(mid, i + 1, mid);
        sxy += row_sum(mid, mid + 1, end);
        sxy += row_sum(end, i + 1, mid + 1);
    }
    return series;
}

}  // namespace driftbench
