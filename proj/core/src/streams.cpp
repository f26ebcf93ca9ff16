#include "driftbench/streams.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <Eigen/QR>

#include "driftbench/rng.hpp"

namespace driftbench {
namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool in_unit_square(double x, double y, double ox, double oy) {
    return x >= ox && x < ox + 1.0 && y >= oy && y < oy + 1.0;
}

// Square corners of the two-overlap concepts. Concept B is regime A rotated
// by 90 degrees about its centre, which keeps both marginals unchanged.
struct SquarePair {
    double ax, ay, bx, by;
};

SquarePair two_overlap_squares(int regime, double shift) {
    if (regime == 0) {
        return {0.0, 0.0, shift, shift};
    }
    return {0.0, shift, shift, 0.0};
}

bool in_two_overlap_support(double x, double y, int regime, double shift) {
    const SquarePair sq = two_overlap_squares(regime, shift);
    return in_unit_square(x, y, sq.ax, sq.ay) || in_unit_square(x, y, sq.bx, sq.by);
}

}  // namespace

std::string_view to_string(Dataset dataset) {
    switch (dataset) {
        case Dataset::Uniform: return "uniform";
        case Dataset::Gauss: return "gauss";
        case Dataset::TwoOverlap: return "two-overlap";
    }
    return "unknown";
}

Dataset parse_dataset(std::string_view name) {
    const std::string s = lowercase(name);
    if (s == "uniform") return Dataset::Uniform;
    if (s == "gauss" || s == "gaussian") return Dataset::Gauss;
    if (s == "two-overlap" || s == "twooverlap" || s == "two_overlap") return Dataset::TwoOverlap;
    throw InvalidArgument("unknown dataset '" + std::string(name) +
                          "' (expected uniform, gauss or two-overlap)");
}

void SyntheticStreamSpec::validate() const {
    if (length == 0) throw InvalidArgument("length: must be positive");
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
        throw InvalidArgument("intensity: must be a finite non-negative number");
    }
    if (dataset == Dataset::Gauss && intensity >= 1.0) {
        throw InvalidArgument("intensity: gauss covariance must be below 1");
    }
    if (dims < 2) throw InvalidArgument("dims: must be at least 2");
    if (drifting_dims < 1 || drifting_dims > 2) {
        throw InvalidArgument("drifting_dims: must be 1 or 2");
    }
    if (!(rotation_lambda >= 0.0 && rotation_lambda <= 1.0)) {
        throw InvalidArgument("rotation_lambda: must lie in [0, 1]");
    }
    if (n_drifts > 0) {
        if (drift_min > drift_max) throw InvalidArgument("drift_window: min exceeds max");
        if (drift_max >= length) throw InvalidArgument("drift_window: must lie inside [0, length)");
        if (n_drifts > drift_max - drift_min + 1) {
            throw InvalidArgument("n_drifts: exceeds the size of the drift window");
        }
    }
}

StreamSample Stream::sample(std::size_t i) const {
    StreamSample s;
    s.t = t.at(i);
    s.x.assign(x.row(static_cast<Eigen::Index>(i)).data(),
               x.row(static_cast<Eigen::Index>(i)).data() + x.cols());
    if (has_labels()) s.drift_label = drift_label[i];
    return s;
}

std::vector<StreamSample> Stream::samples() const {
    std::vector<StreamSample> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(sample(i));
    return out;
}

Stream Stream::from_samples(const std::vector<StreamSample>& samples) {
    Stream s;
    if (samples.empty()) return s;
    const std::size_t d = samples.front().x.size();
    if (d == 0) throw InputError("samples must have at least one feature");
    const bool labelled = samples.front().drift_label.has_value();
    s.x.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d));
    s.t.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const StreamSample& smp = samples[i];
        if (smp.x.size() != d) {
            throw InputError("sample " + std::to_string(i) + " has dimension " +
                             std::to_string(smp.x.size()) + ", expected " + std::to_string(d));
        }
        if (i > 0 && smp.t <= s.t.back()) {
            throw InputError("sample " + std::to_string(i) + ": time stamps must strictly increase");
        }
        if (smp.drift_label.has_value() != labelled) {
            throw InputError("sample " + std::to_string(i) + ": drift labels must be all present or all absent");
        }
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(smp.x[j])) {
                throw InputError("sample " + std::to_string(i) + ": non-finite feature value");
            }
            s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = smp.x[j];
        }
        s.t.push_back(smp.t);
        if (labelled) s.drift_label.push_back(*smp.drift_label);
    }
    return s;
}

Matrix random_orthogonal(std::size_t dims, std::uint64_t seed) {
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(dims);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    return q;
}

Stream generate_stream(const SyntheticStreamSpec& spec) {
    spec.validate();
    Rng drift_rng(derive_seed(spec.seed, 0));
    Rng data_rng(derive_seed(spec.seed, 1));

    Stream s;
    std::vector<std::size_t> drift_times;
    if (spec.n_drifts > 0) {
        const std::size_t window = spec.drift_max - spec.drift_min + 1;
        for (std::size_t idx : drift_rng.sample_without_replacement(window, spec.n_drifts)) {
            drift_times.push_back(spec.drift_min + idx);
        }
        std::sort(drift_times.begin(), drift_times.end());
    }

    const auto n = static_cast<Eigen::Index>(spec.length);
    const auto d = static_cast<Eigen::Index>(spec.dims);
    const double shift = spec.intensity;
    const bool shift_second = spec.drifting_dims == 2;
    s.x.resize(n, d);
    s.t.resize(spec.length);
    s.drift_label.assign(spec.length, false);

    std::size_t next_drift = 0;
    int regime = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        while (next_drift < drift_times.size() && drift_times[next_drift] <= ui) {
            regime ^= 1;
            ++next_drift;
        }
        s.t[ui] = static_cast<std::int64_t>(i);
        auto row = s.x.row(i);
        switch (spec.dataset) {
            case Dataset::Uniform: {
                const double off = regime == 1 ? shift : 0.0;
                row(0) = data_rng.uniform() + off;
                row(1) = data_rng.uniform() + (shift_second ? off : 0.0);
                for (Eigen::Index j = 2; j < d; ++j) row(j) = data_rng.uniform();
                if (spec.n_drifts > 0) {
                    // intersection of [0,1)^k and [shift, 1+shift)^k
                    bool inside = row(0) >= shift && row(0) < 1.0;
                    if (shift_second) inside = inside && row(1) >= shift && row(1) < 1.0;
                    s.drift_label[ui] = !inside;
                }
                break;
            }
            case Dataset::Gauss: {
                const double c = regime == 1 ? -shift : shift;
                const double z0 = data_rng.normal();
                const double z1 = data_rng.normal();
                row(0) = z0;
                row(1) = c * z0 + std::sqrt(1.0 - c * c) * z1;
                for (Eigen::Index j = 2; j < d; ++j) row(j) = data_rng.normal();
                s.drift_label[ui] = !drift_times.empty() && ui >= drift_times.front();
                break;
            }
            case Dataset::TwoOverlap: {
                const SquarePair sq = two_overlap_squares(regime, shift);
                const bool first = data_rng.uniform() < 0.5;
                row(0) = data_rng.uniform() + (first ? sq.ax : sq.bx);
                row(1) = data_rng.uniform() + (first ? sq.ay : sq.by);
                for (Eigen::Index j = 2; j < d; ++j) row(j) = data_rng.uniform();
                if (spec.n_drifts > 0) {
                    s.drift_label[ui] = !(in_two_overlap_support(row(0), row(1), 0, shift) &&
                                          in_two_overlap_support(row(0), row(1), 1, shift));
                }
                break;
            }
        }
    }

    const Eigen::RowVectorXd mean = s.x.colwise().mean();
    s.x.rowwise() -= mean;
    if (spec.rotation_lambda > 0.0) {
        const Matrix o = random_orthogonal(spec.dims, derive_seed(spec.seed, 2));
        const Matrix m = spec.rotation_lambda * o +
                         (1.0 - spec.rotation_lambda) * Matrix::Identity(d, d);
        s.x = (s.x * m.transpose()).eval();
    }
    s.drift_times = std::move(drift_times);
    return s;
}

std::vector<Chunk> chunk_stream(std::size_t length, std::size_t chunk_size, std::size_t overlap,
                                const std::vector<std::size_t>* drift_times) {
    if (chunk_size == 0) throw InvalidArgument("chunk_size: must be positive");
    if (overlap >= chunk_size) throw InvalidArgument("overlap: must be smaller than chunk_size");
    std::vector<Chunk> chunks;
    const std::size_t step = chunk_size - overlap;
    for (std::size_t start = 0; start + chunk_size <= length; start += step) {
        Chunk c{start, start + chunk_size, std::nullopt};
        if (drift_times != nullptr) {
            c.contains_drift = std::any_of(drift_times->begin(), drift_times->end(),
                                           [&](std::size_t t) { return t > c.start && t < c.end; });
        }
        chunks.push_back(c);
    }
    return chunks;
}

std::vector<Chunk> chunk_stream(const Stream& stream, std::size_t chunk_size, std::size_t overlap) {
    return chunk_stream(stream.size(), chunk_size, overlap,
                        stream.drift_times ? &*stream.drift_times : nullptr);
}

Matrix slice_rows(const Matrix& x, std::size_t start, std::size_t end) {
    return x.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(end - start));
}

Matrix WindowPair::pooled() const {
    Matrix out(reference.rows() + current.rows(), reference.cols());
    out << reference, current;
    return out;
}

Labels WindowPair::labels() const {
    Labels y(total(), 0);
    std::fill(y.begin() + reference.rows(), y.end(), std::uint8_t{1});
    return y;
}

WindowPair split_at(const Matrix& rows, std::size_t split) {
    const auto n = static_cast<std::size_t>(rows.rows());
    if (split == 0 || split >= n) {
        throw InvalidArgument("split index must leave both windows non-empty");
    }
    return WindowPair{slice_rows(rows, 0, split), slice_rows(rows, split, n), split};
}

WindowPair split_mid(const Matrix& rows) {
    const auto n = static_cast<std::size_t>(rows.rows());
    if (n < 2) throw InvalidArgument("split_mid: chunk needs at least two samples");
    return split_at(rows, (n + 1) / 2);
}

WindowPair split_mid(const Stream& stream, const Chunk& chunk) {
    if (chunk.end > stream.size() || chunk.start >= chunk.end) {
        throw InvalidArgument("split_mid: chunk out of range");
    }
    return split_mid(slice_rows(stream.x, chunk.start, chunk.end));
}

}  // namespace driftbench
