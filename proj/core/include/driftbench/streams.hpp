#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driftbench/common.hpp"

namespace driftbench {

enum class Dataset { Uniform, Gauss, TwoOverlap };

std::string_view to_string(Dataset dataset);
/// Case-insensitive; accepts "uniform", "gauss", "two-overlap"/"twooverlap"/"two_overlap".
Dataset parse_dataset(std::string_view name);

/// One timestamped observation.
struct StreamSample {
    std::int64_t t = 0;
    std::vector<double> x;
    std::optional<bool> drift_label;
};

/// Parameterization of a synthetic benchmark stream.
///
/// Drift times are drawn from the inclusive index range
/// [drift_min, drift_max]. `drifting_dims` (1 or 2) selects how many of the
/// two structured dimensions carry the drift; it only affects the uniform
/// dataset, where a single drifting dimension gives a shift along one axis.
struct SyntheticStreamSpec {
    Dataset dataset = Dataset::Uniform;
    std::size_t length = 750;
    double intensity = 0.125;
    std::size_t dims = 5;
    std::size_t n_drifts = 1;
    std::size_t drift_min = 100;
    std::size_t drift_max = 650;
    double rotation_lambda = 0.0;
    std::uint64_t seed = 0;
    std::size_t drifting_dims = 2;

    /// Throws InvalidArgument naming the offending field.
    void validate() const;
};

/// A stream held column-compatible with the numeric routines: one sample per
/// row of `x`, arrival times in `t`.
struct Stream {
    Matrix x;
    std::vector<std::int64_t> t;
    /// Per-sample ground truth; empty when unknown.
    std::vector<bool> drift_label;
    /// Sample indices at which a new concept starts; nullopt when unknown.
    std::optional<std::vector<std::size_t>> drift_times;

    std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(x.cols()); }
    bool has_labels() const { return !drift_label.empty(); }

    StreamSample sample(std::size_t i) const;
    std::vector<StreamSample> samples() const;

    /// Validates d >= 1, equal dimension, strictly increasing t and finite values.
    static Stream from_samples(const std::vector<StreamSample>& samples);
};

/// Generates a stream; equal specs give bit-identical output.
Stream generate_stream(const SyntheticStreamSpec& spec);

/// Haar-distributed orthogonal matrix: QR of a standard normal matrix with the
/// signs of R's diagonal folded into Q.
Matrix random_orthogonal(std::size_t dims, std::uint64_t seed);

/// Contiguous slice [start, end) of a stream.
struct Chunk {
    std::size_t start = 0;
    std::size_t end = 0;
    std::optional<bool> contains_drift;

    std::size_t size() const { return end - start; }
};

/// Overlapping chunks; the trailing incomplete chunk is dropped.
/// `contains_drift` is set iff drift times are known; it is true when a
/// drift time lies strictly inside (start, end).
std::vector<Chunk> chunk_stream(std::size_t length, std::size_t chunk_size, std::size_t overlap,
                                const std::vector<std::size_t>* drift_times = nullptr);
std::vector<Chunk> chunk_stream(const Stream& stream, std::size_t chunk_size, std::size_t overlap);

/// Reference and current window, reference strictly before current.
struct WindowPair {
    Matrix reference;
    Matrix current;
    std::size_t split_index = 0;

    std::size_t total() const {
        return static_cast<std::size_t>(reference.rows() + current.rows());
    }
    /// Reference rows followed by current rows.
    Matrix pooled() const;
    /// 0 for reference rows, 1 for current rows, in pooled order.
    Labels labels() const;
};

/// Splits `rows` at `split`: reference = [0, split), current = [split, n).
WindowPair split_at(const Matrix& rows, std::size_t split);

/// Splits a chunk at its midpoint; odd sizes give the extra sample to the
/// reference window.
WindowPair split_mid(const Stream& stream, const Chunk& chunk);
WindowPair split_mid(const Matrix& rows);

/// Rows [start, end) of a matrix.
Matrix slice_rows(const Matrix& x, std::size_t start, std::size_t end);

}  // namespace driftbench
