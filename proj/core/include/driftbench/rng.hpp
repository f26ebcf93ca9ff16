#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace driftbench {

/// splitmix64 finalizer. Used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Child seed for stream `index` of a parent seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

/// Deterministic random source.
///
/// The engine is mt19937_64, whose output sequence is fixed by the standard.
/// The standard distributions are not portable across library
/// implementations, so the variates below are derived directly from the
/// engine output.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal (Marsaglia polar method).
    double normal();

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& values) { shuffle(std::span<T>(values)); }

    /// `k` distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace driftbench
