#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftbench/streams.hpp"

namespace driftbench {

/// Raised by the CSV reader; carries the 1-based line number of the bad row.
class CsvError : public InputError {
public:
    CsvError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Stream CSV: header `t,x0,...,x{d-1}[,drift]`, one sample per row.
void write_stream_csv(std::ostream& out, const Stream& stream);
void write_stream_csv(const std::filesystem::path& path, const Stream& stream);
Stream read_stream_csv(std::istream& in);
Stream read_stream_csv(const std::filesystem::path& path);

/// Sidecar JSON with the resolved generator spec and sampled drift times.
std::string stream_sidecar_json(const SyntheticStreamSpec& spec,
                                const std::vector<std::size_t>& drift_times);
/// Reads `drift_times` from a sidecar written by stream_sidecar_json.
std::vector<std::size_t> read_sidecar_drift_times(const std::filesystem::path& path);

}  // namespace driftbench
