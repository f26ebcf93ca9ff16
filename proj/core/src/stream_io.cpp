#include "driftbench/stream_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace driftbench {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_stream_csv(std::ostream& out, const Stream& stream) {
    out << 't';
    for (std::size_t j = 0; j < stream.dims(); ++j) out << ",x" << j;
    if (stream.has_labels()) out << ",drift";
    out << '\n';
    for (std::size_t i = 0; i < stream.size(); ++i) {
        out << stream.t[i];
        for (std::size_t j = 0; j < stream.dims(); ++j) {
            out << ',' << format_double(stream.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        if (stream.has_labels()) out << ',' << (stream.drift_label[i] ? '1' : '0');
        out << '\n';
    }
}

void write_stream_csv(const std::filesystem::path& path, const Stream& stream) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_stream_csv(out, stream);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

Stream read_stream_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw CsvError(1, "missing header");
    const auto header = split_fields(trim(line));
    if (header.empty() || trim(header[0]) != "t") throw CsvError(1, "header must start with 't'");
    bool labelled = trim(header.back()) == "drift";
    const std::size_t d = header.size() - 1 - (labelled ? 1 : 0);
    if (d == 0) throw CsvError(1, "header has no feature columns");
    for (std::size_t j = 0; j < d; ++j) {
        if (trim(header[j + 1]) != "x" + std::to_string(j)) {
            throw CsvError(1, "expected column 'x" + std::to_string(j) + "'");
        }
    }

    std::vector<StreamSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto fields = split_fields(row);
        if (fields.size() != header.size()) {
            throw CsvError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
        }
        StreamSample s;
        if (!parse_number(trim(fields[0]), s.t) || s.t < 0) {
            throw CsvError(line_no, "invalid time stamp");
        }
        if (!samples.empty() && s.t <= samples.back().t) {
            throw CsvError(line_no, "time stamps must strictly increase");
        }
        s.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            if (!parse_number(trim(fields[j + 1]), s.x[j]) || !std::isfinite(s.x[j])) {
                throw CsvError(line_no, "invalid value in column x" + std::to_string(j));
            }
        }
        if (labelled) {
            const std::string_view f = trim(fields.back());
            if (f != "0" && f != "1") throw CsvError(line_no, "drift must be 0 or 1");
            s.drift_label = f == "1";
        }
        samples.push_back(std::move(s));
    }
    return Stream::from_samples(samples);
}

Stream read_stream_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_stream_csv(in);
}

std::string stream_sidecar_json(const SyntheticStreamSpec& spec,
                                const std::vector<std::size_t>& drift_times) {
    nlohmann::ordered_json j;
    j["dataset"] = std::string(to_string(spec.dataset));
    j["length"] = spec.length;
    j["intensity"] = spec.intensity;
    j["dims"] = spec.dims;
    j["n_drifts"] = spec.n_drifts;
    j["drift_window"] = {spec.drift_min, spec.drift_max};
    j["rotation_lambda"] = spec.rotation_lambda;
    j["drifting_dims"] = spec.drifting_dims;
    j["seed"] = spec.seed;
    j["drift_times"] = drift_times;
    return j.dump(2) + "\n";
}

std::vector<std::size_t> read_sidecar_drift_times(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        return j.at("drift_times").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

}  // namespace driftbench
