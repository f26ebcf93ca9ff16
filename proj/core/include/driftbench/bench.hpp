#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "driftbench/detectors.hpp"
#include "driftbench/localizers.hpp"
#include "driftbench/streams.hpp"

namespace driftbench {

/// Configuration error located by a JSON pointer into the config document.
class ConfigError : public InvalidArgument {
public:
    ConfigError(std::string pointer, const std::string& message)
        : InvalidArgument(pointer + ": " + message), pointer_(std::move(pointer)) {}

    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

enum class BenchKind { Detection, Localization, SplitPoint };
enum class SweepParam { Intensity, Dims, NDrifts, Lambda, Samples };
enum class LocalizerKind { Kdq, LddDis, MbDl, KolmogorovTree };
enum class Profile { Ci, Paper };

std::string_view to_string(BenchKind kind);
std::string_view to_string(SweepParam param);
std::string_view to_string(LocalizerKind kind);
std::string_view to_string(Profile profile);
SweepParam parse_sweep_param(std::string_view name);
LocalizerKind parse_localizer(std::string_view name);
Profile parse_profile(std::string_view name);

struct ExperimentConfig {
    BenchKind kind = BenchKind::Detection;
    /// Base stream; the sweep parameter and the seed are overwritten per run.
    SyntheticStreamSpec stream;
    SweepParam sweep_param = SweepParam::Intensity;
    std::vector<double> sweep_values;

    std::vector<Method> methods;
    std::vector<LocalizerKind> localizers;
    DetectorConfig detector;
    KdqConfig kdq;
    LddConfig ldd;
    MbConfig mb;
    KolmogorovTreeConfig kolmogorov_tree;

    std::vector<std::size_t> chunk_sizes{150, 250};
    std::size_t overlap = 100;
    std::size_t n_runs = 500;
    std::uint64_t base_seed = 0;
    /// Block length of the split-point study.
    std::size_t block_size = 250;

    void validate() const;
    /// ci: 100 runs and B = 500; paper: 500 runs and B = 2500.
    void apply_profile(Profile profile);
};

/// Parses the JSON config document. Unknown keys and ill-typed values raise
/// ConfigError naming the offending field.
ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string experiment_config_json(const ExperimentConfig& config);

/// Stream spec of one run at one sweep point.
SyntheticStreamSpec run_spec(const ExperimentConfig& config, double param_value, std::size_t run);

struct RunRecord {
    std::string method;
    double param_value = 0.0;
    std::size_t run = 0;
    double value = 0.0;
};

struct SummaryRow {
    std::string method;
    double param_value = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

struct BenchResult {
    BenchKind kind = BenchKind::Detection;
    std::string dataset;
    std::string param_name;
    /// "auc" for detection and localization, "score" for the split-point study.
    std::string value_name = "auc";
    std::vector<RunRecord> runs;
    std::vector<SummaryRow> summary;
    std::vector<std::string> warnings;

    /// Per-run values of one method at one sweep point, ordered by run.
    std::vector<double> values(std::string_view method, double param_value) const;
    const SummaryRow* find(std::string_view method, double param_value) const;
};

struct BenchOptions {
    std::size_t threads = 1;
    /// Called once per finished sweep point.
    std::function<void(const std::string&)> progress;
};

BenchResult run_detection_bench(const ExperimentConfig& config, const BenchOptions& options = {});
BenchResult run_localization_bench(const ExperimentConfig& config, const BenchOptions& options = {});
BenchResult run_splitpoint_study(const ExperimentConfig& config, const BenchOptions& options = {});
BenchResult run_bench(const ExperimentConfig& config, const BenchOptions& options = {});

/// Per-sample localization scores for one window pair.
LocalizationResult localize(LocalizerKind kind, const Stream& stream, std::size_t split,
                            const ExperimentConfig& config, std::uint64_t seed);

/// `method,dataset,param_name,param_value,run,<value_name>`
void write_runs_csv(const BenchResult& result, std::ostream& out);
/// `method,dataset,param_name,param_value,n,mean,min,q25,median,q75,max`
void write_summary_csv(const BenchResult& result, std::ostream& out);

/// Runs `task(i)` for i in [0, n) on up to `threads` workers; the first
/// exception is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace driftbench
