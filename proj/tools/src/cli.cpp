#include "driftbench/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftbench/bench.hpp"
#include "driftbench/detectors.hpp"
#include "driftbench/explain.hpp"
#include "driftbench/localizers.hpp"
#include "driftbench/stream_io.hpp"

namespace driftbench {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("DRIFTBENCH_SEED")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw InvalidArgument(std::string("DRIFTBENCH_SEED: not an unsigned integer: '") + env + "'");
    }
    return 0;
}

// Rewrites a "field: message" error into one naming the command-line flag.
std::string flag_message(const std::string& message) {
    static const std::map<std::string, std::string> flags = {
        {"length", "--length"},       {"intensity", "--intensity"},         {"dims", "--dims"},
        {"n_drifts", "--n-drifts"},   {"drift_window", "--drift-min/--drift-max"},
        {"rotation_lambda", "--lambda"}, {"drifting_dims", "--drifting-dims"}};
    const auto colon = message.find(':');
    if (colon != std::string::npos) {
        auto it = flags.find(message.substr(0, colon));
        if (it != flags.end()) return it->second + message.substr(colon);
    }
    return message;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
            return;
        }
        file_.open(path, std::ios::binary);
        if (!file_) throw IoError("cannot open '" + path + "' for writing");
        stream_ = &file_;
    }
    std::ostream& get() { return *stream_; }
    void close() {
        stream_->flush();
        if (!*stream_) throw IoError("write failed");
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw IoError("write to '" + path.string() + "' failed");
}

Stream load_stream(const std::string& path) {
    if (!fs::exists(path)) throw IoError("no such file: '" + path + "'");
    Stream s = read_stream_csv(fs::path(path));
    const fs::path sidecar = path + ".json";
    if (!s.drift_times && fs::exists(sidecar)) s.drift_times = read_sidecar_drift_times(sidecar);
    return s;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

struct GenerateArgs {
    SyntheticStreamSpec spec;
    std::string dataset = "uniform";
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct DetectArgs {
    std::string input;
    std::vector<std::string> methods{"mmd"};
    std::size_t chunk_size = 250;
    std::size_t overlap = 100;
    std::size_t bootstrap = 500;
    double p_detect = 0.05;
    std::size_t shape_window = 50;
    std::optional<std::size_t> shape_test_window;
    std::string classifier = "logistic";
    std::optional<double> bandwidth;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string change_points;
    bool fail_on_drift = false;
    std::optional<double> threshold;
};

struct LocalizeArgs {
    std::string input;
    std::string method = "mb-dl";
    std::optional<std::size_t> split;
    std::optional<std::uint64_t> seed;
    std::size_t k = 30;
    std::size_t min_samples = 10;
    std::size_t bootstrap = 500;
    std::string out;
};

struct ExplainArgs {
    std::string input;
    std::optional<std::size_t> split;
    std::optional<std::size_t> window;
    std::optional<std::size_t> bins;
    std::string classifier = "random-forest";
    std::size_t repeats = 5;
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct BenchArgs {
    std::string config;
    std::string out_dir = ".";
    std::string profile;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
};

int cmd_generate(GenerateArgs& a, std::ostream& out) {
    a.spec.dataset = parse_dataset(a.dataset);
    a.spec.seed = resolve_seed(a.seed);
    try {
        a.spec.validate();
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(flag_message(e.what()));
    }
    const Stream s = generate_stream(a.spec);
    const std::string sidecar = stream_sidecar_json(a.spec, *s.drift_times);
    if (a.out.empty() || a.out == "-") {
        write_stream_csv(out, s);
        return kExitOk;
    }
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw IoError("cannot open '" + a.out + "' for writing");
    write_stream_csv(f, s);
    if (!f) throw IoError("write to '" + a.out + "' failed");
    write_text(a.out + ".json", sidecar);
    return kExitOk;
}

int cmd_detect(const DetectArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<Method> methods;
    for (const std::string& m : a.methods) methods.push_back(parse_method(m));
    DetectorConfig base;
    base.bootstrap = a.bootstrap;
    base.p_detect = a.p_detect;
    base.shape_window = a.shape_window;
    base.shape_test_window = a.shape_test_window.value_or(a.chunk_size / 2);
    base.classifier.kind = parse_classifier(a.classifier);
    base.kernel = a.bandwidth ? KernelSpec::rbf(*a.bandwidth) : KernelSpec::rbf_median();
    base.seed = resolve_seed(a.seed);
    base.validate();
    const double threshold = a.threshold.value_or(1.0 - a.p_detect);

    const Stream stream = load_stream(a.input);
    const auto chunks = chunk_stream(stream, a.chunk_size, a.overlap);
    if (chunks.empty()) throw InvalidArgument("--chunk-size: exceeds the stream length " + std::to_string(stream.size()));

    Output csv(a.out, out);
    csv.get() << "chunk_start,chunk_end,method,statistic,p_value,score,change_point,contains_drift\n";
    json cps = json::object();
    bool drift = false;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        DetectorConfig cfg = base;
        cfg.method = methods[mi];
        cfg.seed = derive_seed(base.seed, mi);
        const auto scores = score_chunks(stream, chunks, cfg);
        json list = json::array();
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            const Chunk& c = chunks[i];
            const DriftScore& s = scores[i];
            drift = drift || s.score > threshold;
            std::string cp;
            if (s.change_point) {
                cp = std::to_string(c.start + *s.change_point);
                list.push_back({{"chunk_start", c.start},
                                {"chunk_end", c.end},
                                {"change_point", c.start + *s.change_point},
                                {"score", s.score}});
            }
            csv.get() << c.start << ',' << c.end << ',' << to_string(cfg.method) << ',' << format_double(s.statistic)
                      << ',' << optional_number(s.p_value) << ',' << format_double(s.score) << ',' << cp << ','
                      << (c.contains_drift ? (*c.contains_drift ? "1" : "0") : "") << '\n';
        }
        cps[std::string(to_string(cfg.method))] = list;
    }
    csv.close();
    if (!a.change_points.empty()) write_text(a.change_points, cps.dump(2) + "\n");
    if (a.fail_on_drift && drift) {
        err << "drift detected (score above " << format_double(threshold) << ")\n";
        return kExitDrift;
    }
    return kExitOk;
}

std::size_t default_split(const Stream& s, const std::optional<std::size_t>& split) {
    std::size_t v = s.size() / 2;
    if (split) v = *split;
    else if (s.drift_times && !s.drift_times->empty()) v = s.drift_times->front();
    if (v == 0 || v >= s.size()) throw InvalidArgument("--split: must lie strictly inside the stream");
    return v;
}

int cmd_localize(const LocalizeArgs& a, std::ostream& out) {
    const LocalizerKind kind = parse_localizer(a.method);
    ExperimentConfig cfg;
    cfg.ldd.k = a.k;
    cfg.kdq.min_samples = a.min_samples;
    cfg.kdq.bootstrap = a.bootstrap;
    cfg.ldd.validate();
    cfg.kdq.validate();
    const Stream stream = load_stream(a.input);
    const std::size_t split = default_split(stream, a.split);
    const LocalizationResult res = localize(kind, stream, split, cfg, resolve_seed(a.seed));

    Output csv(a.out, out);
    csv.get() << "sample_index,t,score,segment_id,drift_label\n";
    for (std::size_t i = 0; i < stream.size(); ++i) {
        csv.get() << i << ',' << stream.t[i] << ',' << format_double(res.per_sample_scores[i]) << ','
                  << (res.segments ? std::to_string((*res.segments)[i]) : "") << ','
                  << (stream.has_labels() ? (stream.drift_label[i] ? "1" : "0") : "") << '\n';
    }
    csv.close();
    return kExitOk;
}

int cmd_explain(const ExplainArgs& a, std::ostream& out) {
    ClassifierSpec classifier;
    classifier.kind = parse_classifier(a.classifier);
    if (a.repeats < 1) throw InvalidArgument("--repeats: must be positive");
    const Stream stream = load_stream(a.input);
    const std::size_t split = default_split(stream, a.split);
    const std::size_t l = a.window.value_or(std::min(split, stream.size() - split));
    if (l < 1 || l > split || l > stream.size() - split) {
        throw InvalidArgument("--window: both windows must fit inside the stream");
    }
    // open intervals covering rows [split - l, split) and [split, split + l)
    const double s = static_cast<double>(split) - static_cast<double>(l + 1) / 2.0;
    const double t = static_cast<double>(split) + static_cast<double>(l - 1) / 2.0;
    const std::uint64_t seed = resolve_seed(a.seed);

    json report;
    report["magnitudes"] = json::array();
    report["conditional"] = json::array();
    report["importances"] = json::array();
    const std::size_t d = stream.dims();
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t f[] = {j};
        report["magnitudes"].push_back({{"features", {j}}, {"magnitude", drift_magnitude(stream.x, s, t, static_cast<double>(l), f, a.bins)}});
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) continue;
            const std::size_t f[] = {i};
            const std::size_t g[] = {j};
            report["conditional"].push_back(
                {{"features", {i}}, {"given", {j}},
                 {"magnitude", conditional_drift_magnitude(stream.x, s, t, static_cast<double>(l), f, g, a.bins)}});
        }
    }
    const Matrix rows = slice_rows(stream.x, split - l, split + l);
    CvConfig cv;
    cv.seed = seed;
    const FeatureImportanceReport imp = permutation_importance(split_at(rows, l), classifier, cv, a.repeats, seed);
    for (const FeatureImportance& fi : imp.features) {
        report["importances"].push_back({{"feature", fi.feature},
                                         {"baseline", fi.baseline},
                                         {"permuted", fi.permuted},
                                         {"importance", fi.importance}});
    }
    report["config"] = {{"split", split},
                        {"window", l},
                        {"s", s},
                        {"t", t},
                        {"bins", a.bins ? json(*a.bins) : json("auto")},
                        {"classifier", to_string(classifier.kind)},
                        {"repeats", a.repeats},
                        {"seed", seed}};
    Output o(a.out, out);
    o.get() << report.dump(2) << '\n';
    o.close();
    return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    std::ifstream f(a.config, std::ios::binary);
    if (!f) throw IoError("cannot read config '" + a.config + "'");
    std::stringstream text;
    text << f.rdbuf();
    ExperimentConfig cfg = parse_experiment_config(text.str());
    if (!a.profile.empty()) cfg.apply_profile(parse_profile(a.profile));
    if (a.seed || std::getenv("DRIFTBENCH_SEED")) cfg.base_seed = resolve_seed(a.seed);
    cfg.validate();

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + a.out_dir + "': " + ec.message());
    BenchOptions options;
    options.threads = std::max<std::size_t>(1, a.threads);
    options.progress = [&](const std::string& line) { out << line << std::endl; };
    const BenchResult result = run_bench(cfg, options);
    for (const std::string& w : result.warnings) out << "warning: " << w << '\n';

    const fs::path dir(a.out_dir);
    std::ostringstream runs;
    std::ostringstream summary;
    write_runs_csv(result, runs);
    write_summary_csv(result, summary);
    write_text(dir / "runs.csv", runs.str());
    write_text(dir / "summary.csv", summary.str());
    write_text(dir / "config.json", experiment_config_json(cfg) + "\n");
    return kExitOk;
}

std::string method_list() {
    std::string s;
    for (std::string_view m : method_names()) s += (s.empty() ? "" : ", ") + std::string(m);
    return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Concept drift detection, localization and benchmarking"};
    app.name("driftbench");
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a synthetic stream CSV and its JSON sidecar");
    generate->add_option("--dataset", gen.dataset, "uniform, gauss or two-overlap")->capture_default_str();
    generate->add_option("--length", gen.spec.length)->capture_default_str();
    generate->add_option("--intensity", gen.spec.intensity)->capture_default_str();
    generate->add_option("--dims", gen.spec.dims)->capture_default_str();
    generate->add_option("--n-drifts", gen.spec.n_drifts)->capture_default_str();
    generate->add_option("--drift-min", gen.spec.drift_min)->capture_default_str();
    generate->add_option("--drift-max", gen.spec.drift_max)->capture_default_str();
    generate->add_option("--lambda", gen.spec.rotation_lambda, "Rotation mixing weight in [0, 1]")->capture_default_str();
    generate->add_option("--drifting-dims", gen.spec.drifting_dims)->capture_default_str();
    generate->add_option("--seed", gen.seed, "Defaults to $DRIFTBENCH_SEED, then 0");
    generate->add_option("-o,--out", gen.out, "Output CSV (stdout when omitted)");

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "Score stream chunks with drift detectors");
    detect->add_option("input", det.input, "Stream CSV")->required();
    detect->add_option("-m,--method", det.methods, "Detector(s): " + method_list())->delimiter(',')->capture_default_str();
    detect->add_option("--chunk-size", det.chunk_size)->capture_default_str();
    detect->add_option("--overlap", det.overlap)->capture_default_str();
    detect->add_option("--bootstrap", det.bootstrap, "Permutations per test")->capture_default_str();
    detect->add_option("--p-detect", det.p_detect)->capture_default_str();
    detect->add_option("--shape-window", det.shape_window)->capture_default_str();
    detect->add_option("--shape-test-window", det.shape_test_window, "ShapeDD test window per side (default: chunk size / 2)");
    detect->add_option("--classifier", det.classifier, "D3 model")->capture_default_str();
    detect->add_option("--bandwidth", det.bandwidth, "RBF bandwidth (median heuristic when omitted)");
    detect->add_option("--seed", det.seed);
    detect->add_option("-o,--out", det.out, "Chunk-score CSV (stdout when omitted)");
    detect->add_option("--change-points", det.change_points, "Write change points as JSON");
    detect->add_flag("--fail-on-drift", det.fail_on_drift, "Exit with 3 when any score exceeds the threshold");
    detect->add_option("--threshold", det.threshold, "Drift score threshold (default 1 - p-detect)");

    LocalizeArgs loc;
    auto* localize_cmd = app.add_subcommand("localize", "Per-sample drift localization");
    localize_cmd->add_option("input", loc.input, "Stream CSV")->required();
    localize_cmd->add_option("-m,--method", loc.method, "kdq, ldd-dis, mb-dl or kolmogorov-tree")->capture_default_str();
    localize_cmd->add_option("--split", loc.split, "Drift point (default: sidecar drift time, else midpoint)");
    localize_cmd->add_option("--k", loc.k, "LDD-DIS neighbours")->capture_default_str();
    localize_cmd->add_option("--min-samples", loc.min_samples, "kdq-tree leaf size")->capture_default_str();
    localize_cmd->add_option("--bootstrap", loc.bootstrap)->capture_default_str();
    localize_cmd->add_option("--seed", loc.seed);
    localize_cmd->add_option("-o,--out", loc.out);

    ExplainArgs exp;
    auto* explain = app.add_subcommand("explain", "Feature-wise drift magnitudes and importances");
    explain->add_option("input", exp.input, "Stream CSV")->required();
    explain->add_option("--split", exp.split);
    explain->add_option("--window", exp.window, "Window length l on each side of the split");
    explain->add_option("--bins", exp.bins);
    explain->add_option("--classifier", exp.classifier)->capture_default_str();
    explain->add_option("--repeats", exp.repeats)->capture_default_str();
    explain->add_option("--seed", exp.seed);
    explain->add_option("-o,--out", exp.out);

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark experiment from a JSON config");
    bench_cmd->add_option("config", bench.config, "Experiment config JSON")->required();
    bench_cmd->add_option("-o,--out", bench.out_dir, "Output directory")->capture_default_str();
    bench_cmd->add_option("--profile", bench.profile, "ci or paper");
    bench_cmd->add_option("--threads", bench.threads)->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*generate) return cmd_generate(gen, out);
        if (*detect) return cmd_detect(det, out, err);
        if (*localize_cmd) return cmd_localize(loc, out);
        if (*explain) return cmd_explain(exp, out);
        if (*bench_cmd) return cmd_bench(bench, out);
    } catch (const ConfigError& e) {
        err << "config error at " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::string msg = e.what();
        if (msg.rfind("unknown detector", 0) == 0) msg += " (valid: " + method_list() + ")";
        err << "error: " << msg << '\n';
        return kExitUsage;
    } catch (const CsvError& e) {
        err << "error: malformed stream CSV at " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace driftbench
