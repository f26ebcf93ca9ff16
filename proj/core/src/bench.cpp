#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "driftbench/bench.hpp"
#include "driftbench/eval.hpp"
#include "driftbench/stream_io.hpp"

namespace driftbench {

using json = nlohmann::ordered_json;

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view name, const std::string_view (&names)[N], const char* what) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::replace(lower.begin(), lower.end(), '_', '-');
    std::string valid;
    for (std::size_t i = 0; i < N; ++i) {
        if (lower == names[i]) return static_cast<E>(i);
        valid += (i ? ", " : "") + std::string(names[i]);
    }
    throw InvalidArgument(std::string("unknown ") + what + " '" + std::string(name) + "' (expected " + valid + ")");
}

constexpr std::string_view kKindNames[] = {"detection", "localization", "splitpoint"};
constexpr std::string_view kSweepNames[] = {"intensity", "dims", "n-drifts", "lambda", "samples"};
constexpr std::string_view kLocalizerNames[] = {"kdq", "ldd-dis", "mb-dl", "kolmogorov-tree"};
constexpr std::string_view kProfileNames[] = {"ci", "paper"};

std::string escape_pointer(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// Walks one JSON object, recording which keys were consumed.
class Reader {
public:
    Reader(const json& node, std::string pointer) : node_(node), pointer_(std::move(pointer)) {
        if (!node_.is_object()) throw ConfigError(where(), "expected an object");
    }

    std::string at(std::string_view key) const { return pointer_ + "/" + escape_pointer(key); }

    const json* find(const char* key) {
        seen_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    void get(const char* key, std::size_t& out) {
        if (const json* v = find(key)) out = to_size(*v, at(key));
    }
    void get(const char* key, std::uint64_t& out, int) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
                throw ConfigError(at(key), "expected a non-negative integer");
            }
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, double& out) {
        if (const json* v = find(key)) out = to_double(*v, at(key));
    }
    void get(const char* key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(at(key), "expected a boolean");
            out = v->get<bool>();
        }
    }
    void get(const char* key, std::optional<std::size_t>& out) {
        if (const json* v = find(key)) out = v->is_null() ? std::nullopt : std::optional(to_size(*v, at(key)));
    }
    void get(const char* key, std::optional<double>& out) {
        if (const json* v = find(key)) out = v->is_null() ? std::nullopt : std::optional(to_double(*v, at(key)));
    }
    std::optional<std::string> string(const char* key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) throw ConfigError(at(key), "expected a string");
        return v->get<std::string>();
    }

    template <typename F>
    void object(const char* key, F&& f) {
        if (const json* v = find(key)) {
            Reader child(*v, at(key));
            f(child);
            child.finish();
        }
    }

    template <typename F>
    void array(const char* key, F&& f) {
        if (const json* v = find(key)) {
            if (!v->is_array()) throw ConfigError(at(key), "expected an array");
            for (std::size_t i = 0; i < v->size(); ++i) f((*v)[i], at(key) + "/" + std::to_string(i));
        }
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
        }
    }

    std::string where() const { return pointer_.empty() ? "/" : pointer_; }

    static std::size_t to_size(const json& v, const std::string& ptr) {
        if (v.is_number_unsigned()) return v.get<std::size_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
        throw ConfigError(ptr, "expected a non-negative integer");
    }
    static double to_double(const json& v, const std::string& ptr) {
        if (!v.is_number()) throw ConfigError(ptr, "expected a number");
        return v.get<double>();
    }

private:
    const json& node_;
    std::string pointer_;
    std::set<std::string> seen_;
};

template <typename F>
auto located(const std::string& ptr, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(ptr, e.what());
    }
}

void read_classifier(Reader& r, ClassifierSpec& spec) {
    if (auto kind = r.string("kind")) spec.kind = located(r.at("kind"), [&] { return parse_classifier(*kind); });
    r.get("l2", spec.l2);
    r.get("tolerance", spec.tolerance);
    r.get("max_iterations", spec.max_iterations);
    r.get("k", spec.k);
    r.get("n_trees", spec.n_trees);
    r.get("max_depth", spec.max_depth);
    r.get("min_leaf", spec.min_leaf);
    r.get("max_features", spec.max_features);
    r.get("bootstrap", spec.bootstrap);
    r.get("extra_trees", spec.extra_trees);
    located(r.where(), [&] { spec.validate(); return 0; });
}

void read_kernel(Reader& r, KernelSpec& spec) {
    if (auto family = r.string("family")) {
        if (*family == "rbf") spec.family = KernelFamily::Rbf;
        else if (*family == "linear") spec.family = KernelFamily::Linear;
        else throw ConfigError(r.at("family"), "unknown kernel family (expected rbf or linear)");
    }
    r.get("bandwidth", spec.bandwidth);
    located(r.where(), [&] { spec.validate(); return 0; });
}

json classifier_json(const ClassifierSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    j["l2"] = s.l2;
    j["tolerance"] = s.tolerance;
    j["max_iterations"] = s.max_iterations;
    j["k"] = s.k;
    j["n_trees"] = s.n_trees;
    j["max_depth"] = s.max_depth ? json(*s.max_depth) : json(nullptr);
    j["min_leaf"] = s.min_leaf;
    j["max_features"] = s.max_features ? json(*s.max_features) : json(nullptr);
    j["bootstrap"] = s.bootstrap;
    j["extra_trees"] = s.extra_trees;
    return j;
}

}  // namespace

std::string_view to_string(BenchKind kind) { return kKindNames[static_cast<int>(kind)]; }
std::string_view to_string(SweepParam param) { return kSweepNames[static_cast<int>(param)]; }
std::string_view to_string(LocalizerKind kind) { return kLocalizerNames[static_cast<int>(kind)]; }
std::string_view to_string(Profile profile) { return kProfileNames[static_cast<int>(profile)]; }
SweepParam parse_sweep_param(std::string_view name) { return parse_enum<SweepParam>(name, kSweepNames, "sweep parameter"); }
LocalizerKind parse_localizer(std::string_view name) { return parse_enum<LocalizerKind>(name, kLocalizerNames, "localizer"); }
Profile parse_profile(std::string_view name) { return parse_enum<Profile>(name, kProfileNames, "profile"); }

void ExperimentConfig::validate() const {
    if (sweep_values.empty()) throw ConfigError("/sweep/values", "sweep must not be empty");
    if (n_runs < 1) throw ConfigError("/n_runs", "must be at least 1");
    if (kind == BenchKind::Localization) {
        if (localizers.empty()) throw ConfigError("/localizers", "must not be empty");
    } else if (methods.empty()) {
        throw ConfigError("/methods", "must not be empty");
    }
    if (kind == BenchKind::Detection) {
        if (chunk_sizes.empty()) throw ConfigError("/chunk_sizes", "must not be empty");
        for (std::size_t c : chunk_sizes) {
            if (c <= overlap) throw ConfigError("/overlap", "must be smaller than every chunk size");
        }
    }
    if (kind == BenchKind::SplitPoint) {
        if (block_size < 4) throw ConfigError("/block_size", "must be at least 4");
        for (Method m : methods) {
            if (m != Method::Mmd && m != Method::Ks && m != Method::D3) {
                throw ConfigError("/methods", "the split-point study supports mmd, ks and d3 only");
            }
        }
    }
    located("/detector", [&] { detector.validate(); return 0; });
    located("/kdq", [&] { kdq.validate(); return 0; });
    located("/ldd", [&] { ldd.validate(); return 0; });
    located("/mb", [&] { mb.validate(); return 0; });
    located("/kolmogorov_tree", [&] { kolmogorov_tree.validate(); return 0; });
    for (double v : sweep_values) {
        located("/sweep/values", [&] { run_spec(*this, v, 0).validate(); return 0; });
    }
}

void ExperimentConfig::apply_profile(Profile profile) {
    n_runs = profile == Profile::Ci ? 100 : 500;
    detector.bootstrap = profile == Profile::Ci ? 500 : 2500;
    kdq.bootstrap = detector.bootstrap;
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
    }
    ExperimentConfig c;
    Reader r(doc, "");
    if (auto kind = r.string("kind")) c.kind = located(r.at("kind"), [&] { return parse_enum<BenchKind>(*kind, kKindNames, "bench kind"); });
    if (auto ds = r.string("dataset")) c.stream.dataset = located(r.at("dataset"), [&] { return parse_dataset(*ds); });
    r.object("stream", [&](Reader& s) {
        s.get("length", c.stream.length);
        s.get("intensity", c.stream.intensity);
        s.get("dims", c.stream.dims);
        s.get("n_drifts", c.stream.n_drifts);
        s.get("drift_min", c.stream.drift_min);
        s.get("drift_max", c.stream.drift_max);
        s.get("rotation_lambda", c.stream.rotation_lambda);
        s.get("drifting_dims", c.stream.drifting_dims);
    });
    r.object("sweep", [&](Reader& s) {
        if (auto p = s.string("param")) c.sweep_param = located(s.at("param"), [&] { return parse_sweep_param(*p); });
        c.sweep_values.clear();
        s.array("values", [&](const json& v, const std::string& ptr) { c.sweep_values.push_back(Reader::to_double(v, ptr)); });
    });
    if (r.find("methods")) {
        c.methods.clear();
        r.array("methods", [&](const json& v, const std::string& ptr) {
            if (!v.is_string()) throw ConfigError(ptr, "expected a method name");
            c.methods.push_back(located(ptr, [&] { return parse_method(v.get<std::string>()); }));
        });
    }
    if (r.find("localizers")) {
        c.localizers.clear();
        r.array("localizers", [&](const json& v, const std::string& ptr) {
            if (!v.is_string()) throw ConfigError(ptr, "expected a localizer name");
            c.localizers.push_back(located(ptr, [&] { return parse_localizer(v.get<std::string>()); }));
        });
    }
    r.object("detector", [&](Reader& d) {
        DetectorConfig& dc = c.detector;
        d.get("bootstrap", dc.bootstrap);
        d.get("p_detect", dc.p_detect);
        d.object("kernel", [&](Reader& k) { read_kernel(k, dc.kernel); });
        d.object("kswin", [&](Reader& k) {
            k.get("n_max1", dc.kswin_reference);
            k.get("n_max2", dc.kswin_current);
            k.get("n_min", dc.kswin_min);
        });
        d.object("classifier", [&](Reader& k) { read_classifier(k, dc.classifier); });
        d.get("cv_folds", dc.cv.n_folds);
        d.get("shape_window", dc.shape_window);
        d.get("shape_test_window", dc.shape_test_window);
        if (d.find("alpha_grid")) {
            dc.alpha_grid.clear();
            d.array("alpha_grid", [&](const json& v, const std::string& ptr) { dc.alpha_grid.push_back(Reader::to_double(v, ptr)); });
        }
        d.get("kcpd_max_change_points", dc.kcpd_max_change_points);
    });
    r.object("kdq", [&](Reader& k) {
        k.get("min_samples", c.kdq.min_samples);
        k.get("max_depth", c.kdq.max_depth);
        k.get("bootstrap", c.kdq.bootstrap);
        k.get("alpha", c.kdq.alpha);
    });
    r.object("ldd", [&](Reader& k) {
        k.get("k", c.ldd.k);
        k.get("bootstrap", c.ldd.bootstrap);
    });
    r.object("mb", [&](Reader& k) {
        k.object("classifier", [&](Reader& cl) { read_classifier(cl, c.mb.classifier); });
        k.get("cv_folds", c.mb.cv.n_folds);
    });
    r.object("kolmogorov_tree", [&](Reader& k) {
        k.get("min_leaf", c.kolmogorov_tree.min_leaf);
        k.get("p_split", c.kolmogorov_tree.p_split);
        k.get("alpha", c.kolmogorov_tree.alpha);
        k.get("max_candidates", c.kolmogorov_tree.max_candidates);
    });
    if (r.find("chunk_sizes")) {
        c.chunk_sizes.clear();
        r.array("chunk_sizes", [&](const json& v, const std::string& ptr) { c.chunk_sizes.push_back(Reader::to_size(v, ptr)); });
    }
    r.get("overlap", c.overlap);
    r.get("n_runs", c.n_runs);
    r.get("seed", c.base_seed, 0);
    r.get("block_size", c.block_size);
    r.finish();
    c.validate();
    return c;
}

std::string experiment_config_json(const ExperimentConfig& c) {
    json j;
    j["kind"] = to_string(c.kind);
    j["dataset"] = to_string(c.stream.dataset);
    j["stream"] = {{"length", c.stream.length},
                   {"intensity", c.stream.intensity},
                   {"dims", c.stream.dims},
                   {"n_drifts", c.stream.n_drifts},
                   {"drift_min", c.stream.drift_min},
                   {"drift_max", c.stream.drift_max},
                   {"rotation_lambda", c.stream.rotation_lambda},
                   {"drifting_dims", c.stream.drifting_dims}};
    j["sweep"] = {{"param", to_string(c.sweep_param)}, {"values", c.sweep_values}};
    j["methods"] = json::array();
    for (Method m : c.methods) j["methods"].push_back(to_string(m));
    j["localizers"] = json::array();
    for (LocalizerKind l : c.localizers) j["localizers"].push_back(to_string(l));
    const DetectorConfig& d = c.detector;
    json kernel = {{"family", d.kernel.family == KernelFamily::Rbf ? "rbf" : "linear"},
                   {"bandwidth", d.kernel.bandwidth ? json(*d.kernel.bandwidth) : json(nullptr)}};
    j["detector"] = {{"bootstrap", d.bootstrap},
                     {"p_detect", d.p_detect},
                     {"kernel", kernel},
                     {"kswin", {{"n_max1", d.kswin_reference}, {"n_max2", d.kswin_current}, {"n_min", d.kswin_min}}},
                     {"classifier", classifier_json(d.classifier)},
                     {"cv_folds", d.cv.n_folds},
                     {"shape_window", d.shape_window},
                     {"shape_test_window", d.shape_test_window},
                     {"alpha_grid", d.alpha_grid},
                     {"kcpd_max_change_points", d.kcpd_max_change_points}};
    j["kdq"] = {{"min_samples", c.kdq.min_samples},
                {"max_depth", c.kdq.max_depth},
                {"bootstrap", c.kdq.bootstrap},
                {"alpha", c.kdq.alpha}};
    j["ldd"] = {{"k", c.ldd.k}, {"bootstrap", c.ldd.bootstrap}};
    j["mb"] = {{"classifier", classifier_json(c.mb.classifier)}, {"cv_folds", c.mb.cv.n_folds}};
    j["kolmogorov_tree"] = {{"min_leaf", c.kolmogorov_tree.min_leaf},
                            {"p_split", c.kolmogorov_tree.p_split},
                            {"alpha", c.kolmogorov_tree.alpha},
                            {"max_candidates", c.kolmogorov_tree.max_candidates}};
    j["chunk_sizes"] = c.chunk_sizes;
    j["overlap"] = c.overlap;
    j["n_runs"] = c.n_runs;
    j["seed"] = c.base_seed;
    j["block_size"] = c.block_size;
    return j.dump(2);
}

SyntheticStreamSpec run_spec(const ExperimentConfig& config, double value, std::size_t run) {
    SyntheticStreamSpec spec = config.stream;
    spec.seed = derive_seed(config.base_seed, run);
    auto as_count = [&](const char* what) {
        if (!(value >= 0.0) || value != std::floor(value)) {
            throw InvalidArgument(std::string(what) + ": sweep value must be a non-negative integer");
        }
        return static_cast<std::size_t>(value);
    };
    switch (config.sweep_param) {
        case SweepParam::Intensity: spec.intensity = value; break;
        case SweepParam::Dims: spec.dims = as_count("dims"); break;
        case SweepParam::NDrifts: spec.n_drifts = as_count("n_drifts"); break;
        case SweepParam::Lambda: spec.rotation_lambda = value; break;
        case SweepParam::Samples: {
            const std::size_t length = as_count("samples");
            const double scale = static_cast<double>(length) / static_cast<double>(config.stream.length);
            spec.length = length;
            spec.drift_min = static_cast<std::size_t>(std::round(static_cast<double>(config.stream.drift_min) * scale));
            spec.drift_max = std::min(length - 1, static_cast<std::size_t>(std::round(static_cast<double>(config.stream.drift_max) * scale)));
            break;
        }
    }
    if (config.kind == BenchKind::Localization) {
        spec.n_drifts = 1;
        spec.drift_min = spec.drift_max = spec.length / 2;
    } else if (config.kind == BenchKind::SplitPoint) {
        spec.length = config.block_size;
        spec.n_drifts = 1;
        spec.drift_min = spec.drift_max = config.block_size / 2;
    }
    return spec;
}

std::vector<double> BenchResult::values(std::string_view method, double param_value) const {
    std::vector<std::pair<std::size_t, double>> found;
    for (const RunRecord& r : runs) {
        if (r.method == method && r.param_value == param_value) found.emplace_back(r.run, r.value);
    }
    std::sort(found.begin(), found.end());
    std::vector<double> out;
    for (const auto& [run, v] : found) out.push_back(v);
    return out;
}

const SummaryRow* BenchResult::find(std::string_view method, double param_value) const {
    for (const SummaryRow& s : summary) {
        if (s.method == method && s.param_value == param_value) return &s;
    }
    return nullptr;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed) {
                const std::size_t i = next++;
                if (i >= n) break;
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

// Per-run outputs of one sweep point: label -> value, or nothing when skipped.
using RunValues = std::vector<std::vector<std::pair<std::string, double>>>;

void collect(BenchResult& result, double param, const RunValues& per_run, const std::vector<std::string>& labels,
             const BenchOptions& options) {
    std::map<std::string, std::vector<double>> by_label;
    for (std::size_t run = 0; run < per_run.size(); ++run) {
        for (const auto& [label, value] : per_run[run]) {
            result.runs.push_back({label, param, run, value});
            by_label[label].push_back(value);
        }
    }
    std::ostringstream line;
    line << result.param_name << "=" << param << ":";
    for (const std::string& label : labels) {
        auto it = by_label.find(label);
        if (it == by_label.end()) {
            result.warnings.push_back(label + " at " + result.param_name + "=" + format_double(param) +
                                      ": every run had chunks of a single label; point skipped");
            continue;
        }
        const auto& v = it->second;
        SummaryRow row{label, param, v.size(), mean(v), quantile(v, 0.0), quantile(v, 0.25),
                       quantile(v, 0.5), quantile(v, 0.75), quantile(v, 1.0)};
        if (v.size() < per_run.size()) {
            result.warnings.push_back(label + " at " + result.param_name + "=" + format_double(param) + ": " +
                                      std::to_string(per_run.size() - v.size()) + " single-label runs skipped");
        }
        result.summary.push_back(row);
        line << " " << label << "=" << format_double(row.mean);
    }
    if (options.progress) options.progress(line.str());
}

BenchResult make_result(const ExperimentConfig& config, BenchKind kind) {
    BenchResult r;
    r.kind = kind;
    r.dataset = std::string(to_string(config.stream.dataset));
    r.param_name = std::string(to_string(config.sweep_param));
    return r;
}

std::string label_of(Method m, std::size_t chunk) { return std::string(to_string(m)) + "@" + std::to_string(chunk); }

}  // namespace

BenchResult run_detection_bench(const ExperimentConfig& config, const BenchOptions& options) {
    config.validate();
    BenchResult result = make_result(config, BenchKind::Detection);
    std::vector<std::string> labels;
    for (std::size_t cs : config.chunk_sizes) {
        for (Method m : config.methods) labels.push_back(label_of(m, cs));
    }
    for (double param : config.sweep_values) {
        RunValues per_run(config.n_runs);
        parallel_for(config.n_runs, options.threads, [&](std::size_t run) {
            const SyntheticStreamSpec spec = run_spec(config, param, run);
            const Stream stream = generate_stream(spec);
            for (std::size_t ci = 0; ci < config.chunk_sizes.size(); ++ci) {
                const std::size_t cs = config.chunk_sizes[ci];
                const auto chunks = chunk_stream(stream, cs, config.overlap);
                std::vector<bool> truth;
                for (const Chunk& c : chunks) truth.push_back(*c.contains_drift);
                const auto positives = std::count(truth.begin(), truth.end(), true);
                if (positives == 0 || positives == static_cast<std::ptrdiff_t>(truth.size())) continue;
                for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                    DetectorConfig dc = config.detector;
                    dc.method = config.methods[mi];
                    dc.seed = derive_seed(spec.seed, 16 + 64 * ci + mi);
                    if (dc.shape_test_window == 0) dc.shape_test_window = cs / 2;
                    const auto scores = score_chunks(stream, chunks, dc);
                    std::vector<double> s;
                    for (const DriftScore& d : scores) s.push_back(d.score);
                    per_run[run].emplace_back(label_of(dc.method, cs), roc_auc(s, truth));
                }
            }
        });
        collect(result, param, per_run, labels, options);
    }
    return result;
}

LocalizationResult localize(LocalizerKind kind, const Stream& stream, std::size_t split,
                            const ExperimentConfig& config, std::uint64_t seed) {
    switch (kind) {
        case LocalizerKind::Kdq:
            return kdq_localize(split_at(stream.x, split), config.kdq, seed);
        case LocalizerKind::LddDis:
            return ldd_dis(split_at(stream.x, split), config.ldd, seed);
        case LocalizerKind::MbDl: {
            MbConfig mb = config.mb;
            mb.cv.seed = seed;
            return mb_localize(split_at(stream.x, split), mb);
        }
        case LocalizerKind::KolmogorovTree:
            return kolmogorov_segment(stream.x, stream.t, config.kolmogorov_tree);
    }
    throw InvalidArgument("unknown localizer");
}

BenchResult run_localization_bench(const ExperimentConfig& config, const BenchOptions& options) {
    config.validate();
    BenchResult result = make_result(config, BenchKind::Localization);
    std::vector<std::string> labels;
    for (LocalizerKind l : config.localizers) labels.emplace_back(to_string(l));
    for (double param : config.sweep_values) {
        RunValues per_run(config.n_runs);
        parallel_for(config.n_runs, options.threads, [&](std::size_t run) {
            const SyntheticStreamSpec spec = run_spec(config, param, run);
            const Stream stream = generate_stream(spec);
            const auto positives = std::count(stream.drift_label.begin(), stream.drift_label.end(), true);
            if (positives == 0 || positives == static_cast<std::ptrdiff_t>(stream.size())) return;
            for (std::size_t li = 0; li < config.localizers.size(); ++li) {
                const LocalizationResult loc =
                    localize(config.localizers[li], stream, spec.length / 2, config, derive_seed(spec.seed, 16 + li));
                per_run[run].emplace_back(labels[li], roc_auc(loc.per_sample_scores, stream.drift_label));
            }
        });
        collect(result, param, per_run, labels, options);
    }
    return result;
}

BenchResult run_splitpoint_study(const ExperimentConfig& config, const BenchOptions& options) {
    config.validate();
    BenchResult result = make_result(config, BenchKind::SplitPoint);
    result.value_name = "score";
    std::vector<std::string> labels;
    for (Method m : config.methods) {
        labels.push_back(std::string(to_string(m)) + "@known");
        labels.push_back(std::string(to_string(m)) + "@random");
    }
    for (double param : config.sweep_values) {
        RunValues per_run(config.n_runs);
        parallel_for(config.n_runs, options.threads, [&](std::size_t run) {
            const SyntheticStreamSpec known = run_spec(config, param, run);
            SyntheticStreamSpec random = known;
            random.drift_min = 1;
            random.drift_max = config.block_size - 1;
            const Stream streams[2] = {generate_stream(known), generate_stream(random)};
            const Chunk whole{0, config.block_size, std::nullopt};
            for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
                DetectorConfig dc = config.detector;
                dc.method = config.methods[mi];
                dc.seed = derive_seed(known.seed, 16 + mi);
                if (dc.shape_test_window == 0) dc.shape_test_window = config.block_size / 2;
                for (int cond = 0; cond < 2; ++cond) {
                    const DriftScore s = score_chunks(streams[cond], {whole}, dc).front();
                    per_run[run].emplace_back(labels[2 * mi + static_cast<std::size_t>(cond)], s.score);
                }
            }
        });
        collect(result, param, per_run, labels, options);
    }
    return result;
}

BenchResult run_bench(const ExperimentConfig& config, const BenchOptions& options) {
    switch (config.kind) {
        case BenchKind::Detection: return run_detection_bench(config, options);
        case BenchKind::Localization: return run_localization_bench(config, options);
        case BenchKind::SplitPoint: return run_splitpoint_study(config, options);
    }
    throw InvalidArgument("unknown bench kind");
}

void write_runs_csv(const BenchResult& result, std::ostream& out) {
    out << "method,dataset,param_name,param_value,run," << result.value_name << '\n';
    for (const RunRecord& r : result.runs) {
        out << r.method << ',' << result.dataset << ',' << result.param_name << ',' << format_double(r.param_value)
            << ',' << r.run << ',' << format_double(r.value) << '\n';
    }
}

void write_summary_csv(const BenchResult& result, std::ostream& out) {
    out << "method,dataset,param_name,param_value,n,mean,min,q25,median,q75,max\n";
    for (const SummaryRow& s : result.summary) {
        out << s.method << ',' << result.dataset << ',' << result.param_name << ',' << format_double(s.param_value)
            << ',' << s.count << ',' << format_double(s.mean) << ',' << format_double(s.min) << ','
            << format_double(s.q25) << ',' << format_double(s.median) << ',' << format_double(s.q75) << ','
            << format_double(s.max) << '\n';
    }
}

}  // namespace driftbench
