#include <benchmark/benchmark.h>

#include "driftbench/classifiers.hpp"
#include "driftbench/detectors.hpp"
#include "driftbench/kernels.hpp"
#include "driftbench/localizers.hpp"
#include "driftbench/streams.hpp"

using namespace driftbench;

namespace {

Stream make_stream(std::size_t length, std::size_t dims = 5) {
    SyntheticStreamSpec spec;
    spec.length = length;
    spec.dims = dims;
    spec.intensity = 0.25;
    spec.drift_min = length / 4;
    spec.drift_max = 3 * length / 4;
    spec.seed = 7;
    return generate_stream(spec);
}

void BM_KernelMatrix(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(s.x, KernelSpec::rbf(1.0)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KernelMatrix)->RangeMultiplier(2)->Range(128, 1024)->Complexity(benchmark::oNSquared);

void BM_MovingMmd(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(moving_mmd(s.x, 50, KernelSpec::rbf(1.0)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MovingMmd)->RangeMultiplier(2)->Range(500, 4000)->Complexity(benchmark::oN);

void BM_MmdPermutationTest(benchmark::State& state) {
    const Stream s = make_stream(250);
    const Matrix k = kernel_matrix(s.x, KernelSpec::rbf(1.0)).values;
    const auto b = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(mmd_permutation_test(k, 125, b, 1));
}
BENCHMARK(BM_MmdPermutationTest)->Arg(100)->Arg(500)->Arg(2500);

void BM_KcpdSegment(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    const KernelMatrix k = kernel_matrix(s.x, KernelSpec::rbf(1.0));
    for (auto _ : state) benchmark::DoNotOptimize(kcpd_segment(k, 5));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KcpdSegment)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

void BM_ShapeddDetect(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(shapedd_detect(s.x, 50, KernelSpec::rbf(1.0), 100, 3));
}
BENCHMARK(BM_ShapeddDetect)->Arg(750)->Arg(1500);

void BM_RandomForestFit(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    const WindowPair pair = split_mid(s.x);
    const Labels y = pair.labels();
    for (auto _ : state) benchmark::DoNotOptimize(fit(ClassifierSpec::random_forest(), s.x, y, 1));
}
BENCHMARK(BM_RandomForestFit)->Arg(250)->Arg(750);

void BM_KsDetect(benchmark::State& state) {
    const Stream s = make_stream(static_cast<std::size_t>(state.range(0)));
    const WindowPair pair = split_mid(s.x);
    for (auto _ : state) benchmark::DoNotOptimize(ks_detect(pair));
}
BENCHMARK(BM_KsDetect)->Arg(250)->Arg(1000);

void BM_LddDis(benchmark::State& state) {
    const Stream s = make_stream(750);
    LddConfig cfg;
    cfg.bootstrap = static_cast<std::size_t>(state.range(0));
    const WindowPair pair = split_mid(s.x);
    for (auto _ : state) benchmark::DoNotOptimize(ldd_dis(pair, cfg, 1));
}
BENCHMARK(BM_LddDis)->Arg(10)->Arg(100);

void BM_KdqLocalize(benchmark::State& state) {
    const Stream s = make_stream(750);
    KdqConfig cfg;
    cfg.bootstrap = 100;
    const WindowPair pair = split_mid(s.x);
    for (auto _ : state) benchmark::DoNotOptimize(kdq_localize(pair, cfg, 1));
}
BENCHMARK(BM_KdqLocalize);

}  // namespace

BENCHMARK_MAIN();
