// Serial vs OpenMP timings of the heavy kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "newsrank/personalize.hpp"
#include "newsrank/simulator.hpp"
#include "newsrank/stats.hpp"

using namespace newsrank;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::Serial : Execution::Parallel; }

SimConfig small_sim() {
    SimConfig c;
    c.n_users = 600;
    c.n_articles_per_day = 30;
    c.n_days = 5;
    c.warmup_days = 1;
    c.matrix_min_clicks = 2;
    c.seed = 3;
    return c;
}

const InteractionMatrix& desk_matrix() {
    static const InteractionMatrix m = [] {
        SimConfig c = small_sim();
        c.n_users = 2000;
        c.n_days = 7;
        const Experiment ex = run_experiment(c);
        return build_interaction_matrix(ex.log, ex.log.events.back().at, 21, 2);
    }();
    return m;
}

void BM_AlsTrain(benchmark::State& state) {
    const InteractionMatrix& m = desk_matrix();
    AlsParams p;
    p.k = 12;
    p.lambda = 10.0;
    p.alpha = 10.0;
    p.iterations = 8;
    for (auto _ : state) benchmark::DoNotOptimize(train(m, p, 0, mode(state)));
    state.counters["cells"] = static_cast<double>(m.cells.size());
}
BENCHMARK(BM_AlsTrain)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PermutationJsd(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::discrete_distribution<int> sect{16, 16, 10, 9, 7, 8, 8, 8, 5, 4, 5, 4};
    std::vector<std::uint32_t> a(40000), b(40000);
    for (auto& v : a) v = static_cast<std::uint32_t>(sect(rng));
    for (auto& v : b) v = static_cast<std::uint32_t>(sect(rng));
    stats::PermutationOptions o;
    o.permutations = 2000;
    o.execution = mode(state);
    o.method = state.range(1) == 0 ? stats::PermutationMethod::CountSampling : stats::PermutationMethod::EventShuffle;
    for (auto _ : state) benchmark::DoNotOptimize(stats::permutation_test_jsd(a, b, 12, o));
}
BENCHMARK(BM_PermutationJsd)->Args({0, 0})->Args({1, 0})->Args({0, 1})->Args({1, 1})->Unit(benchmark::kMillisecond);

void BM_ActivityClusters(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::geometric_distribution<int> clicks(0.04);
    std::vector<double> per_user(2000);
    for (auto& v : per_user) v = 1 + clicks(rng);
    const std::vector<int> ks{2, 3, 4, 5, 6, 7, 8};
    for (auto _ : state) benchmark::DoNotOptimize(stats::activity_clusters(per_user, ks, 5, 50, mode(state)));
}
BENCHMARK(BM_ActivityClusters)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RunExperiment(benchmark::State& state) {
    SimConfig c = small_sim();
    c.execution = mode(state);
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c));
}
BENCHMARK(BM_RunExperiment)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
