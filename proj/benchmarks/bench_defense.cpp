#include <benchmark/benchmark.h>

#include <vector>

#include "fedward/defense.hpp"
#include "fedward/model.hpp"
#include "fedward/rng.hpp"
#include "fedward/update.hpp"

using namespace fedward;

namespace {

LayeredUpdate random_model_update(Rng& rng, std::size_t dim) {
    Layer w{"w0", {10, dim / 10}, std::vector<double>(dim - dim % 10)};
    Layer b{"b0", {10}, std::vector<double>(10)};
    for (double& v : w.values) v = rng.normal() * 0.1;
    for (double& v : b.values) v = rng.normal() * 0.1;
    LayeredUpdate u;
    u.layers = {std::move(w), std::move(b)};
    return u;
}

std::vector<LayeredUpdate> client_updates(std::size_t m, std::size_t dim) {
    Rng rng(7);
    std::vector<LayeredUpdate> ws;
    ws.reserve(m);
    for (std::size_t i = 0; i < m; ++i) ws.push_back(random_model_update(rng, dim));
    return ws;
}

}  // namespace

static void BM_Amgrad(benchmark::State& state) {
    Rng rng(1);
    auto u = random_model_update(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto out = amgrad(u);
        benchmark::DoNotOptimize(out);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Amgrad)->Range(1 << 10, 1 << 16)->Complexity();

static void BM_PairwiseDistances(benchmark::State& state) {
    auto ws = client_updates(static_cast<std::size_t>(state.range(0)), 2560);
    for (auto _ : state) {
        auto d = pairwise_distances(ws);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_PairwiseDistances)->RangeMultiplier(2)->Range(4, 64);

static void BM_AutoOptics(benchmark::State& state) {
    auto ws = client_updates(static_cast<std::size_t>(state.range(0)), 2560);
    std::vector<LayeredUpdate> sparse;
    for (const auto& w : ws) sparse.push_back(amgrad(w));
    for (auto _ : state) {
        auto result = auto_optics(sparse);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_AutoOptics)->RangeMultiplier(2)->Range(4, 64);

static void BM_FedwardAggregate(benchmark::State& state) {
    auto ws = client_updates(static_cast<std::size_t>(state.range(0)), 2560);
    Rng rng(3);
    auto global = random_model_update(rng, 2560);
    for (auto _ : state) {
        auto out = fedward_aggregate(global, ws);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_FedwardAggregate)->RangeMultiplier(2)->Range(4, 32);

static void BM_LocalUpdate(benchmark::State& state) {
    ModelSpec spec{ModelKind::linear, 256, 0, 10};
    auto params = init_params(spec, 5);
    auto data = gen_synthetic(10, static_cast<std::size_t>(state.range(0)), 16, 16, 0.15, 6);
    TrainConfig cfg{0.1, 10, 1, 7};
    for (auto _ : state) {
        auto delta = local_update(spec, params, data, cfg);
        benchmark::DoNotOptimize(delta);
    }
}
BENCHMARK(BM_LocalUpdate)->RangeMultiplier(2)->Range(4, 32);

BENCHMARK_MAIN();
