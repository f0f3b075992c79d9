// Serial reference kernels against their OpenMP counterparts on the same
// inputs. Each pair shares a fixture; only the kernel namespace differs.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>
#include <set>
#include <unistd.h>

#include "hod/kernels.hpp"
#include "hod/preprocess.hpp"

namespace fs = std::filesystem;
using namespace hod;

namespace {

AdjacencyGraph random_graph(NodeId n, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::set<std::pair<NodeId, NodeId>> seen;
    std::vector<AdjacencyGraph::Edge> e;
    while (e.size() < m) {
        NodeId a = rng() % n, b = rng() % n;
        if (a != b && seen.insert({a, b}).second)
            e.push_back({a, b, 1 + rng() % 100});
    }
    return AdjacencyGraph::from_edges(n, std::move(e));
}

std::vector<EdgeTriplet> random_triplets(std::size_t count) {
    std::mt19937_64 rng(1);
    std::vector<EdgeTriplet> t(count);
    for (auto& x : t) {
        x.a = rng() % 100'000;
        x.b = rng() % 100'000;
        x.length = rng() % 1000;
        x.sign = static_cast<Sign>(rng() % 2);
        x.kind = static_cast<EdgeKind>(rng() % 3);
    }
    return t;
}

// Directed ring lattice: reduces to a tiny core quickly, unlike sparse random
// graphs, whose remaining graph densifies as nodes are removed.
AdjacencyGraph ring_lattice(NodeId n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<AdjacencyGraph::Edge> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId d = 1; d <= 4; ++d) {
            NodeId j = (i + d) % n;
            std::uint64_t l = 1 + rng() % 100;
            if (rng() & 1)
                e.push_back({i, j, l});
            else
                e.push_back({j, i, l});
        }
    return AdjacencyGraph::from_edges(n, std::move(e));
}

// One index shared by the query kernels, built on first use.
struct QueryFixture {
    fs::path dir;
    AdjacencyGraph graph;
    IndexBundle bundle;
    CoreGraph core;
    std::vector<NodeId> sources;

    static QueryFixture& get() {
        static QueryFixture f = make();
        return f;
    }

private:
    static QueryFixture make() {
        auto dir = fs::temp_directory_path() / ("hod-bench-" + std::to_string(::getpid()));
        auto g = ring_lattice(20'000, 5);
        BuildConfig cfg;
        cfg.seed = 5;
        cfg.block_size = 4096;
        cfg.memory_budget = 1 << 20;
        build_index(g, cfg, dir);
        auto b = IndexBundle::open(dir);
        auto core = b.load_core();
        std::vector<NodeId> s;
        for (NodeId v = 0; v < 64; ++v)
            s.push_back(v * 311 % g.node_count());
        return {dir, std::move(g), std::move(b), std::move(core), std::move(s)};
    }
};

template <auto Sort>
void BM_SortTriplets(benchmark::State& state) {
    const auto input = random_triplets(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        state.PauseTiming();
        auto data = input;
        state.ResumeTiming();
        Sort(std::span<EdgeTriplet>(data));
        benchmark::DoNotOptimize(data.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Scores>
void BM_NodeScores(benchmark::State& state) {
    auto g = random_graph(static_cast<NodeId>(state.range(0)), 5 * state.range(0), 2);
    std::vector<std::uint64_t> s(g.node_count());
    for (auto _ : state) {
        Scores(g, std::span<std::uint64_t>(s));
        benchmark::DoNotOptimize(s.data());
    }
}

template <auto Batch>
void BM_BatchSsd(benchmark::State& state) {
    auto& f = QueryFixture::get();
    for (auto _ : state)
        benchmark::DoNotOptimize(Batch(f.bundle, f.core, f.sources, false));
    state.SetItemsProcessed(state.iterations() * f.sources.size());
}

template <auto Sums>
void BM_ClosenessSums(benchmark::State& state) {
    auto& f = QueryFixture::get();
    std::vector<std::uint64_t> sums(f.graph.node_count());
    for (auto _ : state) {
        std::fill(sums.begin(), sums.end(), 0);
        Sums(f.bundle, f.core, f.sources, 1'000'000, std::span<std::uint64_t>(sums));
        benchmark::DoNotOptimize(sums.data());
    }
}

template <auto All>
void BM_AllSources(benchmark::State& state) {
    auto& f = QueryFixture::get();
    for (auto _ : state)
        benchmark::DoNotOptimize(All(f.graph, f.sources));
}

}  // namespace

BENCHMARK(BM_SortTriplets<&kernels::serial::sort_triplets>)->Name("sort_triplets/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_SortTriplets<&kernels::omp::sort_triplets>)->Name("sort_triplets/omp")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_NodeScores<&kernels::serial::node_scores>)->Name("node_scores/serial")->Arg(100'000);
BENCHMARK(BM_NodeScores<&kernels::omp::node_scores>)->Name("node_scores/omp")->Arg(100'000);
BENCHMARK(BM_BatchSsd<&kernels::serial::batch_ssd>)->Name("batch_ssd/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchSsd<&kernels::omp::batch_ssd>)->Name("batch_ssd/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClosenessSums<&kernels::serial::closeness_sums>)->Name("closeness_sums/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClosenessSums<&kernels::omp::closeness_sums>)->Name("closeness_sums/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AllSources<&kernels::serial::all_sources>)->Name("all_sources/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AllSources<&kernels::omp::all_sources>)->Name("all_sources/omp")->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    std::error_code ec;
    fs::remove_all(fs::temp_directory_path() / ("hod-bench-" + std::to_string(::getpid())), ec);
    return 0;
}
