#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "hod/extsort.hpp"
#include "hod/kernels.hpp"
#include "hod/preprocess.hpp"
#include "test_util.hpp"

using namespace hod;

TEST(Kernels, SortAgreesWithSerial) {
    std::mt19937_64 rng(7);
    std::vector<EdgeTriplet> a(20000);
    for (auto& t : a) {
        t.a = rng() % 300;
        t.b = rng() % 300;
        t.length = rng() % 50;
        t.sign = static_cast<Sign>(rng() % 2);
        t.kind = static_cast<EdgeKind>(rng() % 3);
        t.pred_hint = rng() % 300;
    }
    auto b = a;
    kernels::serial::sort_triplets(a);
    kernels::omp::sort_triplets(b);
    EXPECT_EQ(a, b);
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), TripletLess{}));
}

TEST(Kernels, NodeScoresAgree) {
    auto g = hodtest::random_graph(1000, 5000, 5, 3);
    std::vector<NodeId> dead = {3, 10, 500};
    g.remove_nodes(dead);
    std::vector<std::uint64_t> s(g.node_count()), p(g.node_count());
    kernels::serial::node_scores(g, s);
    kernels::omp::node_scores(g, p);
    EXPECT_EQ(s, p);
    EXPECT_EQ(s[10], 0u);
    EXPECT_EQ(s[7], node_score(g, 7));
}

TEST(Kernels, BatchesAndSumsAgree) {
    hodtest::TempDir dir("kern");
    auto g = hodtest::random_graph(200, 900, 20, 9);
    build_index(g, hodtest::small_config(9), dir.path());
    auto b = IndexBundle::open(dir.path());
    auto core = b.load_core();
    std::vector<NodeId> sources = {0, 5, 5, 17, 199, 42};

    auto a = kernels::serial::batch_ssd(b, core, sources, true);
    auto c = kernels::omp::batch_ssd(b, core, sources, true);
    ASSERT_EQ(a.size(), sources.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].source, sources[i]);
        EXPECT_EQ(a[i].distances, c[i].distances);
        EXPECT_EQ(a[i].predecessors, c[i].predecessors);
    }

    std::vector<std::uint64_t> s1(200, 0), s2(200, 0);
    kernels::serial::closeness_sums(b, core, sources, 1000, s1);
    kernels::omp::closeness_sums(b, core, sources, 1000, s2);
    EXPECT_EQ(s1, s2);

    auto r1 = kernels::serial::all_sources(g, sources);
    auto r2 = kernels::omp::all_sources(g, sources);
    EXPECT_EQ(r1, r2);
    for (NodeId t = 0; t < 200; ++t)
        EXPECT_EQ(r1[0][t], a[0].distances[t]);
}

TEST(Kernels, ErrorsPropagateOutOfParallelRegions) {
    hodtest::TempDir dir("kern");
    build_index(hodtest::ten_node_graph(), hodtest::ten_node_config(), dir.path());
    auto b = IndexBundle::open(dir.path());
    auto core = b.load_core();
    std::vector<NodeId> sources = {0, 1, 77};
    EXPECT_THROW(kernels::omp::batch_ssd(b, core, sources, false), UnknownNode);
    EXPECT_GE(kernels::thread_count(), 1);
}

TEST(Kernels, SerialAndParallelBuildsWriteIdenticalFiles) {
    hodtest::TempDir dir("kern");
    auto g = hodtest::random_graph(300, 1200, 40, 4);
    auto cfg = hodtest::small_config(4);
    cfg.memory_budget = 24 << 10;
    build_index(g, cfg, dir.path() / "par");
    cfg.parallel = false;
    build_index(g, cfg, dir.path() / "ser");
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    for (const char* f : {"forward.bin", "backward.bin", "core.bin", "meta.json"})
        EXPECT_EQ(slurp(dir.path() / "par" / f), slurp(dir.path() / "ser" / f)) << f;
}
