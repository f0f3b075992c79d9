#include <gtest/gtest.h>

#include <fstream>

#include "hod/index_store.hpp"
#include "hod/preprocess.hpp"
#include "test_util.hpp"

using namespace hod;
using hodtest::v;

namespace {

class TenNodeBundle : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new hodtest::TempDir("bundle");
        auto loaded = load_edge_list_file(hodtest::data_file("ten_node.txt"), {});
        build_index(std::move(loaded.graph), hodtest::ten_node_config(), dir_->path(), loaded.original_ids);
    }
    static void TearDownTestSuite() {
        delete dir_;
        dir_ = nullptr;
    }
    static std::filesystem::path dir() { return dir_->path(); }
    static hodtest::TempDir* dir_;
};

hodtest::TempDir* TenNodeBundle::dir_ = nullptr;

void flip_byte(const std::filesystem::path& p, std::uint64_t offset) {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(static_cast<std::streamoff>(offset));
    char c = 0;
    f.read(&c, 1);
    c ^= 0x5a;
    f.seekp(static_cast<std::streamoff>(offset));
    f.write(&c, 1);
}

void copy_bundle(const std::filesystem::path& from, const std::filesystem::path& to) {
    std::filesystem::copy(from, to, std::filesystem::copy_options::recursive);
}

}  // namespace

TEST_F(TenNodeBundle, RanksAndForwardOrder) {
    auto b = IndexBundle::open(dir());
    EXPECT_EQ(b.node_count(), 10u);
    EXPECT_EQ(b.noncore_count(), 8u);
    EXPECT_EQ(b.core_rank(), 4u);
    const std::uint32_t want_rank[] = {1, 1, 1, 2, 2, 2, 3, 3, 4, 4};
    for (int k = 1; k <= 10; ++k)
        EXPECT_EQ(b.rank(v(k)), want_rank[k - 1]) << "v" << k;
    for (std::uint32_t theta = 0; theta < 8; ++theta)
        EXPECT_EQ(b.forward_node(theta), theta);
    EXPECT_TRUE(b.is_core(v(9)));
    EXPECT_TRUE(b.is_core(v(10)));
    EXPECT_TRUE(b.validate().empty());
    EXPECT_NO_THROW(b.verify_checksums());
}

TEST_F(TenNodeBundle, ExternalIdsResolve) {
    auto b = IndexBundle::open(dir());
    EXPECT_EQ(b.resolve(1), v(1));
    EXPECT_EQ(b.resolve(10), v(10));
    EXPECT_EQ(b.external_id(v(7)), 7u);
    EXPECT_THROW(b.resolve(0), UnknownNode);
    EXPECT_THROW(b.resolve(11), UnknownNode);
}

TEST_F(TenNodeBundle, BackwardFileIsReversedForward) {
    auto b = IndexBundle::open(dir());
    std::vector<NodeId> fwd, bwd;
    b.for_each_forward_block([&](const AdjBlock& blk) { fwd.push_back(blk.node); });
    b.for_each_backward_block([&](const AdjBlock& blk) { bwd.push_back(blk.node); });
    std::reverse(bwd.begin(), bwd.end());
    EXPECT_EQ(fwd, bwd);
}

TEST_F(TenNodeBundle, ShortcutsLandInTheRightLists) {
    auto b = IndexBundle::open(dir());
    bool v8_v9 = false, v9_v7 = false;
    b.for_each_forward_block([&](const AdjBlock& blk) {
        for (const auto& e : blk.edges)
            if (blk.node == v(8) && e.other == v(9) && e.length == 2 && e.kind == EdgeKind::candidate)
                v8_v9 = true;
    });
    b.for_each_backward_block([&](const AdjBlock& blk) {
        for (const auto& e : blk.edges)
            if (blk.node == v(7) && e.other == v(9) && e.length == 2 && e.kind == EdgeKind::candidate)
                v9_v7 = true;
    });
    EXPECT_TRUE(v8_v9);
    EXPECT_TRUE(v9_v7);

    auto core = b.load_core();
    ASSERT_EQ(core.size(), 2u);
    auto i9 = core.local(v(9));
    ASSERT_NE(i9, UINT32_MAX);
    ASSERT_EQ(core.out(i9).size(), 1u);
    EXPECT_EQ(core.out(i9)[0].other, v(10));
    EXPECT_EQ(core.out(i9)[0].length, 3u);
    EXPECT_EQ(core.out(i9)[0].kind, EdgeKind::candidate);
    EXPECT_EQ(core.local(v(1)), UINT32_MAX);
}

TEST_F(TenNodeBundle, ForwardCursorRefusesToMoveBack) {
    auto b = IndexBundle::open(dir());
    ForwardCursor c(b);
    c.at(3);
    c.at(3);
    c.at(5);
    EXPECT_THROW(c.at(4), ScanOrderError);
}

TEST_F(TenNodeBundle, RankCursorWalksBackwardFileInReverse) {
    auto b = IndexBundle::open(dir());
    FetchLog log;
    BackwardRankCursor c(b, &log);
    for (std::uint32_t theta = 0; theta < b.noncore_count(); ++theta)
        EXPECT_EQ(c.at(theta).node, b.forward_node(theta));
    EXPECT_THROW(c.at(0), ScanOrderError);
    EXPECT_TRUE(std::is_sorted(log.offsets.rbegin(), log.offsets.rend()));
}

TEST_F(TenNodeBundle, CorruptCoreIsDetected) {
    hodtest::TempDir tmp("corrupt");
    auto copy = tmp / "b";
    copy_bundle(dir(), copy);
    flip_byte(copy / "core.bin", 20);
    auto b = IndexBundle::open(copy);
    EXPECT_THROW(b.load_core(), CorruptionError);
    EXPECT_THROW(b.verify_checksums(), CorruptionError);
}

TEST_F(TenNodeBundle, CorruptForwardFileFailsChecksum) {
    hodtest::TempDir tmp("corrupt");
    auto copy = tmp / "b";
    copy_bundle(dir(), copy);
    flip_byte(copy / "forward.bin", 30);
    EXPECT_THROW(IndexBundle::open(copy).verify_checksums(), CorruptionError);
}

TEST_F(TenNodeBundle, TruncatedFileFailsOpen) {
    hodtest::TempDir tmp("corrupt");
    auto copy = tmp / "b";
    copy_bundle(dir(), copy);
    std::filesystem::resize_file(copy / "backward.bin", 10);
    EXPECT_THROW(IndexBundle::open(copy), CorruptionError);
}

TEST_F(TenNodeBundle, MissingMetaFailsOpen) {
    hodtest::TempDir tmp("corrupt");
    EXPECT_THROW(IndexBundle::open(tmp.path()), IoError);
}

TEST(BlockReader, FetchesEachBlockOnceOnASequentialScan) {
    hodtest::TempDir tmp("blocks");
    auto p = tmp / "data.bin";
    {
        std::ofstream f(p, std::ios::binary);
        for (int i = 0; i < 1000; ++i)
            f.put(static_cast<char>(i));
    }
    FetchLog log;
    BlockReader r(p, 64, &log);
    std::uint8_t buf[10];
    for (std::uint64_t off = 0; off + 10 <= 1000; off += 10) {
        r.read(off, 10, buf);
        EXPECT_EQ(buf[0], static_cast<std::uint8_t>(off));
    }
    EXPECT_EQ(log.count(), (1000u + 63) / 64);
    EXPECT_TRUE(std::is_sorted(log.offsets.begin(), log.offsets.end()));
    EXPECT_THROW(r.read(995, 10, buf), CorruptionError);
}

TEST(IndexWriter, RejectsCoreNodesDuplicatesAndRankRegressions) {
    hodtest::TempDir tmp("writer");
    auto g = hodtest::ten_node_graph();
    IndexWriter w(tmp.path(), g, 512);
    std::vector<EdgeTriplet> out(g.out(v(1)).begin(), g.out(v(1)).end());
    std::vector<EdgeTriplet> in(g.in(v(1)).begin(), g.in(v(1)).end());
    EXPECT_THROW(w.append_removed_node(v(1), 1, out, in), PreconditionError) << "v1 is still alive";

    std::vector<NodeId> r = {v(1), v(2)};
    g.remove_nodes(r);
    w.append_removed_node(v(1), 2, out, in);
    EXPECT_THROW(w.append_removed_node(v(1), 2, out, in), PreconditionError);
    EXPECT_THROW(w.append_removed_node(v(2), 1, {}, {}), PreconditionError);
    std::vector<EdgeTriplet> wrong_sign = in;
    wrong_sign.push_back(out[0]);
    EXPECT_THROW(w.append_removed_node(v(2), 2, {}, wrong_sign), PreconditionError);
}
