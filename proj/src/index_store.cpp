#include "hod/index_store.hpp"

#include <algorithm>
#include <fstream>

#include <zlib.h>

namespace hod {

using nlohmann::json;

// ---------------------------------------------------------------- writer

IndexWriter::IndexWriter(const std::filesystem::path& dir, const AdjacencyGraph& live, std::uint64_t block_size)
    : paths_{dir}, live_(live), block_size_(block_size), seen_(live.node_count(), 0) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError(dir.string(), "cannot create index directory (" + ec.message() + ")");
    forward_ = io::File(paths_.forward(), "wb");
    staging_ = io::File(paths_.backward_staging(), "wb");
}

IndexWriter::~IndexWriter() {
    if (!finalized_) {
        staging_ = io::File();
        std::error_code ec;
        std::filesystem::remove(paths_.backward_staging(), ec);
    }
}

void IndexWriter::put_block(io::File& f, NodeId v, std::span<const EdgeTriplet> edges, std::uint64_t& pos) {
    buf_.assign(format::block_bytes(edges.size()), 0);
    format::put_u32(buf_.data(), v);
    format::put_u32(buf_.data() + 4, static_cast<std::uint32_t>(edges.size()));
    std::uint8_t* p = buf_.data() + format::kBlockHeaderBytes;
    for (const auto& t : edges) {
        format::encode_edge({t.b, t.length, t.pred_hint, t.kind}, p);
        p += format::kEdgeRecordBytes;
    }
    f.write(buf_.data(), buf_.size());
    pos += buf_.size();
}

void IndexWriter::append_removed_node(NodeId v, std::uint32_t rank, std::span<const EdgeTriplet> out,
                                      std::span<const EdgeTriplet> in) {
    if (finalized_)
        throw PreconditionError("append after finalize");
    if (v >= live_.node_count())
        throw UnknownNode(v);
    if (live_.alive(v))
        throw PreconditionError("node " + std::to_string(v) + " is still in the core graph");
    if (seen_[v])
        throw PreconditionError("node " + std::to_string(v) + " appended twice");
    if (rank == 0 || (!ranks_.empty() && rank < ranks_.back()))
        throw PreconditionError("nodes must be appended in removal order");
    for (const auto& t : out)
        if (t.a != v || t.sign != Sign::outgoing)
            throw PreconditionError("outgoing list of node " + std::to_string(v) + " is malformed");
    for (const auto& t : in)
        if (t.a != v || t.sign != Sign::incoming)
            throw PreconditionError("incoming list of node " + std::to_string(v) + " is malformed");
    seen_[v] = 1;
    order_.push_back(v);
    ranks_.push_back(rank);
    forward_offsets_.push_back(forward_pos_);
    put_block(forward_, v, out, forward_pos_);
    staging_offsets_.push_back(staging_pos_);
    put_block(staging_, v, in, staging_pos_);
}

std::uint64_t IndexWriter::finalize(const AdjacencyGraph& core, const FinalizeInfo& info) {
    if (finalized_)
        throw PreconditionError("finalize called twice");
    if (core.alive_count() == 0)
        throw PreconditionError("core graph is empty");
    forward_.sync();
    forward_.close();
    staging_.sync();
    staging_.close();

    // Backward file: staging blocks in reverse order, contents untouched.
    std::vector<std::uint64_t> backward_offsets;
    backward_offsets.reserve(order_.size());
    {
        io::File in(paths_.backward_staging(), "rb");
        io::File out(paths_.backward(), "wb");
        std::uint64_t pos = 0;
        for (std::size_t i = order_.size(); i-- > 0;) {
            std::uint64_t begin = staging_offsets_[i];
            std::uint64_t end = i + 1 < order_.size() ? staging_offsets_[i + 1] : staging_pos_;
            buf_.resize(end - begin);
            in.seek(begin);
            in.read_exact(buf_.data(), buf_.size());
            out.write(buf_.data(), buf_.size());
            backward_offsets.push_back(pos);
            pos += buf_.size();
        }
        out.sync();
        out.close();
    }
    std::filesystem::remove(paths_.backward_staging());

    // Core file: each core node's outgoing block, then its incoming block.
    std::uint32_t max_rank = ranks_.empty() ? 0 : ranks_.back();
    std::uint32_t core_rank = max_rank + 1;
    std::vector<std::uint32_t> rank(live_.node_count(), core_rank);
    for (std::size_t i = 0; i < order_.size(); ++i)
        rank[order_[i]] = ranks_[i];
    std::uint64_t core_pos = 0;
    std::uint64_t core_nodes = 0;
    {
        io::File out(paths_.core(), "wb");
        for (NodeId v = 0; v < core.node_count(); ++v) {
            if (!core.alive(v))
                continue;
            if (seen_[v])
                throw PreconditionError("node " + std::to_string(v) + " is both archived and in the core");
            put_block(out, v, core.out(v), core_pos);
            put_block(out, v, core.in(v), core_pos);
            ++core_nodes;
        }
        out.sync();
        out.close();
    }
    if (core_nodes + order_.size() != live_.node_count())
        throw PreconditionError("some nodes are neither archived nor in the core");
    if (core_pos > info.memory_budget)
        throw CoreTooLarge(core_pos, info.memory_budget);

    json meta;
    meta["format_version"] = format::kVersion;
    meta["n"] = live_.node_count();
    meta["block_size"] = block_size_;
    meta["memory_budget"] = info.memory_budget;
    meta["max_edge_length"] = info.max_edge_length;
    meta["core_rank"] = core_rank;
    meta["core"] = {{"nodes", core_nodes},
                    {"edges", core.edge_count()},
                    {"bytes", core_pos},
                    {"crc32", io::crc32_file(paths_.core())}};
    meta["forward"] = {{"bytes", forward_pos_},
                       {"crc32", io::crc32_file(paths_.forward())},
                       {"order", order_},
                       {"offsets", forward_offsets_}};
    meta["backward"] = {{"bytes", staging_pos_},
                        {"crc32", io::crc32_file(paths_.backward())},
                        {"offsets", backward_offsets}};
    meta["ranks"] = rank;
    if (!info.original_ids.empty())
        meta["original_ids"] = std::vector<std::uint64_t>(info.original_ids.begin(), info.original_ids.end());
    meta["build"] = info.build;

    {
        io::File out(paths_.meta(), "wb");
        auto text = meta.dump(1);
        text.push_back('\n');
        out.write(text.data(), text.size());
        out.sync();
        out.close();
    }
    finalized_ = true;
    return core_pos;
}

// ---------------------------------------------------------------- block reader

BlockReader::BlockReader(const std::filesystem::path& path, std::uint64_t block_size, FetchLog* log)
    : file_(path, "rb"), block_size_(block_size), log_(log) {
    if (block_size_ == 0)
        throw PreconditionError("block size must be positive");
    size_ = file_.size();
    buf_.resize(block_size_);
}

void BlockReader::fetch(std::uint64_t block) {
    if (block == cached_)
        return;
    std::uint64_t off = block * block_size_;
    file_.seek(off);
    std::size_t want = std::min<std::uint64_t>(block_size_, size_ - off);
    cached_len_ = file_.read(buf_.data(), want);
    if (cached_len_ != want)
        throw IoError(file_.path(), "short read");
    cached_ = block;
    if (log_)
        log_->offsets.push_back(off);
}

void BlockReader::read(std::uint64_t offset, std::size_t len, std::uint8_t* out, Direction dir) {
    if (len == 0)
        return;
    if (offset + len > size_)
        throw CorruptionError(file_.path() + ": read past end of file");
    std::uint64_t first = offset / block_size_;
    std::uint64_t last = (offset + len - 1) / block_size_;
    auto copy = [&](std::uint64_t blk) {
        fetch(blk);
        std::uint64_t blk_begin = blk * block_size_;
        std::uint64_t lo = std::max(offset, blk_begin);
        std::uint64_t hi = std::min<std::uint64_t>(offset + len, blk_begin + cached_len_);
        std::copy_n(buf_.data() + (lo - blk_begin), hi - lo, out + (lo - offset));
    };
    if (dir == Direction::ascending) {
        for (std::uint64_t b = first; b <= last; ++b)
            copy(b);
    } else {
        for (std::uint64_t b = last + 1; b-- > first;)
            copy(b);
    }
}

// ---------------------------------------------------------------- core graph

std::uint32_t CoreGraph::local(NodeId v) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), v);
    if (it == nodes_.end() || *it != v)
        return UINT32_MAX;
    return static_cast<std::uint32_t>(it - nodes_.begin());
}

std::span<const CoreEdge> CoreGraph::out(std::uint32_t i) const {
    return {out_edges_.data() + out_begin_[i], out_edges_.data() + out_begin_[i + 1]};
}

std::span<const CoreEdge> CoreGraph::in(std::uint32_t i) const {
    return {in_edges_.data() + in_begin_[i], in_edges_.data() + in_begin_[i + 1]};
}

std::uint64_t CoreGraph::resident_bytes() const {
    return nodes_.capacity() * sizeof(NodeId) + (out_begin_.capacity() + in_begin_.capacity()) * 8 +
           (out_edges_.capacity() + in_edges_.capacity()) * sizeof(CoreEdge);
}

// ---------------------------------------------------------------- bundle

namespace {

template <typename T>
std::vector<T> json_array(const json& j, const char* what) {
    if (!j.is_array())
        throw CorruptionError(std::string("meta.json: ") + what + " is not an array");
    return j.get<std::vector<T>>();
}

std::uint64_t file_size_or_throw(const std::filesystem::path& p) {
    std::error_code ec;
    auto s = std::filesystem::file_size(p, ec);
    if (ec)
        throw IoError(p.string(), "cannot stat (" + ec.message() + ")");
    return s;
}

// Reads one adjacency block through `reader` into `edges`.
AdjBlock read_block(BlockReader& reader, std::uint64_t begin, std::uint64_t end, tracked_vector<std::uint8_t>& raw,
                    tracked_vector<format::StoredEdge>& edges, BlockReader::Direction dir) {
    if (end < begin + format::kBlockHeaderBytes)
        throw CorruptionError("adjacency block shorter than its header");
    raw.resize(end - begin);
    reader.read(begin, raw.size(), raw.data(), dir);
    AdjBlock b;
    b.node = format::get_u32(raw.data());
    std::uint32_t count = format::get_u32(raw.data() + 4);
    if (format::block_bytes(count) != raw.size())
        throw CorruptionError("adjacency block length does not match its edge count");
    edges.resize(count);
    for (std::uint32_t i = 0; i < count; ++i)
        edges[i] = format::decode_edge(raw.data() + format::kBlockHeaderBytes + i * format::kEdgeRecordBytes);
    b.edges = edges;
    return b;
}

}  // namespace

IndexBundle IndexBundle::open(const std::filesystem::path& dir) {
    IndexBundle b;
    b.paths_ = BundlePaths{dir};
    {
        std::ifstream in(b.paths_.meta());
        if (!in)
            throw IoError(b.paths_.meta().string(), "cannot open");
        try {
            in >> b.meta_;
        } catch (const json::exception& e) {
            throw CorruptionError(b.paths_.meta().string() + ": " + e.what());
        }
    }
    const json& m = b.meta_;
    try {
        if (m.at("format_version").get<int>() != format::kVersion)
            throw CorruptionError("unsupported index format version");
        b.n_ = m.at("n").get<NodeId>();
        b.block_size_ = m.at("block_size").get<std::uint64_t>();
        b.memory_budget_ = m.at("memory_budget").get<std::uint64_t>();
        b.max_edge_length_ = m.at("max_edge_length").get<std::uint64_t>();
        b.core_rank_ = m.at("core_rank").get<std::uint32_t>();
        b.core_nodes_ = m.at("core").at("nodes").get<std::uint64_t>();
        b.core_edges_ = m.at("core").at("edges").get<std::uint64_t>();
        b.core_bytes_ = m.at("core").at("bytes").get<std::uint64_t>();
        b.forward_bytes_ = m.at("forward").at("bytes").get<std::uint64_t>();
        b.backward_bytes_ = m.at("backward").at("bytes").get<std::uint64_t>();
        b.forward_order_ = json_array<NodeId>(m.at("forward").at("order"), "forward.order");
        b.forward_offsets_ = json_array<std::uint64_t>(m.at("forward").at("offsets"), "forward.offsets");
        b.backward_offsets_ = json_array<std::uint64_t>(m.at("backward").at("offsets"), "backward.offsets");
        b.rank_ = json_array<std::uint32_t>(m.at("ranks"), "ranks");
        if (m.contains("original_ids"))
            b.original_ids_ = json_array<std::uint64_t>(m.at("original_ids"), "original_ids");
    } catch (const json::exception& e) {
        throw CorruptionError(b.paths_.meta().string() + ": " + e.what());
    }
    const std::size_t k = b.forward_order_.size();
    if (b.rank_.size() != b.n_ || b.forward_offsets_.size() != k || b.backward_offsets_.size() != k ||
        (!b.original_ids_.empty() && b.original_ids_.size() != b.n_) || k + b.core_nodes_ != b.n_ ||
        b.block_size_ == 0)
        throw CorruptionError(b.paths_.meta().string() + ": inconsistent table sizes");
    b.theta_.assign(b.n_, kNoNode);
    for (std::uint32_t i = 0; i < k; ++i) {
        NodeId v = b.forward_order_[i];
        if (v >= b.n_ || b.theta_[v] != kNoNode)
            throw CorruptionError(b.paths_.meta().string() + ": forward order is not a permutation");
        b.theta_[v] = i;
    }
    if (file_size_or_throw(b.paths_.forward()) != b.forward_bytes_ ||
        file_size_or_throw(b.paths_.backward()) != b.backward_bytes_ ||
        file_size_or_throw(b.paths_.core()) != b.core_bytes_)
        throw CorruptionError(dir.string() + ": index file sizes do not match meta.json");
    return b;
}

NodeId IndexBundle::resolve(std::uint64_t external) const {
    if (original_ids_.empty()) {
        if (external >= n_)
            throw UnknownNode(external);
        return static_cast<NodeId>(external);
    }
    // The remap table is ascending: real ids first, then padding ids above them.
    auto it = std::lower_bound(original_ids_.begin(), original_ids_.end(), external);
    if (it == original_ids_.end() || *it != external)
        throw UnknownNode(external);
    return static_cast<NodeId>(it - original_ids_.begin());
}

CoreGraph IndexBundle::load_core(FetchLog* log) const {
    BlockReader reader(paths_.core(), block_size_, log);
    CoreGraph g;
    g.nodes_.reserve(core_nodes_);
    g.out_begin_.reserve(core_nodes_ + 1);
    g.in_begin_.reserve(core_nodes_ + 1);
    g.out_edges_.reserve(core_edges_);
    g.in_edges_.reserve(core_edges_);
    g.out_begin_.push_back(0);
    g.in_begin_.push_back(0);

    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::uint64_t pos = 0;
    std::uint8_t header[format::kBlockHeaderBytes];
    std::uint8_t rec[format::kEdgeRecordBytes];
    auto read = [&](std::uint8_t* p, std::size_t len) {
        reader.read(pos, len, p);
        crc = ::crc32(crc, p, static_cast<uInt>(len));
        pos += len;
    };
    while (pos < core_bytes_) {
        for (int side = 0; side < 2; ++side) {
            read(header, sizeof header);
            NodeId v = format::get_u32(header);
            std::uint32_t count = format::get_u32(header + 4);
            if (side == 0) {
                if (v >= n_ || !is_core(v) || (!g.nodes_.empty() && v <= g.nodes_.back()))
                    throw CorruptionError(paths_.core().string() + ": unexpected node " + std::to_string(v));
                g.nodes_.push_back(v);
            } else if (v != g.nodes_.back()) {
                throw CorruptionError(paths_.core().string() + ": mismatched incoming block");
            }
            auto& edges = side == 0 ? g.out_edges_ : g.in_edges_;
            for (std::uint32_t i = 0; i < count; ++i) {
                read(rec, sizeof rec);
                auto e = format::decode_edge(rec);
                edges.push_back({e.other, 0, e.length, e.pred_hint, e.kind});
            }
            (side == 0 ? g.out_begin_ : g.in_begin_).push_back(edges.size());
        }
    }
    if (g.nodes_.size() != core_nodes_)
        throw CorruptionError(paths_.core().string() + ": core node count differs from meta.json");
    if (static_cast<std::uint32_t>(crc) != meta_.at("core").at("crc32").get<std::uint32_t>())
        throw CorruptionError(paths_.core().string() + ": checksum mismatch");
    for (auto* list : {&g.out_edges_, &g.in_edges_}) {
        for (auto& e : *list) {
            e.other_local = g.local(e.other);
            if (e.other_local == UINT32_MAX)
                throw CorruptionError(paths_.core().string() + ": edge leaves the core");
        }
    }
    return g;
}

void IndexBundle::verify_checksums() const {
    auto check = [&](const std::filesystem::path& p, const char* key) {
        if (io::crc32_file(p) != meta_.at(key).at("crc32").get<std::uint32_t>())
            throw CorruptionError(p.string() + ": checksum mismatch");
    };
    check(paths_.forward(), "forward");
    check(paths_.backward(), "backward");
    check(paths_.core(), "core");
}

void IndexBundle::for_each_forward_block(const std::function<void(const AdjBlock&)>& fn) const {
    BlockReader reader(paths_.forward(), block_size_);
    tracked_vector<std::uint8_t> raw;
    tracked_vector<format::StoredEdge> edges;
    for (std::uint32_t i = 0; i < forward_order_.size(); ++i) {
        std::uint64_t end = i + 1 < forward_order_.size() ? forward_offsets_[i + 1] : forward_bytes_;
        fn(read_block(reader, forward_offsets_[i], end, raw, edges, BlockReader::Direction::ascending));
    }
}

void IndexBundle::for_each_backward_block(const std::function<void(const AdjBlock&)>& fn) const {
    BlockReader reader(paths_.backward(), block_size_);
    tracked_vector<std::uint8_t> raw;
    tracked_vector<format::StoredEdge> edges;
    for (std::uint32_t i = 0; i < backward_offsets_.size(); ++i) {
        std::uint64_t end = i + 1 < backward_offsets_.size() ? backward_offsets_[i + 1] : backward_bytes_;
        fn(read_block(reader, backward_offsets_[i], end, raw, edges, BlockReader::Direction::ascending));
    }
}

std::vector<std::string> IndexBundle::validate() const {
    std::vector<std::string> errs;
    auto fail = [&](std::string s) {
        if (errs.size() < 100)
            errs.push_back(std::move(s));
    };
    const std::uint32_t k = noncore_count();

    std::uint32_t pos = 0;
    std::uint32_t prev_rank = 0;
    for_each_forward_block([&](const AdjBlock& b) {
        NodeId expect = forward_order_[pos];
        if (b.node != expect)
            fail("forward block " + std::to_string(pos) + " holds node " + std::to_string(b.node));
        if (rank_[b.node] < prev_rank)
            fail("forward file rank decreases at position " + std::to_string(pos));
        if (rank_[b.node] >= core_rank_)
            fail("forward file holds core-ranked node " + std::to_string(b.node));
        prev_rank = rank_[b.node];
        for (const auto& e : b.edges) {
            if (e.other >= n_ || rank_[e.other] <= rank_[b.node])
                fail("forward edge <" + std::to_string(b.node) + "," + std::to_string(e.other) +
                     "> does not climb in rank");
            if (e.length == 0 || e.kind == EdgeKind::baseline)
                fail("forward edge of node " + std::to_string(b.node) + " has invalid length or kind");
        }
        ++pos;
    });
    if (pos != k)
        fail("forward file block count differs from meta.json");

    pos = 0;
    for_each_backward_block([&](const AdjBlock& b) {
        if (pos < k && b.node != forward_order_[k - 1 - pos])
            fail("backward block " + std::to_string(pos) + " is not the reverse of the forward order");
        for (const auto& e : b.edges) {
            if (e.other >= n_ || rank_[e.other] <= rank_[b.node])
                fail("backward edge <" + std::to_string(e.other) + "," + std::to_string(b.node) +
                     "> does not descend in rank");
            if (e.length == 0 || e.kind == EdgeKind::baseline)
                fail("backward edge of node " + std::to_string(b.node) + " has invalid length or kind");
        }
        ++pos;
    });
    if (pos != k)
        fail("backward file block count differs from meta.json");

    for (NodeId v = 0; v < n_; ++v) {
        if (is_core(v) && rank_[v] != core_rank_)
            fail("core node " + std::to_string(v) + " does not carry the core rank");
        if (!is_core(v) && rank_[v] >= core_rank_)
            fail("non-core node " + std::to_string(v) + " carries the core rank");
    }
    if (core_bytes_ > memory_budget_)
        fail("core file of " + std::to_string(core_bytes_) + " bytes exceeds the memory budget");

    try {
        CoreGraph core = load_core();
        if (core.size() == 0)
            fail("core graph is empty");
        std::uint64_t in_total = 0;
        for (std::uint32_t i = 0; i < core.size(); ++i) {
            in_total += core.in(i).size();
            for (const auto& e : core.out(i)) {
                auto mirror = core.in(e.other_local);
                auto it = std::find_if(mirror.begin(), mirror.end(), [&](const CoreEdge& x) { return x.other == core.node(i); });
                if (it == mirror.end() || it->length != e.length || it->pred_hint != e.pred_hint)
                    fail("core edge <" + std::to_string(core.node(i)) + "," + std::to_string(e.other) +
                         "> has no matching incoming entry");
            }
        }
        if (in_total != core.edge_count())
            fail("core outgoing and incoming edge counts differ");
    } catch (const Error& e) {
        fail(e.what());
    }
    return errs;
}

// ---------------------------------------------------------------- cursors

ForwardCursor::ForwardCursor(const IndexBundle& b, FetchLog* log)
    : bundle_(b), reader_(b.paths().forward(), b.block_size(), log) {}

AdjBlock ForwardCursor::at(std::uint32_t theta) {
    if (theta >= bundle_.noncore_count())
        throw PreconditionError("forward position " + std::to_string(theta) + " out of range");
    if (static_cast<std::int64_t>(theta) < last_)
        throw ScanOrderError("forward scan moved back from " + std::to_string(last_) + " to " + std::to_string(theta));
    last_ = theta;
    std::uint64_t end = theta + 1 < bundle_.noncore_count() ? bundle_.forward_offset(theta + 1) : bundle_.forward_bytes();
    return read_block(reader_, bundle_.forward_offset(theta), end, raw_, edges_, BlockReader::Direction::ascending);
}

BackwardScanner::BackwardScanner(const IndexBundle& b, FetchLog* log)
    : bundle_(b), reader_(b.paths().backward(), b.block_size(), log) {}

bool BackwardScanner::next(AdjBlock& out) {
    const std::uint32_t k = bundle_.noncore_count();
    if (pos_ >= k)
        return false;
    std::uint64_t end = pos_ + 1 < k ? bundle_.backward_offset(pos_ + 1) : bundle_.backward_bytes();
    out = read_block(reader_, bundle_.backward_offset(pos_), end, raw_, edges_, BlockReader::Direction::ascending);
    ++pos_;
    return true;
}

BackwardRankCursor::BackwardRankCursor(const IndexBundle& b, FetchLog* log)
    : bundle_(b), reader_(b.paths().backward(), b.block_size(), log) {}

AdjBlock BackwardRankCursor::at(std::uint32_t theta) {
    const std::uint32_t k = bundle_.noncore_count();
    if (theta >= k)
        throw PreconditionError("backward position " + std::to_string(theta) + " out of range");
    if (static_cast<std::int64_t>(theta) < last_)
        throw ScanOrderError("backward rank scan moved back from " + std::to_string(last_) + " to " +
                             std::to_string(theta));
    last_ = theta;
    std::uint32_t pos = k - 1 - theta;
    std::uint64_t end = pos + 1 < k ? bundle_.backward_offset(pos + 1) : bundle_.backward_bytes();
    return read_block(reader_, bundle_.backward_offset(pos), end, raw_, edges_, BlockReader::Direction::descending);
}

}  // namespace hod
