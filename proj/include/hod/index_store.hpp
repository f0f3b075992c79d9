#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hod/format.hpp"
#include "hod/graph.hpp"
#include "hod/io.hpp"
#include "hod/memory.hpp"
#include "hod/types.hpp"

namespace hod {

struct BundlePaths {
    std::filesystem::path dir;
    std::filesystem::path forward() const { return dir / "forward.bin"; }
    std::filesystem::path backward() const { return dir / "backward.bin"; }
    std::filesystem::path core() const { return dir / "core.bin"; }
    std::filesystem::path meta() const { return dir / "meta.json"; }
    std::filesystem::path backward_staging() const { return dir / "backward.staging"; }
};

// ---------------------------------------------------------------- writing

/// Streams removed nodes into the forward and backward files during a build
/// and writes the core and metadata at the end.
class IndexWriter {
public:
    /// `live` is the graph being reduced; a node still alive in it is a core
    /// node and may not be appended.
    IndexWriter(const std::filesystem::path& dir, const AdjacencyGraph& live, std::uint64_t block_size);
    ~IndexWriter();
    IndexWriter(const IndexWriter&) = delete;
    IndexWriter& operator=(const IndexWriter&) = delete;

    void append_removed_node(NodeId v, std::uint32_t rank, std::span<const EdgeTriplet> out,
                             std::span<const EdgeTriplet> in);

    struct FinalizeInfo {
        std::uint64_t memory_budget = 0;
        std::uint64_t max_edge_length = 0;
        nlohmann::json build;  // config echo and per-iteration stats
        std::span<const std::uint64_t> original_ids;
    };

    /// Reverses the backward staging file, writes the core and meta.json,
    /// and fsyncs everything. Returns the core file size in bytes.
    std::uint64_t finalize(const AdjacencyGraph& core, const FinalizeInfo& info);

    std::uint64_t appended() const { return order_.size(); }

private:
    void put_block(io::File& f, NodeId v, std::span<const EdgeTriplet> edges, std::uint64_t& pos);

    BundlePaths paths_;
    const AdjacencyGraph& live_;
    std::uint64_t block_size_;
    io::File forward_;
    io::File staging_;
    std::uint64_t forward_pos_ = 0;
    std::uint64_t staging_pos_ = 0;
    std::vector<NodeId> order_;
    std::vector<std::uint32_t> ranks_;  // per appended node
    std::vector<std::uint64_t> forward_offsets_;
    std::vector<std::uint64_t> staging_offsets_;
    std::vector<std::uint8_t> seen_;
    std::vector<std::uint8_t> buf_;
    bool finalized_ = false;
};

// ---------------------------------------------------------------- reading

/// Records every block fetched from one file.
struct FetchLog {
    std::vector<std::uint64_t> offsets;
    std::uint64_t count() const { return offsets.size(); }
};

/// Reads byte ranges through whole B-byte blocks. The most recently fetched
/// block stays cached, so a scan in one direction fetches each block at most
/// once.
class BlockReader {
public:
    enum class Direction { ascending, descending };

    BlockReader(const std::filesystem::path& path, std::uint64_t block_size, FetchLog* log = nullptr);

    void read(std::uint64_t offset, std::size_t len, std::uint8_t* out, Direction dir = Direction::ascending);
    std::uint64_t file_size() const { return size_; }

private:
    void fetch(std::uint64_t block);

    io::File file_;
    std::uint64_t block_size_;
    std::uint64_t size_ = 0;
    FetchLog* log_;
    tracked_vector<std::uint8_t> buf_;
    std::uint64_t cached_ = std::uint64_t(-1);
    std::size_t cached_len_ = 0;
};

/// One decoded adjacency block; `edges` is valid until the next read.
struct AdjBlock {
    NodeId node = kNoNode;
    std::span<const format::StoredEdge> edges;
};

struct CoreEdge {
    NodeId other = kNoNode;
    std::uint32_t other_local = 0;
    std::uint64_t length = 0;
    NodeId pred_hint = kNoNode;
    EdgeKind kind = EdgeKind::original;
};

/// Memory-resident core graph with both signs, indexed by local position.
class CoreGraph {
public:
    std::size_t size() const { return nodes_.size(); }
    NodeId node(std::uint32_t local) const { return nodes_[local]; }
    /// Local position of `v`, or UINT32_MAX if v is not a core node.
    std::uint32_t local(NodeId v) const;
    std::span<const CoreEdge> out(std::uint32_t local) const;
    std::span<const CoreEdge> in(std::uint32_t local) const;
    std::uint64_t edge_count() const { return out_edges_.size(); }
    std::uint64_t resident_bytes() const;

private:
    friend class IndexBundle;
    tracked_vector<NodeId> nodes_;
    tracked_vector<std::uint64_t> out_begin_;
    tracked_vector<std::uint64_t> in_begin_;
    tracked_vector<CoreEdge> out_edges_;
    tracked_vector<CoreEdge> in_edges_;
};

class IndexBundle {
public:
    static IndexBundle open(const std::filesystem::path& dir);

    const BundlePaths& paths() const { return paths_; }
    NodeId node_count() const { return n_; }
    std::uint64_t block_size() const { return block_size_; }
    std::uint64_t memory_budget() const { return memory_budget_; }
    std::uint64_t max_edge_length() const { return max_edge_length_; }
    std::uint32_t core_rank() const { return core_rank_; }
    std::uint32_t rank(NodeId v) const { return rank_[v]; }
    bool is_core(NodeId v) const { return theta_[v] == kNoNode; }
    /// Position of v's block in the forward file; kNoNode for core nodes.
    std::uint32_t theta(NodeId v) const { return theta_[v]; }
    std::uint32_t noncore_count() const { return static_cast<std::uint32_t>(forward_order_.size()); }
    NodeId forward_node(std::uint32_t theta) const { return forward_order_[theta]; }
    std::uint64_t forward_offset(std::uint32_t theta) const { return forward_offsets_[theta]; }
    /// Offset of the block at file position `pos` of the backward file.
    std::uint64_t backward_offset(std::uint32_t pos) const { return backward_offsets_[pos]; }
    std::uint64_t core_node_count() const { return core_nodes_; }
    std::uint64_t core_edge_count() const { return core_edges_; }
    std::uint64_t forward_bytes() const { return forward_bytes_; }
    std::uint64_t backward_bytes() const { return backward_bytes_; }
    std::uint64_t core_bytes() const { return core_bytes_; }
    const std::vector<std::uint64_t>& original_ids() const { return original_ids_; }
    const nlohmann::json& meta() const { return meta_; }

    /// Maps an id as printed/accepted by the tools to the dense id.
    NodeId resolve(std::uint64_t external) const;
    std::uint64_t external_id(NodeId v) const { return original_ids_.empty() ? v : original_ids_[v]; }

    /// Loads the core file, checking its checksum.
    CoreGraph load_core(FetchLog* log = nullptr) const;

    /// Throws CorruptionError if any file's CRC32 differs from meta.json.
    void verify_checksums() const;

    /// Sequential sweeps used by validation and verification.
    void for_each_forward_block(const std::function<void(const AdjBlock&)>& fn) const;
    void for_each_backward_block(const std::function<void(const AdjBlock&)>& fn) const;

    /// Structural invariants: rank-ordered forward file, exact reversal in the
    /// backward file, strictly rank-ascending archived edges, mirrored signs,
    /// core size within budget. Empty iff all hold.
    std::vector<std::string> validate() const;

private:
    BundlePaths paths_;
    nlohmann::json meta_;
    NodeId n_ = 0;
    std::uint64_t block_size_ = 0;
    std::uint64_t memory_budget_ = 0;
    std::uint64_t max_edge_length_ = 0;
    std::uint32_t core_rank_ = 0;
    std::uint64_t core_nodes_ = 0;
    std::uint64_t core_edges_ = 0;
    std::uint64_t forward_bytes_ = 0;
    std::uint64_t backward_bytes_ = 0;
    std::uint64_t core_bytes_ = 0;
    std::vector<std::uint32_t> rank_;
    std::vector<std::uint32_t> theta_;
    std::vector<NodeId> forward_order_;
    std::vector<std::uint64_t> forward_offsets_;
    std::vector<std::uint64_t> backward_offsets_;
    std::vector<std::uint64_t> original_ids_;
};

// ---------------------------------------------------------------- scan cursors

/// Serves forward-file blocks by θ; θ must never decrease.
class ForwardCursor {
public:
    ForwardCursor(const IndexBundle& b, FetchLog* log = nullptr);
    AdjBlock at(std::uint32_t theta);

private:
    const IndexBundle& bundle_;
    BlockReader reader_;
    tracked_vector<format::StoredEdge> edges_;
    tracked_vector<std::uint8_t> raw_;
    std::int64_t last_ = -1;
};

/// Front-to-back pass over the backward file (descending rank).
class BackwardScanner {
public:
    BackwardScanner(const IndexBundle& b, FetchLog* log = nullptr);
    bool next(AdjBlock& out);

private:
    const IndexBundle& bundle_;
    BlockReader reader_;
    tracked_vector<format::StoredEdge> edges_;
    tracked_vector<std::uint8_t> raw_;
    std::uint32_t pos_ = 0;
};

/// Serves backward-file blocks by the node's θ in ascending order, which is
/// back-to-front in file order; θ must never decrease.
class BackwardRankCursor {
public:
    BackwardRankCursor(const IndexBundle& b, FetchLog* log = nullptr);
    AdjBlock at(std::uint32_t theta);

private:
    const IndexBundle& bundle_;
    BlockReader reader_;
    tracked_vector<format::StoredEdge> edges_;
    tracked_vector<std::uint8_t> raw_;
    std::int64_t last_ = -1;
};

}  // namespace hod
