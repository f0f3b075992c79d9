#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hod/types.hpp"

namespace hod {

/// In-memory directed graph holding both signs of every edge. Per-node lists
/// are kept sorted by the other endpoint and never contain two entries for
/// the same endpoint (parallel edges are collapsed to the minimum length).
class AdjacencyGraph {
public:
    struct Edge {
        NodeId from;
        NodeId to;
        std::uint64_t length;
    };

    AdjacencyGraph() = default;
    explicit AdjacencyGraph(NodeId n);

    /// Builds a graph of original edges. Self-loops are dropped and parallel
    /// edges keep their minimum length; the counts are reported through the
    /// optional out-parameters.
    static AdjacencyGraph from_edges(NodeId n, std::vector<Edge> edges, std::uint64_t* parallel_collapsed = nullptr,
                                     std::uint64_t* self_loops = nullptr);

    NodeId node_count() const { return static_cast<NodeId>(out_.size()); }
    std::size_t alive_count() const { return alive_count_; }
    std::size_t edge_count() const { return edge_count_; }
    bool alive(NodeId v) const { return alive_[v] != 0; }

    std::span<const EdgeTriplet> out(NodeId v) const { return out_[v]; }
    std::span<const EdgeTriplet> in(NodeId v) const { return in_[v]; }

    /// Inserts <u,w> or lowers the length of an existing <u,w>. Returns true
    /// if the graph changed.
    bool upsert_edge(NodeId u, NodeId w, std::uint64_t length, EdgeKind kind, NodeId pred_hint);

    /// Marks `removed` dead and drops every edge incident to them.
    void remove_nodes(std::span<const NodeId> removed);

    /// Merges shortcut triplets (outgoing and incoming signs, sorted under
    /// triplet_compare) into the lists. Each triplet must be strictly shorter
    /// than any existing edge between the same endpoints.
    void merge_sorted_shortcuts(std::span<const EdgeTriplet> shortcuts);

    /// Serialized size of the alive part in the on-disk adjacency layout
    /// (one outgoing and one incoming block per alive node).
    std::uint64_t storage_bytes() const;

    // Raw list access for fault-injection in tests and for the loader.
    std::vector<EdgeTriplet>& out_list(NodeId v) { return out_[v]; }
    std::vector<EdgeTriplet>& in_list(NodeId v) { return in_[v]; }
    void set_alive_flag(NodeId v, bool flag);
    void recount();

private:
    std::vector<std::vector<EdgeTriplet>> out_;
    std::vector<std::vector<EdgeTriplet>> in_;
    std::vector<std::uint8_t> alive_;
    std::size_t alive_count_ = 0;
    std::size_t edge_count_ = 0;
};

struct LoadOptions {
    bool directed = true;
    bool weighted = true;
};

struct LoadResult {
    AdjacencyGraph graph;
    /// original_ids[v] is the id used in the input for dense node v; empty
    /// when the input ids already were dense in [0, n).
    std::vector<std::uint64_t> original_ids;
    std::uint64_t parallel_collapsed = 0;
    std::uint64_t self_loops_dropped = 0;
};

/// Reads the "n m" header followed by m lines "u v [w]". Lines starting with
/// '#' and blank lines are ignored.
LoadResult load_edge_list(std::istream& in, const LoadOptions& opts);
LoadResult load_edge_list_file(const std::string& path, const LoadOptions& opts);

/// Writes the original edges of `g` as a weighted, directed edge list.
void write_edge_list(const AdjacencyGraph& g, std::ostream& out);

struct Violation {
    std::string message;
    NodeId first = kNoNode;
    NodeId second = kNoNode;
};

/// Empty result iff every adjacency invariant holds.
std::vector<Violation> validate_graph(const AdjacencyGraph& g);

}  // namespace hod
