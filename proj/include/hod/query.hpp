#pragma once

#include <cstdint>
#include <vector>

#include "hod/index_store.hpp"
#include "hod/memory.hpp"
#include "hod/types.hpp"

namespace hod {

struct QueryStats {
    FetchLog forward;
    FetchLog core;
    FetchLog backward;
    std::uint64_t forward_pq_ops = 0;
    std::uint64_t core_pq_ops = 0;
    std::uint64_t backward_pq_ops = 0;
    std::uint64_t forward_visited = 0;
    std::uint64_t backward_visited = 0;
    std::uint64_t core_settled = 0;
};

/// Per-query tables. κ arrays are flat and indexed by node id.
struct SearchState {
    tracked_vector<Distance> kf;
    tracked_vector<Distance> kb;
    tracked_vector<NodeId> pred;
    Distance best = Distance::unreachable();

    void init_forward(NodeId n, NodeId s, bool with_pred);
    void init_backward(NodeId n, NodeId t);
};

struct SsdResult {
    NodeId source = kNoNode;
    tracked_vector<Distance> distances;
    tracked_vector<NodeId> predecessors;  // empty unless requested; kNoNode for the source and unreachable nodes
};

struct QueryOptions {
    bool predecessors = false;
    QueryStats* stats = nullptr;
    // PPD only: every value d̄ takes during the core search, in order.
    std::vector<Distance>* best_trace = nullptr;
};

// ---- single-source phases

/// Relaxes edges of the forward file in ascending θ from `s`; core targets
/// only receive κ_f values. No-op if `s` is a core node.
void forward_search(const IndexBundle& b, NodeId s, SearchState& st, QueryStats* stats = nullptr);

/// Dijkstra over core outgoing edges seeded with every core node whose κ_f is finite.
void core_search_ssd(const CoreGraph& core, SearchState& st, QueryStats* stats = nullptr);

/// One front-to-back pass of the backward file; no priority queue.
void backward_scan_ssd(const IndexBundle& b, SearchState& st, QueryStats* stats = nullptr);

/// Number of SSD queries answered by this process so far, across threads.
std::uint64_t ssd_queries_answered();

SsdResult ssd_query(const IndexBundle& b, NodeId s, const QueryOptions& opts = {});
SsdResult ssd_query(const IndexBundle& b, const CoreGraph& core, NodeId s, const QueryOptions& opts = {});

/// ssd_query with predecessors: pred(v) is v's predecessor on a shortest
/// path in the original graph.
SsdResult sssp_query(const IndexBundle& b, NodeId s, QueryStats* stats = nullptr);
SsdResult sssp_query(const IndexBundle& b, const CoreGraph& core, NodeId s, QueryStats* stats = nullptr);

// ---- point-to-point phases

void ppd_forward(const IndexBundle& b, NodeId s, SearchState& st, QueryStats* stats = nullptr);

/// Mirror of the forward search over the backward file from `t`, visiting
/// nodes in ascending θ (back-to-front in file order) and filling κ_b.
void ppd_backward(const IndexBundle& b, NodeId t, SearchState& st, QueryStats* stats = nullptr);

/// Round-robin bidirectional Dijkstra inside the core. Returns d̄.
Distance bidirectional_core_search(const CoreGraph& core, SearchState& st, QueryStats* stats = nullptr,
                                   std::vector<Distance>* trace = nullptr);

Distance ppd_query(const IndexBundle& b, NodeId s, NodeId t, const QueryOptions& opts = {});
Distance ppd_query(const IndexBundle& b, const CoreGraph& core, NodeId s, NodeId t, const QueryOptions& opts = {});

}  // namespace hod
