#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "hod/extsort.hpp"
#include "hod/graph.hpp"
#include "hod/types.hpp"

namespace hod {

struct BuildConfig {
    std::uint64_t memory_budget = 64ull << 20;
    std::uint64_t block_size = 64ull << 10;
    std::uint32_t baseline_factor = 5;
    std::uint64_t median_sample_size = 10'000;
    double min_shrink = 0.05;
    std::uint64_t seed = 0;
    // Optional smallness target: stop as soon as the reduced graph has at
    // most this many alive nodes and edges. Useful for tiny graphs that fit
    // in any realistic budget from the start.
    std::optional<std::uint64_t> target_nodes;
    std::optional<std::uint64_t> target_edges;
    bool parallel = true;

    void validate() const;
};

/// |in|·|out \ in| + |out|·|in \ out| for sorted, duplicate-free neighbor sets.
std::uint64_t node_score(std::span<const NodeId> in_neighbors, std::span<const NodeId> out_neighbors);
std::uint64_t node_score(const AdjacencyGraph& g, NodeId v);

/// Lower median of the scores of a uniform sample (without replacement) of
/// min(sample_size, alive) alive nodes.
std::uint64_t estimate_median_score(const AdjacencyGraph& g, std::uint64_t sample_size, std::uint64_t seed,
                                    bool parallel = false);

struct RemovalSet {
    std::uint32_t iteration = 0;
    std::vector<NodeId> members;  // ascending
    std::vector<NodeId> blocked;  // ascending
    std::uint64_t score_sum = 0;  // sum of member scores in the pre-removal graph
};

struct EmptyRemoval : Error {
    EmptyRemoval() : Error("no node qualifies for removal") {}
};

/// Greedy independent set over alive nodes in ascending id order: v joins if
/// its score is at most `threshold` and no earlier member is adjacent to it.
RemovalSet select_removal_set(const AdjacencyGraph& g, std::uint64_t threshold, std::uint32_t iteration = 1,
                              bool parallel = false);

/// The single alive unblocked node of minimum score (ties: lowest id).
RemovalSet fallback_removal_set(const AdjacencyGraph& g, std::uint32_t iteration = 1);

/// Builds a RemovalSet from explicit members, checking independence.
RemovalSet make_removal_set(const AdjacencyGraph& g, std::vector<NodeId> members, std::uint32_t iteration = 1);

using TripletSink = std::function<void(const EdgeTriplet&)>;

/// Emits both signs of every candidate <u,w> through a removed node.
/// Returns the number of logical candidate edges.
std::uint64_t emit_candidate_edges(const AdjacencyGraph& g, const RemovalSet& r, const TripletSink& sink);

struct BaselineCounts {
    std::uint64_t surviving = 0;  // existing edges between non-removed nodes
    std::uint64_t two_hop = 0;    // sampled two-hop witnesses
    std::uint64_t attempts = 0;
    std::uint64_t total() const { return surviving + two_hop; }
};

/// Emits both signs of every surviving edge plus up to `budget` sampled
/// two-hop paths u -> v -> w over nodes outside the removal set.
BaselineCounts emit_baseline_edges(const AdjacencyGraph& g, const RemovalSet& r, std::uint64_t budget,
                                   std::uint64_t seed, const TripletSink& sink);

/// Single pass over triplets sorted by triplet_compare. A group is a run of
/// equal (a, b, sign); its first element is kept iff it is a candidate.
std::vector<EdgeTriplet> filter_shortcuts(std::span<const EdgeTriplet> sorted);
std::vector<EdgeTriplet> filter_shortcuts(const TripletRun& sorted, std::size_t block_size);

/// Adjacency lists of a removed node, captured just before removal.
struct RemovedNode {
    NodeId node = kNoNode;
    std::vector<EdgeTriplet> out;
    std::vector<EdgeTriplet> in;
};

struct IterationStats {
    std::uint32_t iteration = 0;
    std::uint64_t threshold = 0;
    std::uint64_t removed = 0;
    std::uint64_t shortcuts_retained = 0;
    std::uint64_t candidates_emitted = 0;
    std::uint64_t baselines_emitted = 0;
    std::uint64_t edges_before = 0;
    std::uint64_t edges_remaining = 0;
    std::uint64_t nodes_remaining = 0;
    std::uint64_t bytes_remaining = 0;
    bool fallback = false;
    SortStats sort;
};

/// The per-iteration JSON-lines record printed by the build tool.
nlohmann::json to_json(const IterationStats& s);

struct IterationResult {
    IterationStats stats;
    RemovalSet removal;
    std::vector<RemovedNode> archived;  // removal order (ascending id)
    std::vector<EdgeTriplet> shortcuts; // retained shortcuts, outgoing sign only
};

struct ReduceOptions {
    std::filesystem::path temp_dir;
    // When set, receives a copy of the fully sorted temporary file.
    std::vector<EdgeTriplet>* sorted_capture = nullptr;
};

/// One reduction step with a given removal set.
IterationResult reduce_iteration(AdjacencyGraph& g, const BuildConfig& cfg, RemovalSet r,
                                 const ReduceOptions& opts);
/// One reduction step choosing the removal set from the score threshold.
/// Throws EmptyRemoval if nothing can be removed.
IterationResult reduce_iteration(AdjacencyGraph& g, const BuildConfig& cfg, std::uint32_t iteration,
                                 const ReduceOptions& opts);

struct BuildReport {
    std::vector<IterationStats> iterations;
    std::vector<RemovalSet> removals;
    std::uint32_t core_rank = 0;
    std::uint64_t core_nodes = 0;
    std::uint64_t core_edges = 0;
    std::uint64_t core_bytes = 0;
    std::uint64_t shortcuts = 0;
};

struct BuildHooks {
    // Called with the graph as it was before iteration r.iteration removed r.members.
    std::function<void(const AdjacencyGraph& before, const RemovalSet& r)> before_removal;
    std::function<void(const IterationStats&)> on_iteration;
};

/// Runs the reduction loop on `g` (consumed) and writes the index to `out_dir`.
BuildReport build_index(AdjacencyGraph g, const BuildConfig& cfg, const std::filesystem::path& out_dir,
                        std::span<const std::uint64_t> original_ids = {}, const BuildHooks& hooks = {});

}  // namespace hod
