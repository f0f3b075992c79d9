#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hod/graph.hpp"
#include "hod/index_store.hpp"
#include "hod/types.hpp"

namespace hod {

struct OracleResult {
    NodeId source = kNoNode;
    std::vector<Distance> dist;
    std::vector<NodeId> pred;  // kNoNode for the source and unreachable nodes
};

/// Textbook lazy-deletion Dijkstra. By default only original edges are
/// followed; with `all_edges` shortcuts in a reduced graph count as well.
OracleResult dijkstra_oracle(const AdjacencyGraph& g, NodeId s, bool all_edges = false);

/// Sum of original edge lengths along the predecessor chain from v back to
/// the source, or nullopt if the chain is broken, cyclic or uses a missing edge.
std::optional<std::uint64_t> pred_path_length(const AdjacencyGraph& g, const std::vector<NodeId>& pred, NodeId source,
                                              NodeId v);

struct VerifyCheck {
    explicit VerifyCheck(std::string n = {}) : name(std::move(n)) {}
    std::string name;
    std::uint64_t checked = 0;
    std::uint64_t violations = 0;
    std::vector<std::string> samples;
    bool passed() const { return violations == 0; }
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool passed() const;
    nlohmann::json to_json() const;
};

/// Checks an index against the original graph: shortcut soundness and
/// provenance, SSD/SSSP against the oracle for sampled sources, PPD for
/// sampled pairs, and the structural invariants of the bundle.
VerifyReport verify_bundle(const AdjacencyGraph& g, const IndexBundle& b, std::uint64_t sample_sources,
                           std::uint64_t seed);

inline constexpr NodeId kExactClosenessLimit = 2000;

/// closeness(v) = (n-1) / sum of dist(u, v) over u that reach v; 0 if none.
std::vector<double> exact_closeness(const AdjacencyGraph& g, bool parallel = true);

/// Exact average distance into v over all other nodes; unreachable pairs
/// count as `penalty`.
std::vector<double> exact_average_distance(const AdjacencyGraph& g, std::uint64_t penalty, bool parallel = true);

struct ClosenessOptions {
    double epsilon = 0.1;
    std::uint64_t seed = 0;
    // Distance charged for a sampled source that cannot reach v; 0 selects
    // n times the longest edge.
    std::uint64_t penalty = 0;
    bool parallel = true;
};

struct ClosenessResult {
    std::uint64_t k = 0;
    std::uint64_t queries = 0;
    std::uint64_t penalty = 0;
    std::vector<NodeId> sources;
    std::vector<double> average_distance;
    std::vector<double> closeness;
};

/// ⌈ln n / ε²⌉
std::uint64_t closeness_sample_count(std::uint64_t n, double epsilon);

ClosenessResult approx_closeness(const IndexBundle& b, const ClosenessOptions& opts);

}  // namespace hod
