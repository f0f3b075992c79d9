#pragma once

// Hot loops in two flavours: an OpenMP version used by default and a plain
// serial version kept as the reference the tests and benchmarks compare
// against. Both produce identical results.

#include <cstdint>
#include <span>
#include <vector>

#include "hod/graph.hpp"
#include "hod/index_store.hpp"
#include "hod/query.hpp"
#include "hod/types.hpp"

namespace hod::kernels {

namespace serial {
void sort_triplets(std::span<EdgeTriplet> data);
/// scores[v] = node score of v for alive v, 0 otherwise.
void node_scores(const AdjacencyGraph& g, std::span<std::uint64_t> scores);
/// One SSD query per source, results in source order.
std::vector<SsdResult> batch_ssd(const IndexBundle& b, const CoreGraph& core, std::span<const NodeId> sources,
                                 bool predecessors);
/// sums[v] += dist(s, v), or `penalty` if s cannot reach v, for every source s.
void closeness_sums(const IndexBundle& b, const CoreGraph& core, std::span<const NodeId> sources,
                    std::uint64_t penalty, std::span<std::uint64_t> sums);
/// Oracle distance rows over original edges, one per source.
std::vector<std::vector<Distance>> all_sources(const AdjacencyGraph& g, std::span<const NodeId> sources);
}  // namespace serial

namespace omp {
void sort_triplets(std::span<EdgeTriplet> data);
void node_scores(const AdjacencyGraph& g, std::span<std::uint64_t> scores);
std::vector<SsdResult> batch_ssd(const IndexBundle& b, const CoreGraph& core, std::span<const NodeId> sources,
                                 bool predecessors);
void closeness_sums(const IndexBundle& b, const CoreGraph& core, std::span<const NodeId> sources,
                    std::uint64_t penalty, std::span<std::uint64_t> sums);
std::vector<std::vector<Distance>> all_sources(const AdjacencyGraph& g, std::span<const NodeId> sources);
}  // namespace omp

/// Worker threads the OpenMP kernels will use.
int thread_count();

}  // namespace hod::kernels
