#include "hod/kernels.hpp"

#include <algorithm>
#include <exception>
#include <mutex>

#include <omp.h>

#include "hod/extsort.hpp"
#include "hod/oracle.hpp"
#include "hod/preprocess.hpp"

namespace hod::kernels {

int thread_count() { return omp_get_max_threads(); }

namespace {

// Rethrows the first exception raised inside a parallel region.
class ErrorSlot {
public:
    template <typename F>
    void run(F&& f) {
        try {
            f();
        } catch (...) {
            std::lock_guard lock(mu_);
            if (!err_)
                err_ = std::current_exception();
        }
    }
    void rethrow() {
        if (err_)
            std::rethrow_exception(err_);
    }

private:
    std::mutex mu_;
    std::exception_ptr err_;
};

void add_row(const tracked_vector<Distance>& dist, std::uint64_t penalty, std::span<std::uint64_t> sums) {
    for (std::size_t v = 0; v < dist.size(); ++v)
        sums[v] += dist[v].finite() ? dist[v].value() : penalty;
}

}  // namespace

// ---------------------------------------------------------------- serial

namespace serial {

void sort_triplets(std::span<EdgeTriplet> data) { std::sort(data.begin(), data.end(), TripletLess{}); }

void node_scores(const AdjacencyGraph& g, std::span<std::uint64_t> scores) {
    for (NodeId v = 0; v < g.node_count(); ++v)
        scores[v] = g.alive(v) ? node_score(g, v) : 0;
}

std::vector<SsdResult> batch_ssd(const IndexBundle& b, const CoreGraph& core, std::span<const NodeId> sources,
                                 bool predecessors) {
    std::vector<SsdResult> out;
    out.reserve(sources.size());
    for (NodeId s : sources)
        out.push_back(ssd_query(b, core, s, QueryOptions{predecessors, nullptr, nullptr}));
    return out;
}

void closeness_sums(const IndexBundle& b, const CoreGraph& core, std::span<const NodeId> sources,
                    std::uint64_t penalty, std::span<std::uint64_t> sums) {
    for (NodeId s : sources)
        add_row(ssd_query(b, core, s).distances, penalty, sums);
}

std::vector<std::vector<Distance>> all_sources(const AdjacencyGraph& g, std::span<const NodeId> sources) {
    std::vector<std::vector<Distance>> rows;
    rows.reserve(sources.size());
    for (NodeId s : sources)
        rows.push_back(dijkstra_oracle(g, s).dist);
    return rows;
}

}  // namespace serial

// ---------------------------------------------------------------- OpenMP

namespace omp {

void sort_triplets(std::span<EdgeTriplet> data) {
    const std::size_t n = data.size();
    const int threads = omp_get_max_threads();
    if (threads <= 1 || n < (1u << 15)) {
        std::sort(data.begin(), data.end(), TripletLess{});
        return;
    }
    // Sort equal chunks in parallel, then merge pairs of neighbouring chunks.
    std::vector<std::size_t> bounds(threads + 1);
    for (int i = 0; i <= threads; ++i)
        bounds[i] = n * i / threads;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < threads; ++i)
        std::sort(data.begin() + bounds[i], data.begin() + bounds[i + 1], TripletLess{});
    for (std::size_t width = 1; width < bounds.size() - 1; width *= 2) {
        const long pairs = static_cast<long>((bounds.size() - 1 + 2 * width - 1) / (2 * width));
#pragma omp parallel for schedule(static)
        for (long p = 0; p < pairs; ++p) {
            std::size_t lo = p * 2 * width;
            std::size_t mid = std::min(lo + width, bounds.size() - 1);
            std::size_t hi = std::min(lo + 2 * width, bounds.size() - 1);
            if (mid < hi)
                std::inplace_merge(data.begin() + bounds[lo], data.begin() + bounds[mid], data.begin() + bounds[hi],
                                   TripletLess{});
        }
    }
}

void node_scores(const AdjacencyGraph& g, std::span<std::uint64_t> scores) {
    const long n = g.node_count();
#pragma omp parallel for schedule(dynamic, 1024)
    for (long v = 0; v < n; ++v)
        scores[v] = g.alive(static_cast<NodeId>(v)) ? node_score(g, static_cast<NodeId>(v)) : 0;
}

std::vector<SsdResult> batch_ssd(const IndexBundle& b, const CoreGraph& core, std::span<const NodeId> sources,
                                 bool predecessors) {
    std::vector<SsdResult> out(sources.size());
    ErrorSlot err;
    const long k = static_cast<long>(sources.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < k; ++i)
        err.run([&] { out[i] = ssd_query(b, core, sources[i], QueryOptions{predecessors, nullptr, nullptr}); });
    err.rethrow();
    return out;
}

void closeness_sums(const IndexBundle& b, const CoreGraph& core, std::span<const NodeId> sources,
                    std::uint64_t penalty, std::span<std::uint64_t> sums) {
    ErrorSlot err;
    const long k = static_cast<long>(sources.size());
    std::mutex mu;
#pragma omp parallel
    {
        std::vector<std::uint64_t> local(sums.size(), 0);
#pragma omp for schedule(dynamic, 1)
        for (long i = 0; i < k; ++i)
            err.run([&] { add_row(ssd_query(b, core, sources[i]).distances, penalty, local); });
        // Integer addition is associative, so the reduction order does not
        // affect the result.
        std::lock_guard lock(mu);
        for (std::size_t v = 0; v < sums.size(); ++v)
            sums[v] += local[v];
    }
    err.rethrow();
}

std::vector<std::vector<Distance>> all_sources(const AdjacencyGraph& g, std::span<const NodeId> sources) {
    std::vector<std::vector<Distance>> rows(sources.size());
    const long k = static_cast<long>(sources.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < k; ++i)
        rows[i] = dijkstra_oracle(g, sources[i]).dist;
    return rows;
}

}  // namespace omp

}  // namespace hod::kernels
