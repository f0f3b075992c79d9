#include "hod/preprocess.hpp"

#include <algorithm>
#include <random>

#include "hod/index_store.hpp"
#include "hod/kernels.hpp"

namespace hod {

void BuildConfig::validate() const {
    if (block_size == 0)
        throw PreconditionError("block size must be positive");
    if (memory_budget < block_size)
        throw PreconditionError("memory budget must be at least one block");
    if (!(min_shrink > 0.0 && min_shrink < 1.0))
        throw PreconditionError("min_shrink must lie in (0, 1)");
    if (baseline_factor < 1)
        throw PreconditionError("baseline factor must be at least 1");
    if (median_sample_size < 1)
        throw PreconditionError("median sample size must be at least 1");
}

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t iteration, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), iteration, stream};
    return std::mt19937_64(seq);
}

std::uint64_t checked_sum(std::uint64_t x, std::uint64_t y) { return (Distance(x) + Distance(y)).value(); }

std::vector<std::uint8_t> member_flags(const AdjacencyGraph& g, const RemovalSet& r) {
    std::vector<std::uint8_t> f(g.node_count(), 0);
    for (NodeId v : r.members)
        f[v] = 1;
    return f;
}

std::vector<std::uint64_t> all_scores(const AdjacencyGraph& g, bool parallel) {
    std::vector<std::uint64_t> s(g.node_count(), 0);
    if (parallel)
        kernels::omp::node_scores(g, s);
    else
        kernels::serial::node_scores(g, s);
    return s;
}

}  // namespace

// ---------------------------------------------------------------- scores

std::uint64_t node_score(std::span<const NodeId> in_nb, std::span<const NodeId> out_nb) {
    std::uint64_t common = 0;
    std::size_t i = 0, j = 0;
    while (i < in_nb.size() && j < out_nb.size()) {
        if (in_nb[i] < out_nb[j])
            ++i;
        else if (out_nb[j] < in_nb[i])
            ++j;
        else
            ++common, ++i, ++j;
    }
    std::uint64_t in = in_nb.size(), out = out_nb.size();
    return in * (out - common) + out * (in - common);
}

std::uint64_t node_score(const AdjacencyGraph& g, NodeId v) {
    auto in = g.in(v);
    auto out = g.out(v);
    std::uint64_t common = 0;
    std::size_t i = 0, j = 0;
    while (i < in.size() && j < out.size()) {
        if (in[i].b < out[j].b)
            ++i;
        else if (out[j].b < in[i].b)
            ++j;
        else
            ++common, ++i, ++j;
    }
    std::uint64_t ni = in.size(), no = out.size();
    return ni * (no - common) + no * (ni - common);
}

std::uint64_t estimate_median_score(const AdjacencyGraph& g, std::uint64_t sample_size, std::uint64_t seed,
                                    bool parallel) {
    (void)parallel;
    std::vector<NodeId> alive;
    alive.reserve(g.alive_count());
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (g.alive(v))
            alive.push_back(v);
    if (alive.empty())
        throw PreconditionError("median of an empty graph");
    std::vector<NodeId> sample;
    std::size_t k = std::min<std::uint64_t>(sample_size, alive.size());
    if (k == alive.size()) {
        sample = std::move(alive);
    } else {
        std::mt19937_64 rng(seed);
        sample.reserve(k);
        std::sample(alive.begin(), alive.end(), std::back_inserter(sample), k, rng);
    }
    std::vector<std::uint64_t> scores;
    scores.reserve(sample.size());
    for (NodeId v : sample)
        scores.push_back(node_score(g, v));
    auto mid = scores.begin() + (scores.size() - 1) / 2;
    std::nth_element(scores.begin(), mid, scores.end());
    return *mid;
}

// ---------------------------------------------------------------- removal set

namespace {

void block_neighbors(const AdjacencyGraph& g, NodeId v, std::vector<std::uint8_t>& blocked) {
    for (const auto& t : g.out(v))
        blocked[t.b] = 1;
    for (const auto& t : g.in(v))
        blocked[t.b] = 1;
}

void collect_blocked(const AdjacencyGraph& g, RemovalSet& r, const std::vector<std::uint8_t>& blocked) {
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (blocked[v])
            r.blocked.push_back(v);
}

}  // namespace

RemovalSet select_removal_set(const AdjacencyGraph& g, std::uint64_t threshold, std::uint32_t iteration,
                              bool parallel) {
    auto scores = all_scores(g, parallel);
    RemovalSet r;
    r.iteration = iteration;
    std::vector<std::uint8_t> blocked(g.node_count(), 0);
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (!g.alive(v) || blocked[v] || scores[v] > threshold)
            continue;
        r.members.push_back(v);
        r.score_sum += scores[v];
        block_neighbors(g, v, blocked);
    }
    if (r.members.empty())
        throw EmptyRemoval();
    collect_blocked(g, r, blocked);
    return r;
}

RemovalSet fallback_removal_set(const AdjacencyGraph& g, std::uint32_t iteration) {
    NodeId best = kNoNode;
    std::uint64_t best_score = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (!g.alive(v))
            continue;
        auto s = node_score(g, v);
        if (best == kNoNode || s < best_score)
            best = v, best_score = s;
    }
    if (best == kNoNode)
        throw EmptyRemoval();
    return make_removal_set(g, {best}, iteration);
}

RemovalSet make_removal_set(const AdjacencyGraph& g, std::vector<NodeId> members, std::uint32_t iteration) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    RemovalSet r;
    r.iteration = iteration;
    std::vector<std::uint8_t> blocked(g.node_count(), 0);
    for (NodeId v : members) {
        if (v >= g.node_count() || !g.alive(v))
            throw PreconditionError("removal set member " + std::to_string(v) + " is not alive");
        if (blocked[v])
            throw PreconditionError("removal set members are adjacent at node " + std::to_string(v));
        block_neighbors(g, v, blocked);
        r.score_sum += node_score(g, v);
    }
    for (NodeId v : members)
        if (blocked[v])
            throw PreconditionError("removal set members are adjacent at node " + std::to_string(v));
    r.members = std::move(members);
    collect_blocked(g, r, blocked);
    return r;
}

// ---------------------------------------------------------------- emission

std::uint64_t emit_candidate_edges(const AdjacencyGraph& g, const RemovalSet& r, const TripletSink& sink) {
    std::uint64_t count = 0;
    for (NodeId v : r.members) {
        for (const auto& in : g.in(v)) {
            for (const auto& out : g.out(v)) {
                if (in.b == out.b)
                    continue;
                EdgeTriplet t{in.b, out.b, checked_sum(in.length, out.length), Sign::outgoing, EdgeKind::candidate,
                              out.pred_hint};
                sink(t);
                sink(t.mirrored());
                ++count;
            }
        }
    }
    return count;
}

BaselineCounts emit_baseline_edges(const AdjacencyGraph& g, const RemovalSet& r, std::uint64_t budget,
                                   std::uint64_t seed, const TripletSink& sink) {
    BaselineCounts counts;
    auto removed = member_flags(g, r);

    // Surviving edges: both endpoints stay.
    for (NodeId a = 0; a < g.node_count(); ++a) {
        if (!g.alive(a) || removed[a])
            continue;
        for (const auto& t : g.out(a)) {
            if (removed[t.b])
                continue;
            EdgeTriplet e = t;
            e.kind = EdgeKind::baseline;
            sink(e);
            sink(e.mirrored());
            ++counts.surviving;
        }
    }

    if (budget == 0 || g.edge_count() == 0)
        return counts;

    // Sampled two-hop witnesses. An edge is drawn uniformly through the
    // prefix sums of out-degrees, so high-degree nodes are hit more often.
    std::vector<std::uint64_t> prefix(g.node_count() + 1, 0);
    for (NodeId v = 0; v < g.node_count(); ++v)
        prefix[v + 1] = prefix[v] + g.out(v).size();
    const std::uint64_t m = prefix.back();

    std::mt19937_64 rng(seed);
    auto pick_eligible = [&](std::span<const EdgeTriplet> list) -> const EdgeTriplet* {
        std::uint64_t eligible = 0;
        for (const auto& t : list)
            eligible += removed[t.b] ? 0 : 1;
        if (eligible == 0)
            return nullptr;
        auto k = std::uniform_int_distribution<std::uint64_t>(0, eligible - 1)(rng);
        for (const auto& t : list) {
            if (removed[t.b])
                continue;
            if (k-- == 0)
                return &t;
        }
        return nullptr;
    };

    const std::uint64_t max_attempts = 4 * budget;
    std::uniform_int_distribution<std::uint64_t> edge_dist(0, m - 1);
    while (counts.two_hop < budget && counts.attempts < max_attempts) {
        ++counts.attempts;
        std::uint64_t e = edge_dist(rng);
        NodeId x = static_cast<NodeId>(std::upper_bound(prefix.begin(), prefix.end(), e) - prefix.begin() - 1);
        NodeId y = g.out(x)[e - prefix[x]].b;
        NodeId v = removed[x] ? y : x;  // members are independent, so one end survives
        const EdgeTriplet* in = pick_eligible(g.in(v));
        const EdgeTriplet* out = pick_eligible(g.out(v));
        if (!in || !out || in->b == out->b)
            continue;
        EdgeTriplet t{in->b, out->b, checked_sum(in->length, out->length), Sign::outgoing, EdgeKind::baseline,
                      out->pred_hint};
        sink(t);
        sink(t.mirrored());
        ++counts.two_hop;
    }
    return counts;
}

// ---------------------------------------------------------------- filter

namespace {

class ShortcutFilter {
public:
    void push(const EdgeTriplet& t) {
        if (has_prev_) {
            auto c = triplet_compare(prev_, t);
            if (c > 0)
                throw InternalError("filter input is not sorted");
            bool same_group = prev_.a == t.a && prev_.b == t.b && prev_.sign == t.sign;
            if (same_group) {
                prev_ = t;
                return;
            }
        }
        has_prev_ = true;
        prev_ = t;
        if (t.kind == EdgeKind::candidate)
            out_.push_back(t);
    }
    std::vector<EdgeTriplet> take() { return std::move(out_); }

private:
    EdgeTriplet prev_;
    bool has_prev_ = false;
    std::vector<EdgeTriplet> out_;
};

}  // namespace

std::vector<EdgeTriplet> filter_shortcuts(std::span<const EdgeTriplet> sorted) {
    ShortcutFilter f;
    for (const auto& t : sorted)
        f.push(t);
    return f.take();
}

std::vector<EdgeTriplet> filter_shortcuts(const TripletRun& sorted, std::size_t block_size) {
    ShortcutFilter f;
    auto r = sorted.reader(block_size);
    EdgeTriplet t;
    while (r.next(t))
        f.push(t);
    return f.take();
}

// ---------------------------------------------------------------- iteration

IterationResult reduce_iteration(AdjacencyGraph& g, const BuildConfig& cfg, RemovalSet r,
                                 const ReduceOptions& opts) {
    IterationResult res;
    auto& st = res.stats;
    st.iteration = r.iteration;
    st.edges_before = g.edge_count();

    SortConfig sc;
    sc.memory_budget = cfg.memory_budget;
    sc.block_size = cfg.block_size;
    sc.temp_dir = opts.temp_dir.empty() ? std::filesystem::temp_directory_path() : opts.temp_dir;
    sc.parallel_runs = cfg.parallel;
    ExternalSorter sorter(sc);
    TripletSink sink = [&](const EdgeTriplet& t) { sorter.push(t); };

    st.candidates_emitted = emit_candidate_edges(g, r, sink);
    const std::uint64_t budget = r.score_sum * cfg.baseline_factor;
    auto rng = stream_rng(cfg.seed, r.iteration, 2);
    auto base = emit_baseline_edges(g, r, budget, rng(), sink);
    st.baselines_emitted = base.total();

    TripletRun sorted = sorter.finish();
    st.sort = sorter.stats();
    if (opts.sorted_capture)
        *opts.sorted_capture = sorted.read_all();
    std::vector<EdgeTriplet> retained = filter_shortcuts(sorted, cfg.block_size);
    sorted = TripletRun();

    res.archived.reserve(r.members.size());
    for (NodeId v : r.members) {
        auto out = g.out(v);
        auto in = g.in(v);
        res.archived.push_back({v, {out.begin(), out.end()}, {in.begin(), in.end()}});
    }
    g.remove_nodes(r.members);
    g.merge_sorted_shortcuts(retained);

    for (const auto& t : retained)
        if (t.sign == Sign::outgoing)
            res.shortcuts.push_back(t);
    st.removed = r.members.size();
    st.shortcuts_retained = res.shortcuts.size();
    st.edges_remaining = g.edge_count();
    st.nodes_remaining = g.alive_count();
    st.bytes_remaining = g.storage_bytes();
    res.removal = std::move(r);
    return res;
}

IterationResult reduce_iteration(AdjacencyGraph& g, const BuildConfig& cfg, std::uint32_t iteration,
                                 const ReduceOptions& opts) {
    if (g.alive_count() == 0)
        throw PreconditionError("reduce_iteration on an empty graph");
    auto rng = stream_rng(cfg.seed, iteration, 1);
    auto threshold = estimate_median_score(g, cfg.median_sample_size, rng(), cfg.parallel);
    auto r = select_removal_set(g, threshold, iteration, cfg.parallel);
    auto res = reduce_iteration(g, cfg, std::move(r), opts);
    res.stats.threshold = threshold;
    return res;
}

// ---------------------------------------------------------------- build loop

nlohmann::json to_json(const IterationStats& s) {
    return {{"iteration", s.iteration},
            {"removed", s.removed},
            {"shortcuts_retained", s.shortcuts_retained},
            {"candidates_emitted", s.candidates_emitted},
            {"baselines_emitted", s.baselines_emitted},
            {"edges_remaining", s.edges_remaining}};
}

BuildReport build_index(AdjacencyGraph g, const BuildConfig& cfg, const std::filesystem::path& out_dir,
                        std::span<const std::uint64_t> original_ids, const BuildHooks& hooks) {
    cfg.validate();
    if (g.alive_count() == 0)
        throw PreconditionError("cannot build an index over an empty graph");
    if (!original_ids.empty() && original_ids.size() != g.node_count())
        throw PreconditionError("original id table does not match the node count");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError(out_dir.string(), "cannot create index directory (" + ec.message() + ")");
    const auto temp_dir = out_dir / ".sort-tmp";

    std::uint64_t max_len = 0;
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (const auto& t : g.out(v))
            max_len = std::max(max_len, t.length);

    BuildReport report;
    IndexWriter writer(out_dir, g, cfg.block_size);
    ReduceOptions opts{temp_dir, nullptr};

    auto target_met = [&] {
        if (!cfg.target_nodes && !cfg.target_edges)
            return false;
        return g.alive_count() <= cfg.target_nodes.value_or(UINT64_MAX) &&
               g.edge_count() <= cfg.target_edges.value_or(UINT64_MAX);
    };

    for (std::uint32_t iteration = 1;; ++iteration) {
        if (iteration > 1 && target_met())
            break;
        RemovalSet r;
        std::uint64_t threshold = 0;
        bool fallback = false;
        try {
            auto rng = stream_rng(cfg.seed, iteration, 1);
            threshold = estimate_median_score(g, cfg.median_sample_size, rng(), cfg.parallel);
            r = select_removal_set(g, threshold, iteration, cfg.parallel);
        } catch (const EmptyRemoval&) {
            try {
                r = fallback_removal_set(g, iteration);
                fallback = true;
            } catch (const EmptyRemoval&) {
                break;
            }
        }
        // Never empty the graph: the core keeps at least one node.
        if (r.members.size() == g.alive_count()) {
            r.members.pop_back();
            if (r.members.empty())
                break;
            r = make_removal_set(g, std::move(r.members), iteration);
        }
        if (hooks.before_removal)
            hooks.before_removal(g, r);

        auto res = reduce_iteration(g, cfg, r, opts);
        res.stats.threshold = threshold;
        res.stats.fallback = fallback;
        for (const auto& a : res.archived)
            writer.append_removed_node(a.node, iteration, a.out, a.in);
        report.shortcuts += res.stats.shortcuts_retained;
        if (hooks.on_iteration)
            hooks.on_iteration(res.stats);
        report.removals.push_back(std::move(res.removal));
        report.iterations.push_back(res.stats);

        if (target_met())
            break;
        const auto& st = report.iterations.back();
        // Negative when shortcuts outnumber the removed edges.
        double shrink = st.edges_before == 0
                            ? 0.0
                            : (double(st.edges_before) - double(st.edges_remaining)) / double(st.edges_before);
        if (g.storage_bytes() <= cfg.memory_budget && shrink < cfg.min_shrink)
            break;
    }
    std::filesystem::remove_all(temp_dir, ec);

    report.core_rank = static_cast<std::uint32_t>(report.iterations.size()) + 1;
    report.core_nodes = g.alive_count();
    report.core_edges = g.edge_count();
    if (g.storage_bytes() > cfg.memory_budget)
        throw CoreTooLarge(g.storage_bytes(), cfg.memory_budget);

    nlohmann::json build = {{"memory_budget", cfg.memory_budget},
                            {"block_size", cfg.block_size},
                            {"baseline_factor", cfg.baseline_factor},
                            {"median_sample_size", cfg.median_sample_size},
                            {"min_shrink", cfg.min_shrink},
                            {"seed", cfg.seed}};
    if (cfg.target_nodes)
        build["target_nodes"] = *cfg.target_nodes;
    if (cfg.target_edges)
        build["target_edges"] = *cfg.target_edges;
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& s : report.iterations)
        iters.push_back(to_json(s));
    build["iterations"] = std::move(iters);

    IndexWriter::FinalizeInfo info;
    info.memory_budget = cfg.memory_budget;
    info.max_edge_length = max_len;
    info.build = std::move(build);
    info.original_ids = original_ids;
    report.core_bytes = writer.finalize(g, info);
    return report;
}

}  // namespace hod
