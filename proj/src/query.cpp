#include "hod/query.hpp"

#include <atomic>
#include <functional>
#include <queue>

#include "hod/indexed_heap.hpp"

namespace hod {

void SearchState::init_forward(NodeId n, NodeId s, bool with_pred) {
    kf.assign(n, Distance::unreachable());
    kf[s] = Distance::zero();
    if (with_pred)
        pred.assign(n, kNoNode);
    else
        pred.clear();
}

void SearchState::init_backward(NodeId n, NodeId t) {
    kb.assign(n, Distance::unreachable());
    kb[t] = Distance::zero();
}

namespace {

void check_node(const IndexBundle& b, NodeId v) {
    if (v >= b.node_count())
        throw UnknownNode(v);
}

using ThetaQueue = std::priority_queue<std::uint32_t, tracked_vector<std::uint32_t>, std::greater<>>;

std::atomic<std::uint64_t> g_ssd_answered{0};

}  // namespace

// ---------------------------------------------------------------- SSD phases

void forward_search(const IndexBundle& b, NodeId s, SearchState& st, QueryStats* stats) {
    check_node(b, s);
    if (b.is_core(s))
        return;
    const bool with_pred = !st.pred.empty();
    ForwardCursor cursor(b, stats ? &stats->forward : nullptr);
    ThetaQueue q;
    std::uint64_t ops = 0;
    q.push(b.theta(s));
    ++ops;
    // A non-core node is queued when its κ_f first becomes finite. Every
    // edge climbs in rank, so all its in-edges from the forward file are
    // relaxed before its θ reaches the top.
    while (!q.empty()) {
        std::uint32_t theta = q.top();
        q.pop();
        ++ops;
        NodeId u = b.forward_node(theta);
        AdjBlock blk = cursor.at(theta);
        if (stats)
            ++stats->forward_visited;
        for (const auto& e : blk.edges) {
            Distance nd = st.kf[u] + e.length;
            if (nd < st.kf[e.other]) {
                bool first = !st.kf[e.other].finite();
                st.kf[e.other] = nd;
                if (with_pred)
                    st.pred[e.other] = e.pred_hint;
                if (first && !b.is_core(e.other)) {
                    q.push(b.theta(e.other));
                    ++ops;
                }
            }
        }
    }
    if (stats)
        stats->forward_pq_ops += ops;
}

void core_search_ssd(const CoreGraph& core, SearchState& st, QueryStats* stats) {
    const bool with_pred = !st.pred.empty();
    const auto c = static_cast<std::uint32_t>(core.size());
    IndexedHeap<Distance> q(c);
    tracked_vector<std::uint8_t> done(c, 0);
    for (std::uint32_t i = 0; i < c; ++i)
        if (st.kf[core.node(i)].finite())
            q.push(i, st.kf[core.node(i)]);
    std::uint64_t settled = 0;
    while (!q.empty()) {
        std::uint32_t i = q.pop();
        done[i] = 1;
        ++settled;
        Distance du = st.kf[core.node(i)];
        for (const auto& e : core.out(i)) {
            Distance nd = du + e.length;
            if (nd < st.kf[e.other]) {
                st.kf[e.other] = nd;
                if (with_pred)
                    st.pred[e.other] = e.pred_hint;
                if (q.contains(e.other_local))
                    q.decrease(e.other_local, nd);
                else if (!done[e.other_local])
                    q.push(e.other_local, nd);
                else
                    throw InternalError("settled core node improved");
            }
        }
    }
    if (stats) {
        stats->core_pq_ops += q.ops();
        stats->core_settled += settled;
    }
}

void backward_scan_ssd(const IndexBundle& b, SearchState& st, QueryStats* stats) {
    const bool with_pred = !st.pred.empty();
    BackwardScanner scan(b, stats ? &stats->backward : nullptr);
    AdjBlock blk;
    while (scan.next(blk)) {
        NodeId v = blk.node;
        if (stats)
            ++stats->backward_visited;
        for (const auto& e : blk.edges) {
            if (!st.kf[e.other].finite())
                continue;
            Distance nd = st.kf[e.other] + e.length;
            if (nd < st.kf[v]) {
                st.kf[v] = nd;
                if (with_pred)
                    st.pred[v] = e.pred_hint;
            }
        }
    }
}

std::uint64_t ssd_queries_answered() { return g_ssd_answered.load(std::memory_order_relaxed); }

SsdResult ssd_query(const IndexBundle& b, const CoreGraph& core, NodeId s, const QueryOptions& opts) {
    check_node(b, s);
    SearchState st;
    st.init_forward(b.node_count(), s, opts.predecessors);
    forward_search(b, s, st, opts.stats);
    core_search_ssd(core, st, opts.stats);
    backward_scan_ssd(b, st, opts.stats);
    g_ssd_answered.fetch_add(1, std::memory_order_relaxed);
    SsdResult r;
    r.source = s;
    r.distances = std::move(st.kf);
    r.predecessors = std::move(st.pred);
    return r;
}

SsdResult ssd_query(const IndexBundle& b, NodeId s, const QueryOptions& opts) {
    check_node(b, s);
    CoreGraph core = b.load_core(opts.stats ? &opts.stats->core : nullptr);
    return ssd_query(b, core, s, opts);
}

SsdResult sssp_query(const IndexBundle& b, NodeId s, QueryStats* stats) {
    return ssd_query(b, s, QueryOptions{true, stats, nullptr});
}

SsdResult sssp_query(const IndexBundle& b, const CoreGraph& core, NodeId s, QueryStats* stats) {
    return ssd_query(b, core, s, QueryOptions{true, stats, nullptr});
}

// ---------------------------------------------------------------- PPD phases

void ppd_forward(const IndexBundle& b, NodeId s, SearchState& st, QueryStats* stats) {
    forward_search(b, s, st, stats);
}

void ppd_backward(const IndexBundle& b, NodeId t, SearchState& st, QueryStats* stats) {
    check_node(b, t);
    if (b.is_core(t))
        return;
    BackwardRankCursor cursor(b, stats ? &stats->backward : nullptr);
    ThetaQueue q;
    std::uint64_t ops = 0;
    q.push(b.theta(t));
    ++ops;
    while (!q.empty()) {
        std::uint32_t theta = q.top();
        q.pop();
        ++ops;
        NodeId v = b.forward_node(theta);
        AdjBlock blk = cursor.at(theta);
        if (stats)
            ++stats->backward_visited;
        for (const auto& e : blk.edges) {
            Distance nd = st.kb[v] + e.length;
            if (nd < st.kb[e.other]) {
                bool first = !st.kb[e.other].finite();
                st.kb[e.other] = nd;
                if (first && !b.is_core(e.other)) {
                    q.push(b.theta(e.other));
                    ++ops;
                }
            }
        }
    }
    if (stats)
        stats->backward_pq_ops += ops;
}

Distance bidirectional_core_search(const CoreGraph& core, SearchState& st, QueryStats* stats,
                                   std::vector<Distance>* trace) {
    const auto n = static_cast<NodeId>(st.kf.size());
    Distance best = Distance::unreachable();
    for (NodeId v = 0; v < n; ++v)
        if (st.kf[v].finite() && st.kb[v].finite())
            best = std::min(best, st.kf[v] + st.kb[v]);
    if (trace)
        trace->push_back(best);

    const auto c = static_cast<std::uint32_t>(core.size());
    IndexedHeap<Distance> qf(c), qb(c);
    tracked_vector<std::uint8_t> done_f(c, 0), done_b(c, 0);
    for (std::uint32_t i = 0; i < c; ++i) {
        NodeId v = core.node(i);
        if (st.kf[v].finite())
            qf.push(i, st.kf[v]);
        if (st.kb[v].finite())
            qb.push(i, st.kb[v]);
    }

    // d̄ is also tightened when a relaxation reaches a node the other side
    // has labelled; updating only on extraction can miss the meeting edge.
    auto relax = [&best](IndexedHeap<Distance>& q, tracked_vector<std::uint8_t>& done, tracked_vector<Distance>& kappa,
                         const tracked_vector<Distance>& other, Distance du, std::span<const CoreEdge> edges) {
        for (const auto& e : edges) {
            Distance nd = du + e.length;
            if (nd < kappa[e.other]) {
                kappa[e.other] = nd;
                if (other[e.other].finite())
                    best = std::min(best, nd + other[e.other]);
                if (q.contains(e.other_local))
                    q.decrease(e.other_local, nd);
                else if (!done[e.other_local])
                    q.push(e.other_local, nd);
            }
        }
    };

    bool forward_turn = true;
    std::uint64_t settled = 0;
    while (!qf.empty() || !qb.empty()) {
        // An exhausted side contributes a zero lower bound.
        Distance top_f = qf.empty() ? Distance::zero() : qf.top_key();
        Distance top_b = qb.empty() ? Distance::zero() : qb.top_key();
        if (best.finite() && best <= top_f + top_b)
            break;
        bool use_f = qb.empty() || (forward_turn && !qf.empty());
        ++settled;
        if (use_f) {
            std::uint32_t i = qf.pop();
            done_f[i] = 1;
            NodeId u = core.node(i);
            if (st.kb[u].finite())
                best = std::min(best, st.kf[u] + st.kb[u]);
            relax(qf, done_f, st.kf, st.kb, st.kf[u], core.out(i));
        } else {
            std::uint32_t i = qb.pop();
            done_b[i] = 1;
            NodeId u = core.node(i);
            if (st.kf[u].finite())
                best = std::min(best, st.kf[u] + st.kb[u]);
            relax(qb, done_b, st.kb, st.kf, st.kb[u], core.in(i));
        }
        if (trace)
            trace->push_back(best);
        forward_turn = !forward_turn;
    }
    st.best = best;
    if (stats) {
        stats->core_pq_ops += qf.ops() + qb.ops();
        stats->core_settled += settled;
    }
    return best;
}

Distance ppd_query(const IndexBundle& b, const CoreGraph& core, NodeId s, NodeId t, const QueryOptions& opts) {
    check_node(b, s);
    check_node(b, t);
    SearchState st;
    st.init_forward(b.node_count(), s, false);
    st.init_backward(b.node_count(), t);
    ppd_forward(b, s, st, opts.stats);
    ppd_backward(b, t, st, opts.stats);
    return bidirectional_core_search(core, st, opts.stats, opts.best_trace);
}

Distance ppd_query(const IndexBundle& b, NodeId s, NodeId t, const QueryOptions& opts) {
    check_node(b, s);
    check_node(b, t);
    CoreGraph core = b.load_core(opts.stats ? &opts.stats->core : nullptr);
    return ppd_query(b, core, s, t, opts);
}

}  // namespace hod
