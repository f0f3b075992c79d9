#include "hod/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <sstream>

#include "hod/kernels.hpp"
#include "hod/query.hpp"

namespace hod {

OracleResult dijkstra_oracle(const AdjacencyGraph& g, NodeId s, bool all_edges) {
    if (s >= g.node_count())
        throw UnknownNode(s);
    OracleResult r;
    r.source = s;
    r.dist.assign(g.node_count(), Distance::unreachable());
    r.pred.assign(g.node_count(), kNoNode);
    using Item = std::pair<std::uint64_t, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    r.dist[s] = Distance::zero();
    pq.push({0, s});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d != r.dist[u].value())
            continue;
        for (const auto& e : g.out(u)) {
            if (!all_edges && e.kind != EdgeKind::original)
                continue;
            Distance nd = Distance(d) + e.length;
            if (nd < r.dist[e.b]) {
                r.dist[e.b] = nd;
                r.pred[e.b] = u;
                pq.push({nd.value(), e.b});
            }
        }
    }
    return r;
}

std::optional<std::uint64_t> pred_path_length(const AdjacencyGraph& g, const std::vector<NodeId>& pred, NodeId source,
                                              NodeId v) {
    std::uint64_t total = 0;
    NodeId x = v;
    for (NodeId steps = 0; x != source; ++steps) {
        if (steps > g.node_count())
            return std::nullopt;
        NodeId p = pred[x];
        if (p == kNoNode || p >= g.node_count())
            return std::nullopt;
        auto out = g.out(p);
        auto it = std::lower_bound(out.begin(), out.end(), x, [](const EdgeTriplet& t, NodeId b) { return t.b < b; });
        if (it == out.end() || it->b != x || it->kind != EdgeKind::original)
            return std::nullopt;
        total += it->length;
        x = p;
    }
    return total;
}

// ---------------------------------------------------------------- verification

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed(); });
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json j;
    j["passed"] = passed();
    auto arr = nlohmann::json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"passed", c.passed()},
                       {"checked", c.checked},
                       {"violations", c.violations},
                       {"samples", c.samples}});
    j["checks"] = std::move(arr);
    return j;
}

namespace {

struct Shortcut {
    NodeId u, w;
    std::uint64_t length;
};

void note(VerifyCheck& c, const std::string& msg) {
    ++c.violations;
    if (c.samples.size() < 5)
        c.samples.push_back(msg);
}

std::string edge_str(NodeId u, NodeId w, std::uint64_t l) {
    std::ostringstream os;
    os << '<' << u << ',' << w << ',' << l << '>';
    return os.str();
}

}  // namespace

VerifyReport verify_bundle(const AdjacencyGraph& g, const IndexBundle& b, std::uint64_t sample_sources,
                           std::uint64_t seed) {
    VerifyReport report;

    VerifyCheck shape{"graph_matches_index"};
    shape.checked = 1;
    if (g.node_count() != b.node_count())
        note(shape, "graph has " + std::to_string(g.node_count()) + " nodes, index has " +
                        std::to_string(b.node_count()));
    report.checks.push_back(shape);
    if (!shape.passed())
        return report;

    VerifyCheck structure{"structure"};
    structure.checked = 1;
    for (const auto& msg : b.validate())
        note(structure, msg);
    report.checks.push_back(structure);

    // Gather every stored shortcut and the archived lists of removed nodes.
    std::vector<Shortcut> shortcuts;
    std::vector<std::vector<std::pair<NodeId, std::uint64_t>>> arch_out(g.node_count()), arch_in(g.node_count());
    b.for_each_forward_block([&](const AdjBlock& blk) {
        for (const auto& e : blk.edges) {
            arch_out[blk.node].push_back({e.other, e.length});
            if (e.kind != EdgeKind::original)
                shortcuts.push_back({blk.node, e.other, e.length});
        }
    });
    b.for_each_backward_block([&](const AdjBlock& blk) {
        for (const auto& e : blk.edges) {
            arch_in[blk.node].push_back({e.other, e.length});
            if (e.kind != EdgeKind::original)
                shortcuts.push_back({e.other, blk.node, e.length});
        }
    });
    CoreGraph core = b.load_core();
    for (std::uint32_t i = 0; i < core.size(); ++i)
        for (const auto& e : core.out(i))
            if (e.kind != EdgeKind::original)
                shortcuts.push_back({core.node(i), e.other, e.length});
    for (auto& list : arch_out)
        std::sort(list.begin(), list.end());

    // Which removed nodes have u as an in-neighbour, and at what length.
    std::vector<std::vector<std::pair<NodeId, std::uint64_t>>> via(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (auto [u, l] : arch_in[v])
            via[u].push_back({v, l});

    VerifyCheck provenance{"shortcut_provenance"};
    VerifyCheck soundness{"shortcut_soundness"};
    std::sort(shortcuts.begin(), shortcuts.end(),
              [](const Shortcut& x, const Shortcut& y) { return std::tie(x.u, x.w) < std::tie(y.u, y.w); });
    NodeId current = kNoNode;
    OracleResult from_u;
    for (const auto& sc : shortcuts) {
        ++provenance.checked;
        ++soundness.checked;
        bool found = false;
        for (auto [v, l1] : via[sc.u]) {
            if (l1 >= sc.length)
                continue;
            const auto& outs = arch_out[v];
            auto it = std::lower_bound(outs.begin(), outs.end(), std::pair<NodeId, std::uint64_t>{sc.w, 0});
            if (it != outs.end() && it->first == sc.w && l1 + it->second == sc.length) {
                found = true;
                break;
            }
        }
        if (!found)
            note(provenance, edge_str(sc.u, sc.w, sc.length) + " matches no archived two-hop path");
        if (sc.u != current) {
            from_u = dijkstra_oracle(g, sc.u);
            current = sc.u;
        }
        if (from_u.dist[sc.w] > Distance(sc.length))
            note(soundness, edge_str(sc.u, sc.w, sc.length) + " is shorter than the true distance");
    }
    report.checks.push_back(provenance);
    report.checks.push_back(soundness);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<NodeId> pick(0, g.node_count() - 1);

    VerifyCheck ssd{"ssd_vs_oracle"};
    VerifyCheck sssp{"sssp_paths"};
    for (std::uint64_t i = 0; i < sample_sources; ++i) {
        NodeId s = pick(rng);
        auto want = dijkstra_oracle(g, s);
        auto got = sssp_query(b, core, s);
        ++ssd.checked;
        ++sssp.checked;
        for (NodeId v = 0; v < g.node_count(); ++v) {
            if (got.distances[v] != want.dist[v]) {
                std::ostringstream os;
                os << "dist(" << s << ',' << v << ") = " << got.distances[v] << ", oracle " << want.dist[v];
                note(ssd, os.str());
            } else if (v != s && want.dist[v].finite()) {
                std::vector<NodeId> pred(got.predecessors.begin(), got.predecessors.end());
                auto len = pred_path_length(g, pred, s, v);
                if (!len || *len != want.dist[v].value())
                    note(sssp, "predecessor path from " + std::to_string(s) + " to " + std::to_string(v) +
                                   " is broken or has the wrong length");
            }
        }
    }
    report.checks.push_back(ssd);
    report.checks.push_back(sssp);

    VerifyCheck ppd{"ppd_vs_oracle"};
    for (std::uint64_t i = 0; i < sample_sources; ++i) {
        NodeId s = pick(rng), t = pick(rng);
        auto want = dijkstra_oracle(g, s).dist[t];
        auto got = ppd_query(b, core, s, t);
        ++ppd.checked;
        if (got != want) {
            std::ostringstream os;
            os << "ppd(" << s << ',' << t << ") = " << got << ", oracle " << want;
            note(ppd, os.str());
        }
    }
    report.checks.push_back(ppd);
    return report;
}

// ---------------------------------------------------------------- closeness

namespace {

std::vector<NodeId> all_nodes(NodeId n) {
    std::vector<NodeId> v(n);
    for (NodeId i = 0; i < n; ++i)
        v[i] = i;
    return v;
}

std::vector<std::vector<Distance>> oracle_rows(const AdjacencyGraph& g, bool parallel) {
    if (g.node_count() > kExactClosenessLimit)
        throw PreconditionError("exact closeness is limited to " + std::to_string(kExactClosenessLimit) + " nodes");
    auto sources = all_nodes(g.node_count());
    return parallel ? kernels::omp::all_sources(g, sources) : kernels::serial::all_sources(g, sources);
}

}  // namespace

std::vector<double> exact_closeness(const AdjacencyGraph& g, bool parallel) {
    auto rows = oracle_rows(g, parallel);
    const NodeId n = g.node_count();
    std::vector<double> out(n, 0.0);
    for (NodeId v = 0; v < n; ++v) {
        std::uint64_t sum = 0;
        for (NodeId u = 0; u < n; ++u)
            if (u != v && rows[u][v].finite())
                sum += rows[u][v].value();
        out[v] = sum == 0 ? 0.0 : double(n - 1) / double(sum);
    }
    return out;
}

std::vector<double> exact_average_distance(const AdjacencyGraph& g, std::uint64_t penalty, bool parallel) {
    auto rows = oracle_rows(g, parallel);
    const NodeId n = g.node_count();
    std::vector<double> out(n, 0.0);
    if (n < 2)
        return out;
    for (NodeId v = 0; v < n; ++v) {
        std::uint64_t sum = 0;
        for (NodeId u = 0; u < n; ++u)
            if (u != v)
                sum += rows[u][v].finite() ? rows[u][v].value() : penalty;
        out[v] = double(sum) / double(n - 1);
    }
    return out;
}

std::uint64_t closeness_sample_count(std::uint64_t n, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw PreconditionError("epsilon must lie in (0, 1]");
    if (n < 2)
        return 1;
    double k = std::ceil(std::log(double(n)) / (epsilon * epsilon));
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(k));
}

ClosenessResult approx_closeness(const IndexBundle& b, const ClosenessOptions& opts) {
    if (!(opts.epsilon > 0.0 && opts.epsilon < 1.0))
        throw PreconditionError("epsilon must lie in (0, 1)");
    const NodeId n = b.node_count();
    ClosenessResult r;
    r.k = closeness_sample_count(n, opts.epsilon);
    r.penalty = opts.penalty ? opts.penalty : std::max<std::uint64_t>(1, b.max_edge_length()) * n;

    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    r.sources.reserve(r.k);
    for (std::uint64_t i = 0; i < r.k; ++i)
        r.sources.push_back(pick(rng));

    CoreGraph core = b.load_core();
    std::vector<std::uint64_t> sums(n, 0);
    if (opts.parallel)
        kernels::omp::closeness_sums(b, core, r.sources, r.penalty, sums);
    else
        kernels::serial::closeness_sums(b, core, r.sources, r.penalty, sums);
    r.queries = r.sources.size();

    r.average_distance.assign(n, 0.0);
    r.closeness.assign(n, 0.0);
    if (n < 2)
        return r;
    const double scale = double(n) / (double(r.k) * double(n - 1));
    for (NodeId v = 0; v < n; ++v) {
        r.average_distance[v] = scale * double(sums[v]);
        r.closeness[v] = r.average_distance[v] > 0 ? 1.0 / r.average_distance[v] : 0.0;
    }
    return r;
}

}  // namespace hod
