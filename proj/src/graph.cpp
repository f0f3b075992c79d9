#include "hod/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <tuple>

#include "hod/format.hpp"

namespace hod {

const char* to_string(EdgeKind k) {
    switch (k) {
    case EdgeKind::original: return "original";
    case EdgeKind::baseline: return "baseline";
    case EdgeKind::candidate: return "candidate";
    }
    return "?";
}

std::ostream& operator<<(std::ostream& os, const EdgeTriplet& t) {
    os << '<' << t.a << ',' << t.b << ',';
    if (t.sign == Sign::incoming)
        os << '-';
    return os << t.length << ',' << to_string(t.kind) << ",hint=" << t.pred_hint << '>';
}

namespace {

auto by_other = [](const EdgeTriplet& t, NodeId b) { return t.b < b; };

// Inserts or lowers `t` in a list sorted by b. Returns true if changed.
bool upsert_sorted(std::vector<EdgeTriplet>& list, const EdgeTriplet& t, bool* inserted) {
    auto it = std::lower_bound(list.begin(), list.end(), t.b, by_other);
    if (it != list.end() && it->b == t.b) {
        *inserted = false;
        if (t.length < it->length) {
            *it = t;
            return true;
        }
        return false;
    }
    list.insert(it, t);
    *inserted = true;
    return true;
}

// Merges same-sign shortcut triplets (sorted by b) into `list`.
void merge_into(std::vector<EdgeTriplet>& list, std::span<const EdgeTriplet> add, std::size_t* added) {
    std::vector<EdgeTriplet> merged;
    merged.reserve(list.size() + add.size());
    std::size_t i = 0, j = 0;
    while (i < list.size() || j < add.size()) {
        if (j == add.size() || (i < list.size() && list[i].b < add[j].b)) {
            merged.push_back(list[i++]);
        } else if (i == list.size() || add[j].b < list[i].b) {
            merged.push_back(add[j++]);
            ++*added;
        } else {
            if (add[j].length >= list[i].length)
                throw InternalError("shortcut is not shorter than the edge it replaces");
            merged.push_back(add[j++]);
            ++i;
        }
    }
    list.swap(merged);
}

}  // namespace

AdjacencyGraph::AdjacencyGraph(NodeId n) : out_(n), in_(n), alive_(n, 1), alive_count_(n) {}

AdjacencyGraph AdjacencyGraph::from_edges(NodeId n, std::vector<Edge> edges, std::uint64_t* parallel_collapsed,
                                          std::uint64_t* self_loops) {
    std::uint64_t loops = 0, parallel = 0;
    std::erase_if(edges, [&](const Edge& e) {
        if (e.from == e.to) {
            ++loops;
            return true;
        }
        return false;
    });
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        return std::tie(x.from, x.to, x.length) < std::tie(y.from, y.to, y.length);
    });
    // first of each (from,to) run has the minimum length
    auto last = std::unique(edges.begin(), edges.end(),
                            [](const Edge& x, const Edge& y) { return x.from == y.from && x.to == y.to; });
    parallel = static_cast<std::uint64_t>(edges.end() - last);
    edges.erase(last, edges.end());

    AdjacencyGraph g(n);
    for (const Edge& e : edges) {
        if (e.from >= n || e.to >= n)
            throw ValidationError("edge endpoint out of range");
        if (e.length == 0)
            throw ValidationError("non-positive edge length");
        EdgeTriplet t{e.from, e.to, e.length, Sign::outgoing, EdgeKind::original, e.from};
        g.out_[e.from].push_back(t);
        g.in_[e.to].push_back(t.mirrored());
    }
    // out lists are already sorted by b; in lists need sorting
    for (auto& list : g.in_)
        std::sort(list.begin(), list.end(), [](const EdgeTriplet& x, const EdgeTriplet& y) { return x.b < y.b; });
    g.edge_count_ = edges.size();
    if (parallel_collapsed)
        *parallel_collapsed = parallel;
    if (self_loops)
        *self_loops = loops;
    return g;
}

bool AdjacencyGraph::upsert_edge(NodeId u, NodeId w, std::uint64_t length, EdgeKind kind, NodeId pred_hint) {
    if (u == w || length == 0)
        throw PreconditionError("upsert_edge: self-loop or zero length");
    EdgeTriplet t{u, w, length, Sign::outgoing, kind, pred_hint};
    bool inserted = false;
    bool changed = upsert_sorted(out_[u], t, &inserted);
    bool ignored = false;
    upsert_sorted(in_[w], t.mirrored(), &ignored);
    if (inserted)
        ++edge_count_;
    return changed;
}

void AdjacencyGraph::remove_nodes(std::span<const NodeId> removed) {
    std::vector<NodeId> touched;
    for (NodeId v : removed) {
        if (!alive_[v])
            continue;
        alive_[v] = 0;
        --alive_count_;
    }
    for (NodeId v : removed) {
        edge_count_ -= out_[v].size();
        for (const auto& t : out_[v])
            touched.push_back(t.b);
        for (const auto& t : in_[v]) {
            // edges between two removed nodes were already counted via out_
            if (alive_[t.b])
                --edge_count_;
            touched.push_back(t.b);
        }
        out_[v].clear();
        out_[v].shrink_to_fit();
        in_[v].clear();
        in_[v].shrink_to_fit();
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    auto dead = [this](const EdgeTriplet& t) { return alive_[t.b] == 0; };
    for (NodeId u : touched) {
        if (!alive_[u])
            continue;
        std::erase_if(out_[u], dead);
        std::erase_if(in_[u], dead);
    }
}

void AdjacencyGraph::merge_sorted_shortcuts(std::span<const EdgeTriplet> shortcuts) {
    std::vector<EdgeTriplet> outs, ins;
    std::size_t i = 0;
    while (i < shortcuts.size()) {
        NodeId a = shortcuts[i].a;
        outs.clear();
        ins.clear();
        for (; i < shortcuts.size() && shortcuts[i].a == a; ++i) {
            if (i > 0 && shortcuts[i - 1].a == a && shortcuts[i - 1].b > shortcuts[i].b)
                throw InternalError("shortcuts are not sorted");
            (shortcuts[i].sign == Sign::outgoing ? outs : ins).push_back(shortcuts[i]);
        }
        if (!alive_[a])
            throw InternalError("shortcut touches a removed node");
        std::size_t added = 0;
        merge_into(out_[a], outs, &added);
        edge_count_ += added;
        std::size_t ignored = 0;
        merge_into(in_[a], ins, &ignored);
    }
}

std::uint64_t AdjacencyGraph::storage_bytes() const {
    return 2 * format::kBlockHeaderBytes * alive_count_ + 2 * format::kEdgeRecordBytes * edge_count_;
}

void AdjacencyGraph::set_alive_flag(NodeId v, bool flag) {
    if (alive(v) == flag)
        return;
    alive_[v] = flag ? 1 : 0;
    alive_count_ += flag ? 1 : -1;
}

void AdjacencyGraph::recount() {
    edge_count_ = 0;
    alive_count_ = 0;
    for (NodeId v = 0; v < node_count(); ++v) {
        edge_count_ += out_[v].size();
        alive_count_ += alive_[v];
    }
}

// ---------------------------------------------------------------- loading

namespace {

struct RawEdge {
    std::uint64_t u, v, w;
    std::size_t line;
};

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename Int>
Int parse_int(std::string_view tok, std::size_t line, const char* what) {
    Int v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError(line, std::string("invalid ") + what + " '" + std::string(tok) + "'");
    return v;
}

}  // namespace

LoadResult load_edge_list(std::istream& in, const LoadOptions& opts) {
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    std::uint64_t n = 0, m = 0;
    std::vector<RawEdge> raw;

    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty() || toks[0].front() == '#')
            continue;
        if (!have_header) {
            if (toks.size() != 2)
                throw ParseError(lineno, "expected header 'n m'");
            n = parse_int<std::uint64_t>(toks[0], lineno, "node count");
            m = parse_int<std::uint64_t>(toks[1], lineno, "edge count");
            if (n >= kNoNode)
                throw ParseError(lineno, "node count too large");
            have_header = true;
            raw.reserve(std::min<std::uint64_t>(m, 1u << 24));
            continue;
        }
        std::size_t want = opts.weighted ? 3 : 2;
        if (toks.size() != want)
            throw ParseError(lineno, "expected " + std::to_string(want) + " fields, got " + std::to_string(toks.size()));
        RawEdge e{parse_int<std::uint64_t>(toks[0], lineno, "node id"),
                  parse_int<std::uint64_t>(toks[1], lineno, "node id"), 1, lineno};
        if (opts.weighted) {
            auto w = parse_int<std::int64_t>(toks[2], lineno, "weight");
            if (w <= 0)
                throw ValidationError("line " + std::to_string(lineno) + ": non-positive weight " +
                                      std::to_string(w));
            e.w = static_cast<std::uint64_t>(w);
        }
        raw.push_back(e);
    }
    if (!have_header)
        throw ParseError(lineno, "missing header");
    if (raw.size() != m)
        throw ParseError(lineno, "header announces " + std::to_string(m) + " edges, found " +
                                     std::to_string(raw.size()));

    LoadResult result;
    bool needs_remap = std::any_of(raw.begin(), raw.end(), [&](const RawEdge& e) { return e.u >= n || e.v >= n; });
    std::vector<std::uint64_t> ids;
    if (needs_remap) {
        for (const auto& e : raw) {
            ids.push_back(e.u);
            ids.push_back(e.v);
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        std::uint64_t next = ids.back() + 1;
        while (ids.size() < n)
            ids.push_back(next++);
        if (ids.size() >= kNoNode)
            throw ValidationError("too many distinct node ids");
        n = ids.size();
        result.original_ids = ids;
    }
    auto dense = [&](std::uint64_t id) -> NodeId {
        if (!needs_remap)
            return static_cast<NodeId>(id);
        return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };

    std::vector<AdjacencyGraph::Edge> edges;
    edges.reserve(raw.size() * (opts.directed ? 1 : 2));
    for (const auto& e : raw) {
        edges.push_back({dense(e.u), dense(e.v), e.w});
        if (!opts.directed)
            edges.push_back({dense(e.v), dense(e.u), e.w});
    }
    std::uint64_t parallel = 0;
    result.graph = AdjacencyGraph::from_edges(static_cast<NodeId>(n), std::move(edges), &parallel,
                                              &result.self_loops_dropped);
    if (!opts.directed) {
        // each undirected self-loop was materialized twice
        result.self_loops_dropped /= 2;
    }
    result.parallel_collapsed = parallel;
    return result;
}

LoadResult load_edge_list_file(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in)
        throw IoError(path, "cannot open edge list");
    return load_edge_list(in, opts);
}

void write_edge_list(const AdjacencyGraph& g, std::ostream& out) {
    std::size_t m = 0;
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (const auto& t : g.out(v))
            m += t.kind == EdgeKind::original;
    out << g.node_count() << ' ' << m << '\n';
    for (NodeId v = 0; v < g.node_count(); ++v)
        for (const auto& t : g.out(v))
            if (t.kind == EdgeKind::original)
                out << t.a << ' ' << t.b << ' ' << t.length << '\n';
}

// ---------------------------------------------------------------- validation

std::vector<Violation> validate_graph(const AdjacencyGraph& g) {
    std::vector<Violation> report;
    auto add = [&](std::string msg, NodeId x, NodeId y) { report.push_back({std::move(msg), x, y}); };
    auto tag = [](NodeId x, NodeId y) { return " (" + std::to_string(x) + ", " + std::to_string(y) + ")"; };
    const NodeId n = g.node_count();

    std::size_t alive = 0, edges = 0;
    for (NodeId v = 0; v < n; ++v) {
        alive += g.alive(v);
        edges += g.out(v).size();
        if (!g.alive(v)) {
            if (!g.out(v).empty() || !g.in(v).empty())
                add("removed node still has edges" + tag(v, v), v, v);
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            auto list = pass == 0 ? g.out(v) : g.in(v);
            Sign want = pass == 0 ? Sign::outgoing : Sign::incoming;
            for (std::size_t i = 0; i < list.size(); ++i) {
                const EdgeTriplet& t = list[i];
                if (t.a != v || t.sign != want)
                    add("triplet stored under the wrong node or sign" + tag(v, t.b), v, t.b);
                if (i > 0 && list[i - 1].b >= t.b)
                    add("adjacency list not strictly sorted" + tag(v, t.b), v, t.b);
                if (t.length == 0)
                    add("zero-length edge" + tag(v, t.b), v, t.b);
                if (t.b >= n) {
                    add("endpoint out of range" + tag(v, t.b), v, t.b);
                    continue;
                }
                if (t.b == v)
                    add("self-loop" + tag(v, v), v, v);
                if (!g.alive(t.b)) {
                    add("edge touches removed node" + tag(v, t.b), v, t.b);
                    continue;
                }
                auto mirror_list = pass == 0 ? g.in(t.b) : g.out(t.b);
                auto it = std::lower_bound(mirror_list.begin(), mirror_list.end(), v, by_other);
                if (it == mirror_list.end() || it->b != v) {
                    add("edge has no mirrored triplet" + tag(v, t.b), v, t.b);
                } else if (pass == 0 &&
                           (it->length != t.length || it->pred_hint != t.pred_hint || it->kind != t.kind)) {
                    add("outgoing and incoming triplets disagree" + tag(v, t.b), v, t.b);
                }
            }
        }
    }
    if (alive != g.alive_count())
        add("alive count out of date", kNoNode, kNoNode);
    if (edges != g.edge_count())
        add("edge count out of date", kNoNode, kNoNode);
    return report;
}

}  // namespace hod
