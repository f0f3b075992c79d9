// Command-line front end: build an index, query it, verify it against the
// source graph, and estimate closeness.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hod/graph.hpp"
#include "hod/index_store.hpp"
#include "hod/kernels.hpp"
#include "hod/oracle.hpp"
#include "hod/preprocess.hpp"
#include "hod/query.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kDataError = 2, kVerifyFailed = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t parse_size(const std::string& text) {
    std::uint64_t value = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || p == text.data())
        throw UsageError("invalid size '" + text + "'");
    std::string suffix(p, text.data() + text.size());
    std::uint64_t mult = 1;
    if (suffix.empty() || suffix == "B")
        mult = 1;
    else if (suffix == "KiB")
        mult = 1ull << 10;
    else if (suffix == "MiB")
        mult = 1ull << 20;
    else if (suffix == "GiB")
        mult = 1ull << 30;
    else
        throw UsageError("unknown size suffix '" + suffix + "' (use KiB, MiB or GiB)");
    if (value > UINT64_MAX / mult)
        throw UsageError("size '" + text + "' overflows");
    return value * mult;
}

struct GraphFlags {
    bool undirected = false;
    bool unweighted = false;
    hod::LoadOptions options() const { return {!undirected, !unweighted}; }
};

void add_graph_flags(CLI::App* app, GraphFlags& f) {
    app->add_flag("--undirected", f.undirected, "Treat every input edge as two directed edges");
    app->add_flag("--unweighted", f.unweighted, "Input lines carry no weight; every edge has length 1");
}

std::string dist_str(hod::Distance d) {
    std::ostringstream os;
    os << d;
    return os.str();
}

// "s [t]" lines; blank lines and '#' comments are skipped.
std::vector<std::pair<std::uint64_t, std::optional<std::uint64_t>>> read_batch(const std::string& path, bool need_t) {
    std::ifstream in(path);
    if (!in)
        throw hod::IoError(path, "cannot open batch file");
    std::vector<std::pair<std::uint64_t, std::optional<std::uint64_t>>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a) || a[0] == '#')
            continue;
        auto num = [&](const std::string& tok) {
            std::uint64_t v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || p != tok.data() + tok.size())
                throw hod::ParseError(lineno, "invalid node id '" + tok + "'");
            return v;
        };
        std::pair<std::uint64_t, std::optional<std::uint64_t>> q{num(a), std::nullopt};
        if (ls >> b)
            q.second = num(b);
        if (ls >> extra)
            throw hod::ParseError(lineno, "expected 's [t]'");
        if (need_t && !q.second)
            throw hod::ParseError(lineno, "missing target");
        out.push_back(q);
    }
    return out;
}

int run_build(const std::string& input, const std::string& out_dir, const GraphFlags& flags, hod::BuildConfig cfg) {
    auto loaded = hod::load_edge_list_file(input, flags.options());
    if (loaded.parallel_collapsed || loaded.self_loops_dropped)
        std::cerr << "note: collapsed " << loaded.parallel_collapsed << " parallel edges, dropped "
                  << loaded.self_loops_dropped << " self-loops\n";
    hod::BuildHooks hooks;
    hooks.on_iteration = [](const hod::IterationStats& s) { std::cout << hod::to_json(s).dump() << std::endl; };
    auto report = hod::build_index(std::move(loaded.graph), cfg, out_dir, loaded.original_ids, hooks);
    std::cerr << "core: " << report.core_nodes << " nodes, " << report.core_edges << " edges, "
              << report.core_bytes << " bytes; " << report.iterations.size() << " iterations, "
              << report.shortcuts << " shortcuts\n";
    return kOk;
}

int run_single_source(const std::string& dir, std::optional<std::uint64_t> source, const std::string& batch,
                      bool with_pred) {
    auto b = hod::IndexBundle::open(dir);
    if (!batch.empty()) {
        auto queries = read_batch(batch, false);
        std::vector<hod::NodeId> sources;
        for (auto& q : queries)
            sources.push_back(b.resolve(q.first));
        auto core = b.load_core();
        constexpr std::size_t kChunk = 64;
        for (std::size_t i = 0; i < sources.size(); i += kChunk) {
            std::span<const hod::NodeId> part(sources.data() + i, std::min(kChunk, sources.size() - i));
            auto results = hod::kernels::omp::batch_ssd(b, core, part, with_pred);
            for (const auto& r : results) {
                std::cout << b.external_id(r.source);
                for (hod::NodeId v = 0; v < b.node_count(); ++v)
                    std::cout << ' ' << r.distances[v];
                std::cout << '\n';
            }
        }
        return kOk;
    }
    if (!source)
        throw UsageError("either --source or --batch is required");
    hod::NodeId s = b.resolve(*source);
    auto r = hod::ssd_query(b, s, hod::QueryOptions{with_pred, nullptr, nullptr});
    for (hod::NodeId v = 0; v < b.node_count(); ++v) {
        std::cout << b.external_id(v) << ' ' << r.distances[v];
        if (with_pred) {
            if (r.predecessors[v] == hod::kNoNode)
                std::cout << " -";
            else
                std::cout << ' ' << b.external_id(r.predecessors[v]);
        }
        std::cout << '\n';
    }
    return kOk;
}

int run_ppd(const std::string& dir, std::optional<std::uint64_t> s, std::optional<std::uint64_t> t,
            const std::string& batch) {
    auto b = hod::IndexBundle::open(dir);
    if (!batch.empty()) {
        auto queries = read_batch(batch, true);
        auto core = b.load_core();
        for (auto& q : queries) {
            auto d = hod::ppd_query(b, core, b.resolve(q.first), b.resolve(*q.second));
            std::cout << q.first << ' ' << *q.second << ' ' << d << '\n';
        }
        return kOk;
    }
    if (!s || !t)
        throw UsageError("ppd needs --source and --target, or --batch");
    std::cout << hod::ppd_query(b, b.resolve(*s), b.resolve(*t)) << '\n';
    return kOk;
}

int run_closeness(const std::string& dir, const hod::ClosenessOptions& opts) {
    auto b = hod::IndexBundle::open(dir);
    auto r = hod::approx_closeness(b, opts);
    std::cerr << "k=" << r.k << " queries=" << r.queries << " penalty=" << r.penalty << '\n';
    std::cout << "node,estimate\n";
    char buf[64];
    for (hod::NodeId v = 0; v < b.node_count(); ++v) {
        std::snprintf(buf, sizeof buf, "%.9g", r.closeness[v]);
        std::cout << b.external_id(v) << ',' << buf << '\n';
    }
    return kOk;
}

int run_verify(const std::string& input, const std::string& dir, const GraphFlags& flags, std::uint64_t sources,
               std::uint64_t seed) {
    auto loaded = hod::load_edge_list_file(input, flags.options());
    auto b = hod::IndexBundle::open(dir);
    b.verify_checksums();
    auto report = hod::verify_bundle(loaded.graph, b, sources, seed);
    std::cout << report.to_json().dump(2) << '\n';
    return report.passed() ? kOk : kVerifyFailed;
}

int run_stats(const std::string& dir) {
    auto b = hod::IndexBundle::open(dir);
    const auto& m = b.meta();
    nlohmann::json out;
    out["format_version"] = m.at("format_version");
    out["n"] = b.node_count();
    out["non_core_nodes"] = b.noncore_count();
    out["core"] = {{"nodes", b.core_node_count()}, {"edges", b.core_edge_count()}, {"rank", b.core_rank()}};
    out["block_size"] = b.block_size();
    out["memory_budget"] = b.memory_budget();
    out["files"] = {{"forward.bin", b.forward_bytes()},
                    {"backward.bin", b.backward_bytes()},
                    {"core.bin", b.core_bytes()},
                    {"meta.json", std::filesystem::file_size(b.paths().meta())}};
    out["checksums"] = {{"forward", m.at("forward").at("crc32")},
                        {"backward", m.at("backward").at("crc32")},
                        {"core", m.at("core").at("crc32")}};
    out["build"] = m.at("build");
    std::cout << out.dump(2) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disk-resident shortest-distance index"};
    app.require_subcommand(1);

    // build
    std::string input, out_dir, memory = "64MiB", block = "64KiB";
    GraphFlags gflags;
    hod::BuildConfig cfg;
    std::optional<std::uint64_t> target_nodes, target_edges;
    bool serial = false;
    auto* build = app.add_subcommand("build", "Preprocess an edge list into an index directory");
    build->add_option("-i,--input", input, "Edge list")->required();
    build->add_option("-o,--output", out_dir, "Index directory")->required();
    build->add_option("--memory", memory, "Memory budget M (bytes, or KiB/MiB/GiB)")->capture_default_str();
    build->add_option("--block", block, "Block size B")->capture_default_str();
    build->add_option("-c,--baseline-factor", cfg.baseline_factor, "Two-hop baseline budget factor")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    build->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    build->add_option("--sample-size", cfg.median_sample_size, "Nodes sampled for the median score")
        ->capture_default_str();
    build->add_option("--min-shrink", cfg.min_shrink, "Stop once an iteration shrinks the graph by less")
        ->capture_default_str();
    build->add_option("--target-nodes", target_nodes, "Stop once at most this many nodes remain");
    build->add_option("--target-edges", target_edges, "Stop once at most this many edges remain");
    build->add_flag("--serial", serial, "Use the serial kernels");
    add_graph_flags(build, gflags);

    // ssd / sssp
    std::string index_dir, batch;
    std::optional<std::uint64_t> source, target;
    auto* ssd = app.add_subcommand("ssd", "Distances from one source to every node");
    auto* sssp = app.add_subcommand("sssp", "Distances and predecessors from one source");
    for (auto* sub : {ssd, sssp}) {
        sub->add_option("-x,--index", index_dir, "Index directory")->required();
        sub->add_option("-s,--source", source, "Source node id");
        sub->add_option("--batch", batch, "File with one source per line");
    }

    // ppd
    auto* ppd = app.add_subcommand("ppd", "Distance between two nodes");
    ppd->add_option("-x,--index", index_dir, "Index directory")->required();
    ppd->add_option("-s,--source", source, "Source node id");
    ppd->add_option("-t,--target", target, "Target node id");
    ppd->add_option("--batch", batch, "File with 's t' per line");

    // closeness
    hod::ClosenessOptions copts;
    auto* closeness = app.add_subcommand("closeness", "Sampled closeness estimates for every node");
    closeness->add_option("-x,--index", index_dir, "Index directory")->required();
    closeness->add_option("--epsilon", copts.epsilon, "Additive error target")->capture_default_str();
    closeness->add_option("--seed", copts.seed, "Random seed")->capture_default_str();
    closeness->add_option("--penalty", copts.penalty, "Distance charged for unreachable samples (0 = n * max length)");

    // verify
    std::uint64_t verify_sources = 20, verify_seed = 0;
    auto* verify = app.add_subcommand("verify", "Check an index against its source graph");
    verify->add_option("-i,--input", input, "Edge list")->required();
    verify->add_option("-x,--index", index_dir, "Index directory")->required();
    verify->add_option("--sources", verify_sources, "Sampled SSD sources and PPD pairs")->capture_default_str();
    verify->add_option("--seed", verify_seed, "Random seed")->capture_default_str();
    add_graph_flags(verify, gflags);

    // stats
    auto* stats = app.add_subcommand("stats", "Print index metadata and file sizes");
    stats->add_option("-x,--index", index_dir, "Index directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        std::ios::sync_with_stdio(false);
        if (build->parsed()) {
            cfg.memory_budget = parse_size(memory);
            cfg.block_size = parse_size(block);
            cfg.target_nodes = target_nodes;
            cfg.target_edges = target_edges;
            cfg.parallel = !serial;
            try {
                cfg.validate();
            } catch (const hod::PreconditionError& e) {
                throw UsageError(e.what());
            }
            return run_build(input, out_dir, gflags, cfg);
        }
        if (ssd->parsed())
            return run_single_source(index_dir, source, batch, false);
        if (sssp->parsed())
            return run_single_source(index_dir, source, batch, true);
        if (ppd->parsed())
            return run_ppd(index_dir, source, target, batch);
        if (closeness->parsed()) {
            if (!(copts.epsilon > 0 && copts.epsilon < 1))
                throw UsageError("--epsilon must lie in (0, 1)");
            return run_closeness(index_dir, copts);
        }
        if (verify->parsed())
            return run_verify(input, index_dir, gflags, verify_sources, verify_seed);
        if (stats->parsed())
            return run_stats(index_dir);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n' << app.help();
        return kUsage;
    } catch (const hod::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}
