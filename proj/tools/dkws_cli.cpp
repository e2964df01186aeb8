// dkws: index, partition, query, bench and oracle front end.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dkws/bench.hpp"
#include "dkws/oracle.hpp"
#include "dkws/partition.hpp"
#include "dkws/runtime.hpp"
#include "dkws/sketch.hpp"

using namespace dkws;

namespace {

// DKWS_LOG = off | error | info | debug (default error)
enum class Level { Off, Error, Info, Debug };

Level log_level() {
    static const Level lvl = [] {
        const char* e = std::getenv("DKWS_LOG");
        if (!e) return Level::Error;
        std::string s(e);
        if (s == "off" || s == "0") return Level::Off;
        if (s == "info" || s == "2") return Level::Info;
        if (s == "debug" || s == "trace" || s == "3") return Level::Debug;
        return Level::Error;
    }();
    return lvl;
}

template <class... A>
void log(Level l, const A&... parts) {
    if (l > log_level() || log_level() == Level::Off) return;
    static const char* tag[] = {"", "error", "info", "debug"};
    std::ostringstream ss;
    ss << "[dkws " << tag[static_cast<int>(l)] << "] ";
    (ss << ... << parts);
    std::cerr << ss.str() << '\n';
}

struct GraphArgs {
    std::string edges, labels;
    std::size_t vertices = 0;
    std::string gen;  // er | pa
    std::size_t n = 1000;
    std::uint64_t gen_seed = 1;
};

void add_graph_options(CLI::App* c, GraphArgs& a) {
    c->add_option("--edges", a.edges, "edge file (u v w per line)");
    c->add_option("--labels", a.labels, "label file (u kw1 kw2 ...)");
    c->add_option("--vertices", a.vertices, "declared vertex count");
    c->add_option("--gen", a.gen, "generate a graph instead: er or pa")->check(CLI::IsMember({"er", "pa"}));
    c->add_option("--n", a.n, "generated vertex count");
    c->add_option("--gen-seed", a.gen_seed, "generator seed");
}

Graph load(const GraphArgs& a) {
    if (!a.gen.empty()) {
        GenParams p;
        p.model = a.gen == "pa" ? GraphModel::PrefAttach : GraphModel::ErdosRenyi;
        p.n = a.n;
        p.seed = a.gen_seed;
        log(Level::Info, "generating ", a.gen, " graph n=", a.n, " seed=", a.gen_seed);
        return generate_graph(p);
    }
    if (a.edges.empty()) throw CLI::ValidationError("--edges", "an edge file or --gen is required");
    std::optional<std::size_t> n;
    if (a.vertices) n = a.vertices;
    Graph g = load_graph_files(a.edges, a.labels, n);
    log(Level::Info, "loaded ", g.vertex_count, " vertices, ", g.edge_count(), " edges, ", g.keyword_count(),
        " keywords");
    return g;
}

struct RunArgs {
    int workers = 8;
    std::string variant = "pine";
    int np_threshold = 2;
    bool deterministic = false;
    std::uint64_t seed = 0;
    std::string opt_backtrack, opt_bpads, opt_order;
    std::size_t k_param = 4;
    std::string partition;  // METIS-style file
    std::uint64_t partition_seed = 1;
    std::string sketches;
};

void add_run_options(CLI::App* c, RunArgs& a, bool with_variant = true) {
    c->add_option("--workers", a.workers, "number of workers (fragments)")->check(CLI::PositiveNumber);
    if (with_variant)
        c->add_option("--variant", a.variant, "baseline, bf, pads, np or pine")
            ->check(CLI::IsMember({"baseline", "bf", "pads", "np", "pine"}));
    c->add_option("--np-threshold", a.np_threshold, "counter gap that triggers a push");
    c->add_flag("--deterministic", a.deterministic, "bounds exchanged only at barriers, fixed worker order");
    c->add_option("--seed", a.seed, "worker order seed");
    auto onoff = CLI::IsMember({"on", "off"});
    c->add_option("--opt-backtrack", a.opt_backtrack, "on|off")->check(onoff);
    c->add_option("--opt-bpads", a.opt_bpads, "on|off")->check(onoff);
    c->add_option("--opt-order", a.opt_order, "on|off")->check(onoff);
    c->add_option("--k-param", a.k_param, "sketch size parameter")->check(CLI::PositiveNumber);
    c->add_option("--partition", a.partition, "partition file, one part id per line");
    c->add_option("--partition-seed", a.partition_seed, "hash partition seed");
    c->add_option("--sketches", a.sketches, "sketch file from 'dkws index'");
}

std::optional<bool> onoff(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s == "on";
}

RunConfig run_config(const RunArgs& a) {
    RunConfig c;
    c.variant = *parse_variant(a.variant);
    c.np_threshold = a.np_threshold;
    c.deterministic = a.deterministic;
    c.seed = a.seed;
    c.opt_backtrack = onoff(a.opt_backtrack);
    c.opt_bpads = onoff(a.opt_bpads);
    c.opt_order = onoff(a.opt_order);
    c.trace = log_level() >= Level::Debug;
    return c;
}

Fragmentation fragments(const Graph& g, const RunArgs& a) {
    if (!a.partition.empty()) {
        std::ifstream in(a.partition);
        if (!in) throw GraphError("cannot open " + a.partition);
        return import_partition(g, in, a.workers);
    }
    return partition_hash(g, a.workers, a.partition_seed);
}

std::unique_ptr<SketchSet> sketches(const Graph& g, const Fragmentation& f, const RunArgs& a, bool needed) {
    if (!needed && a.sketches.empty()) return nullptr;
    std::unique_ptr<SketchSet> s;
    if (!a.sketches.empty()) {
        std::ifstream in(a.sketches);
        if (!in) throw GraphError("cannot open " + a.sketches);
        s = std::make_unique<SketchSet>(SketchSet::load(in, g));
    } else {
        log(Level::Info, "building sketches, k=", a.k_param);
        s = std::make_unique<SketchSet>(SketchSet::build(g, a.k_param));
    }
    s->attach_borders(f);
    return s;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');)
        if (!x.empty()) out.push_back(x);
    return out;
}

void log_metrics(const RunResult& r) {
    const auto& m = r.metrics;
    log(Level::Info, "supersteps=", m.supersteps, " messages=", m.msg_count, " bytes=", m.msg_bytes,
        " visited=", m.visited_nodes, " notifies=", m.notifies, " pushes=", m.pushes, " bkws=", m.bkws_steps,
        " fkws=", m.fkws_steps);
    if (r.trace.enabled) {
        auto bad = audit_trace(r.trace, static_cast<int>(m.visited_per_worker.size()));
        log(Level::Debug, "trace events=", r.trace.events.size(), " audit violations=", bad.size());
        for (const auto& b : bad) log(Level::Error, "audit: ", b);
    }
}

std::string keyword_name(const Graph& g, KeywordId q) {
    return q < g.keyword_count() ? g.keyword_names[q] : "?";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed top-k keyword search"};
    app.require_subcommand(1);

    // index
    GraphArgs ig;
    std::size_t ik = 4;
    std::string iout, ipart;
    int iworkers = 0;
    auto* index = app.add_subcommand("index", "build PADS/KPADS (and border) sketches");
    add_graph_options(index, ig);
    index->add_option("--k-param", ik, "sketch size parameter")->check(CLI::PositiveNumber);
    index->add_option("--partition", ipart, "partition file; adds border sketches");
    index->add_option("--workers", iworkers, "fragment count for --partition");
    index->add_option("--out", iout, "sketch file")->required();

    // partition
    GraphArgs pg;
    int pworkers = 8;
    std::uint64_t pseed = 1;
    std::string pimport, pout;
    auto* part = app.add_subcommand("partition", "hash-partition a graph or check an imported partition");
    add_graph_options(part, pg);
    part->add_option("--workers", pworkers, "fragment count")->check(CLI::PositiveNumber);
    part->add_option("--seed", pseed, "hash seed");
    part->add_option("--import", pimport, "existing METIS-style partition to validate");
    part->add_option("--out", pout, "output partition file (default stdout)");

    // query
    GraphArgs qg;
    RunArgs qr;
    std::string qkeywords, qcsv;
    double qtau = 3.0;
    std::size_t qk = 10;
    auto* query = app.add_subcommand("query", "answer one keyword query");
    add_graph_options(query, qg);
    add_run_options(query, qr);
    query->add_option("--keywords", qkeywords, "comma separated keywords")->required();
    query->add_option("--tau", qtau, "distance bound")->check(CLI::NonNegativeNumber);
    query->add_option("--k", qk, "answers to return")->check(CLI::PositiveNumber);
    query->add_option("--csv", qcsv, "append the metrics row to this file");

    // bench
    GraphArgs bg;
    RunArgs br;
    std::string bvariants = "baseline,bf,pads,np,pine", bsizes = "2,3,4,5,6", bout;
    std::size_t bqueries = 50, bk = 10;
    double btau = 3.0;
    std::uint64_t bqseed = 1;
    bool bcheck = false;
    auto* bench = app.add_subcommand("bench", "run generated queries across variants, write CSV");
    add_graph_options(bench, bg);
    add_run_options(bench, br, false);
    bench->add_option("--variants", bvariants, "comma separated variants");
    bench->add_option("--sizes", bsizes, "comma separated keyword counts");
    bench->add_option("--queries", bqueries, "queries per size");
    bench->add_option("--tau", btau, "distance bound")->check(CLI::NonNegativeNumber);
    bench->add_option("--k", bk, "answers per query")->check(CLI::PositiveNumber);
    bench->add_option("--query-seed", bqseed, "query generator seed");
    bench->add_flag("--check", bcheck, "compare every row with the oracle");
    bench->add_option("--out", bout, "CSV file (default stdout)");

    // oracle
    GraphArgs og;
    std::string okeywords;
    double otau = 3.0;
    std::size_t ok = 10;
    auto* orc = app.add_subcommand("oracle", "brute-force top-k on a small graph");
    add_graph_options(orc, og);
    orc->add_option("--keywords", okeywords, "comma separated keywords")->required();
    orc->add_option("--tau", otau, "distance bound")->check(CLI::NonNegativeNumber);
    orc->add_option("--k", ok, "answers to return")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*index) {
            Graph g = load(ig);
            SketchSet s = SketchSet::build(g, ik);
            if (!ipart.empty()) {
                if (iworkers < 1) throw CLI::ValidationError("--workers", "needed with --partition");
                std::ifstream in(ipart);
                if (!in) throw GraphError("cannot open " + ipart);
                s.attach_borders(import_partition(g, in, iworkers));
            }
            std::ofstream out(iout);
            if (!out) throw GraphError("cannot write " + iout);
            s.save(out, g);
            double total = 0;
            for (const auto& x : s.pads().out_sketch) total += static_cast<double>(x.size());
            std::printf("vertices %zu, mean out-sketch size %.3f\n", g.vertex_count,
                        g.vertex_count ? total / static_cast<double>(g.vertex_count) : 0.0);
            return 0;
        }

        if (*part) {
            Graph g = load(pg);
            Fragmentation f;
            if (!pimport.empty()) {
                std::ifstream in(pimport);
                if (!in) throw GraphError("cannot open " + pimport);
                f = import_partition(g, in, pworkers);
            } else {
                f = partition_hash(g, pworkers, pseed);
            }
            for (const auto& fr : f.fragments)
                std::fprintf(stderr, "fragment %d: %zu vertices, %zu edges, %zu in-portals, %zu out-portals\n", fr.id,
                             fr.vertices.size(), fr.edge_count(), fr.in_portals.size(), fr.out_portals.size());
            if (pout.empty()) {
                write_partition(f, std::cout);
            } else {
                std::ofstream out(pout);
                if (!out) throw GraphError("cannot write " + pout);
                write_partition(f, out);
            }
            return 0;
        }

        if (*query) {
            Graph g = load(qg);
            RunConfig cfg = run_config(qr);
            Fragmentation f = fragments(g, qr);
            auto sk = sketches(g, f, qr, uses_sketches(cfg.variant));
            Query q = make_query(g, split(qkeywords), qtau, qk);
            RunResult r = run_query(g, f, sk.get(), q, cfg);
            log_metrics(r);
            std::printf("rank,root,score,slots\n");
            for (std::size_t i = 0; i < r.answers.size(); ++i) {
                const auto& a = r.answers[i];
                std::string slots;
                for (std::size_t j = 0; j < a.slots.size(); ++j) {
                    if (j) slots += ' ';
                    char buf[96];
                    std::snprintf(buf, sizeof buf, "%s=%u:%.10g", keyword_name(g, q.keywords[j]).c_str(), a.slots[j].leaf,
                                  a.slots[j].dist);
                    slots += buf;
                }
                std::printf("%zu,%u,%.10g,%s\n", i + 1, a.root, a.score, slots.c_str());
            }
            BenchRow row{variant_name(cfg.variant), 0, q.keywords.size(), q.tau, q.k, f.m, r.metrics, r.answers};
            if (qcsv.empty()) {
                std::cout << '\n' << kCsvHeader << '\n';
                write_csv_row(std::cout, row);
            } else {
                const bool fresh = !std::ifstream(qcsv).good();
                std::ofstream out(qcsv, std::ios::app);
                if (!out) throw GraphError("cannot write " + qcsv);
                if (fresh) out << kCsvHeader << '\n';
                write_csv_row(out, row);
            }
            return 0;
        }

        if (*bench) {
            Graph g = load(bg);
            BenchSpec spec;
            spec.variants.clear();
            for (const auto& name : split(bvariants)) {
                auto v = parse_variant(name);
                if (!v) throw CLI::ValidationError("--variants", "unknown variant " + name);
                spec.variants.push_back(*v);
            }
            bool need = false;
            for (auto v : spec.variants) need = need || uses_sketches(v);
            br.variant = "pine";
            spec.base = run_config(br);
            spec.base.trace = false;
            spec.queries = bqueries;
            spec.tau = btau;
            spec.k = bk;
            spec.query_seed = bqseed;
            spec.check = bcheck;
            Fragmentation f = fragments(g, br);
            auto sk = sketches(g, f, br, need);

            std::ofstream file;
            if (!bout.empty()) {
                file.open(bout);
                if (!file) throw GraphError("cannot write " + bout);
            }
            std::ostream& out = bout.empty() ? std::cout : file;
            std::size_t rows = 0, bad = 0;
            bool first = true;
            for (const auto& s : split(bsizes)) {
                spec.num_keywords = std::stoul(s);
                spec.header = first;
                first = false;
                log(Level::Info, "size ", spec.num_keywords, ": ", spec.queries, " queries x ", spec.variants.size(),
                    " variants");
                auto sum = run_bench(g, f, sk.get(), spec, out);
                rows += sum.rows;
                bad += sum.mismatches;
            }
            log(Level::Info, rows, " rows written");
            if (bcheck) {
                std::fprintf(stderr, "oracle check: %zu rows, %zu mismatches\n", rows, bad);
                if (bad) return 1;
            }
            return 0;
        }

        if (*orc) {
            Graph g = load(og);
            Query q = make_query(g, split(okeywords), otau, ok);
            std::printf("rank,root,score\n");
            auto top = oracle::brute_top_k(g, q);
            for (std::size_t i = 0; i < top.size(); ++i)
                std::printf("%zu,%u,%.10g\n", i + 1, top[i].root, top[i].score);
            return 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "dkws: %s\n", e.what());
        return 2;
    }
    return 0;
}
