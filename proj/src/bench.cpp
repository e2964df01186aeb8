#include "dkws/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

#include "dkws/oracle.hpp"

namespace dkws {

namespace {

std::string num(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

std::string millis(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", d);
    return buf;
}

}  // namespace

Graph generate_graph(const GenParams& p) {
    std::mt19937_64 rng(p.seed);
    std::uniform_int_distribution<int> wdist(1, 4);
    auto weight = [&] { return 0.5 * wdist(rng); };
    GraphBuilder b(p.n);
    const std::size_t n = p.n;
    const auto target_edges = static_cast<std::size_t>(p.avg_degree * static_cast<double>(n));

    if (p.model == GraphModel::ErdosRenyi) {
        std::uniform_int_distribution<VertexId> vd(0, static_cast<VertexId>(n - 1));
        std::set<std::pair<VertexId, VertexId>> seen;
        while (seen.size() < target_edges) {
            VertexId u = vd(rng), v = vd(rng);
            if (u == v || !seen.insert({u, v}).second) continue;
            b.add_edge(u, v, weight());
        }
    } else {
        // Directed preferential attachment: each new vertex links to existing
        // vertices picked proportionally to degree + 1, in a random direction.
        const std::size_t per = std::max<std::size_t>(1, target_edges / n);
        const std::size_t seed_n = std::min<std::size_t>(n, per + 1);
        std::vector<VertexId> pool;
        std::set<std::pair<VertexId, VertexId>> seen;
        std::bernoulli_distribution dir(0.5);
        auto add = [&](VertexId u, VertexId v) {
            if (u == v || !seen.insert({u, v}).second) return false;
            b.add_edge(u, v, weight());
            pool.push_back(u);
            pool.push_back(v);
            return true;
        };
        for (VertexId u = 0; u < seed_n; ++u) pool.push_back(u);
        for (VertexId u = 0; u < seed_n; ++u)
            for (VertexId v = 0; v < seed_n; ++v)
                if (u != v && dir(rng)) add(u, v);
        for (VertexId v = static_cast<VertexId>(seed_n); v < n; ++v) {
            std::size_t made = 0, tries = 0;
            while (made < per && tries < 50 * per) {
                ++tries;
                VertexId t = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
                if (dir(rng) ? add(v, t) : add(t, v)) ++made;
            }
            pool.push_back(v);
        }
    }

    std::vector<double> w(p.keywords);
    for (std::size_t i = 0; i < p.keywords; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), p.zipf_s);
    std::discrete_distribution<std::size_t> kd(w.begin(), w.end());
    for (VertexId v = 0; v < n; ++v) b.add_label(v, "k" + std::to_string(kd(rng)));
    return b.build();
}

std::vector<Query> generate_queries(const Graph& g, std::size_t count, std::size_t num_keywords, double tau,
                                    std::size_t k, std::uint64_t seed) {
    std::vector<KeywordId> live;
    for (KeywordId q = 0; q < g.keyword_count(); ++q)
        if (!search_origins(g, q).empty()) live.push_back(q);
    std::mt19937_64 rng(seed);
    std::vector<Query> out;
    if (live.size() < num_keywords)
        throw std::invalid_argument("graph has " + std::to_string(live.size()) + " keywords, query needs " +
                                    std::to_string(num_keywords));
    for (std::size_t i = 0; i < count; ++i) {
        auto pick = live;
        std::shuffle(pick.begin(), pick.end(), rng);
        pick.resize(num_keywords);
        out.push_back({pick, tau, k});
    }
    return out;
}

std::string format_results(const std::vector<Answer>& answers) {
    std::string s;
    for (const auto& a : answers) {
        if (!s.empty()) s += ';';
        s += std::to_string(a.root) + ":" + num(a.score);
    }
    return s;
}

void write_csv_row(std::ostream& out, const BenchRow& r) {
    const auto& m = r.metrics;
    out << r.variant << ',' << r.query_id << ',' << r.num_keywords << ',' << num(r.tau) << ',' << r.k << ','
        << r.workers << ',' << millis(m.elapsed_ms) << ',' << m.supersteps << ',' << m.msg_count << ',' << m.msg_bytes
        << ',' << m.visited_nodes << ',' << format_results(r.answers) << '\n';
}

std::vector<double> score_multiset(const std::vector<Answer>& answers) {
    std::vector<double> s;
    for (const auto& a : answers) s.push_back(a.score);
    std::sort(s.begin(), s.end());
    return s;
}

BenchSummary run_bench(const Graph& g, const Fragmentation& frag, const SketchSet* sketches, const BenchSpec& spec,
                       std::ostream& csv) {
    BenchSummary sum;
    if (spec.header) csv << kCsvHeader << '\n';
    const auto queries = generate_queries(g, spec.queries, spec.num_keywords, spec.tau, spec.k, spec.query_seed);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        std::vector<double> want;
        if (spec.check)
            for (const auto& s : oracle::brute_top_k(g, queries[qi])) want.push_back(s.score);
        for (Variant v : spec.variants) {
            RunConfig cfg = spec.base;
            cfg.variant = v;
            auto r = run_query(g, frag, uses_sketches(v) ? sketches : nullptr, queries[qi], cfg);
            BenchRow row{variant_name(v), qi, spec.num_keywords, spec.tau, spec.k, frag.m, r.metrics, r.answers};
            write_csv_row(csv, row);
            ++sum.rows;
            if (spec.check && score_multiset(r.answers) != want) ++sum.mismatches;
        }
    }
    return sum;
}

}  // namespace dkws
