#include "dkws/oracle.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace dkws::oracle {

namespace {

void guard(const Graph& g) {
    if (g.vertex_count > kMaxVertices) throw std::length_error("oracle is limited to 5000 vertices");
}

// Plain binary-heap Dijkstra over `adj` from the given sources.
std::vector<double> dijkstra(const std::vector<std::vector<Arc>>& adj, const std::vector<VertexId>& sources,
                             double inf, double limit) {
    std::vector<double> dist(adj.size(), inf);
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (VertexId s : sources) {
        dist[s] = 0.0;
        pq.push({0.0, s});
    }
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (const Arc& a : adj[u]) {
            double nd = d + a.w;
            if (nd <= limit && nd < dist[a.v]) {
                dist[a.v] = nd;
                pq.push({nd, a.v});
            }
        }
    }
    return dist;
}

}  // namespace

std::vector<double> exact_keyword_dists(const Graph& g, KeywordId q, double tau) {
    guard(g);
    std::vector<VertexId> sources;
    for (VertexId v = 0; v < g.vertex_count; ++v)
        if (g.has_label(v, q)) sources.push_back(v);
    return dijkstra(g.in_adj, sources, g.inf(), tau);
}

std::vector<Scored> brute_top_k(const Graph& g, const Query& query) {
    guard(g);
    std::vector<double> total(g.vertex_count, 0.0);
    std::vector<char> ok(g.vertex_count, 1);
    for (KeywordId q : query.keywords) {
        auto d = exact_keyword_dists(g, q, query.tau);
        for (VertexId v = 0; v < g.vertex_count; ++v) {
            if (d[v] >= g.inf() || d[v] > query.tau) ok[v] = 0;
            else total[v] += d[v];
        }
    }
    std::vector<Scored> all;
    for (VertexId v = 0; v < g.vertex_count; ++v)
        if (ok[v]) all.push_back({v, total[v]});
    std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
        return a.score != b.score ? a.score < b.score : a.root < b.root;
    });
    if (all.size() > query.k) all.resize(query.k);
    return all;
}

std::vector<double> distances_from(const Graph& g, VertexId u) {
    guard(g);
    return dijkstra(g.out_adj, {u}, g.inf(), g.inf());
}

double exact_dist(const Graph& g, VertexId u, VertexId v) {
    return distances_from(g, u)[v];
}

}  // namespace dkws::oracle
