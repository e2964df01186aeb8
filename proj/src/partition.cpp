#include "dkws/partition.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dkws {

bool Fragment::has_label(std::uint32_t key, KeywordId q) const {
    if (key >= labels.size()) return false;
    return std::binary_search(labels[key].begin(), labels[key].end(), q);
}

std::size_t Fragment::edge_count() const {
    std::size_t m = 0;
    for (const auto& a : out_adj) m += a.size();
    return m;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void sort_unique(std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Fragmentation make_fragmentation(const Graph& g, int m, std::vector<int> owner) {
    if (m < 1) throw std::invalid_argument("fragment count must be >= 1");
    if (owner.size() != g.vertex_count) throw std::invalid_argument("owner map size mismatch");
    for (int o : owner)
        if (o < 1 || o > m) throw std::invalid_argument("owner out of range");

    Fragmentation f;
    f.m = m;
    f.owner = std::move(owner);
    f.fragments.resize(static_cast<std::size_t>(m));
    const std::size_t n = g.vertex_count;

    for (int i = 1; i <= m; ++i) f.fragments[i - 1].id = i;
    for (VertexId v = 0; v < n; ++v) f.fragments[f.owner[v] - 1].vertices.push_back(v);

    for (auto& fr : f.fragments) {
        const int i = fr.id;
        std::vector<VertexId> outs;
        for (VertexId v : fr.vertices) {
            for (const Arc& a : g.out_adj[v])
                if (f.owner[a.v] != i) outs.push_back(a.v);
            bool cross_in = false;
            for (const Arc& a : g.in_adj[v])
                if (f.owner[a.v] != i) cross_in = true;
            if (cross_in) fr.in_portals.push_back(v);
        }
        std::sort(outs.begin(), outs.end());
        outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
        fr.out_portals = std::move(outs);

        fr.key_vertex = fr.vertices;
        fr.key_vertex.insert(fr.key_vertex.end(), fr.out_portals.begin(), fr.out_portals.end());
        fr.vertex_key.assign(n, kNoKey);
        for (std::uint32_t key = 0; key < fr.key_vertex.size(); ++key) fr.vertex_key[fr.key_vertex[key]] = key;

        const std::size_t keys = fr.key_vertex.size();
        const std::size_t local = fr.vertices.size();
        fr.out_adj.assign(local, {});
        fr.in_adj.assign(keys, {});
        fr.in_stubs.assign(local, {});
        fr.portal_targets.assign(keys, {});
        fr.is_in_portal.assign(keys, 0);
        fr.labels.assign(local, {});

        for (std::uint32_t key = 0; key < local; ++key) {
            VertexId v = fr.key_vertex[key];
            fr.labels[key] = g.labels[v];
            for (const Arc& a : g.out_adj[v]) {
                std::uint32_t tk = fr.vertex_key[a.v];
                fr.out_adj[key].push_back({tk, a.w});
                fr.in_adj[tk].push_back({key, a.w});
            }
            for (const Arc& a : g.in_adj[v]) {
                if (f.owner[a.v] != i) {
                    fr.in_stubs[key].push_back(a);
                    fr.portal_targets[key].push_back(f.owner[a.v]);
                }
            }
            sort_unique(fr.portal_targets[key]);
            fr.is_in_portal[key] = fr.portal_targets[key].empty() ? 0 : 1;
        }
        for (std::size_t key = local; key < keys; ++key)
            fr.portal_targets[key].push_back(f.owner[fr.key_vertex[key]]);
    }
    return f;
}

Fragmentation partition_hash(const Graph& g, int m, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("fragment count must be >= 1");
    std::vector<int> owner(g.vertex_count);
    for (VertexId v = 0; v < g.vertex_count; ++v)
        owner[v] = 1 + static_cast<int>(mix(mix(seed) ^ v) % static_cast<std::uint64_t>(m));
    return make_fragmentation(g, m, std::move(owner));
}

Fragmentation import_partition(const Graph& g, std::istream& part_source, int m) {
    if (m < 1) throw std::invalid_argument("fragment count must be >= 1");
    std::vector<int> owner;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(part_source, line)) {
        ++lineno;
        std::istringstream ss(line);
        long long p;
        if (!(ss >> p)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw GraphError("bad partition line", lineno);
        }
        if (p < 0 || p >= m) throw GraphError("part id " + std::to_string(p) + " out of range", lineno);
        owner.push_back(static_cast<int>(p) + 1);
    }
    if (owner.size() != g.vertex_count)
        throw GraphError("partition has " + std::to_string(owner.size()) + " lines, graph has " +
                         std::to_string(g.vertex_count) + " vertices");
    return make_fragmentation(g, m, std::move(owner));
}

void write_partition(const Fragmentation& f, std::ostream& out) {
    for (int o : f.owner) out << (o - 1) << '\n';
}

}  // namespace dkws
