#pragma once

#include <cstdint>
#include <istream>
#include <vector>

#include "dkws/graph.hpp"

namespace dkws {

// Arc inside a fragment; `key` indexes the fragment's key space.
struct LocalArc {
    std::uint32_t key;
    double w;
};

inline constexpr std::uint32_t kNoKey = 0xffffffffu;

// Worker-local subgraph. Keys [0, local_count) are the owned vertices in
// ascending id order, keys [local_count, key_count) are the out-portals.
struct Fragment {
    int id = 0;  // 1-based
    std::vector<VertexId> vertices;     // V_i
    std::vector<VertexId> in_portals;   // F.I, sorted
    std::vector<VertexId> out_portals;  // F.O, sorted

    std::vector<VertexId> key_vertex;           // key -> global id
    std::vector<std::uint32_t> vertex_key;      // global id -> key or kNoKey
    std::vector<std::vector<LocalArc>> out_adj;  // per owned key; targets may be out-portals
    std::vector<std::vector<LocalArc>> in_adj;   // per key; local sources only
    std::vector<std::vector<Arc>> in_stubs;      // per owned key; remote sources (global ids)
    std::vector<std::vector<int>> portal_targets;  // per key; other fragments holding a copy
    std::vector<char> is_in_portal;              // per key
    std::vector<std::vector<KeywordId>> labels;  // per owned key, sorted

    std::size_t local_count() const { return vertices.size(); }
    std::size_t key_count() const { return key_vertex.size(); }
    bool is_local_key(std::uint32_t key) const { return key < vertices.size(); }
    std::uint32_t key_of(VertexId v) const { return v < vertex_key.size() ? vertex_key[v] : kNoKey; }
    bool owns(VertexId v) const { auto k = key_of(v); return k != kNoKey && is_local_key(k); }
    bool has_out_portal(VertexId v) const { auto k = key_of(v); return k != kNoKey && !is_local_key(k); }
    bool has_in_portal(VertexId v) const { auto k = key_of(v); return k != kNoKey && is_local_key(k) && is_in_portal[k]; }
    std::size_t edge_count() const;
    bool has_label(std::uint32_t key, KeywordId q) const;
};

struct Fragmentation {
    int m = 0;
    std::vector<int> owner;  // vertex -> fragment id in [1, m]
    std::vector<Fragment> fragments;  // fragments[i - 1] has id i

    const Fragment& fragment(int id) const { return fragments.at(static_cast<std::size_t>(id - 1)); }
};

// Builds portal sets and local adjacency from an owner assignment (1-based ids).
Fragmentation make_fragmentation(const Graph& g, int m, std::vector<int> owner);

Fragmentation partition_hash(const Graph& g, int m, std::uint64_t seed);

// METIS-style: line i holds the 0-based part of vertex i.
Fragmentation import_partition(const Graph& g, std::istream& part_source, int m);

void write_partition(const Fragmentation& f, std::ostream& out);

}  // namespace dkws
