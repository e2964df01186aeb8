#include <set>

#include "doctest.h"
#include "dkws/partition.hpp"
#include "dkws/runtime.hpp"
#include "util.hpp"

using namespace dkws;

TEST_CASE("one fragment has no portals") {
    Graph g = testutil::random_graph(100, 1);
    auto f = partition_hash(g, 1, 5);
    CHECK(f.fragment(1).in_portals.empty());
    CHECK(f.fragment(1).out_portals.empty());
    CHECK(f.fragment(1).vertices.size() == 100);
}

TEST_CASE("single cut edge") {
    Graph g = testutil::parse("0 1 1\n1 2 1\n");
    auto f = make_fragmentation(g, 2, {1, 1, 2});
    CHECK(f.fragment(1).out_portals == std::vector<VertexId>{2});
    CHECK(f.fragment(1).in_portals.empty());
    CHECK(f.fragment(2).in_portals == std::vector<VertexId>{2});
    CHECK(f.fragment(2).out_portals.empty());
    const auto& f1 = f.fragment(1);
    auto k = f1.key_of(2);
    REQUIRE(k != kNoKey);
    CHECK_FALSE(f1.is_local_key(k));
    CHECK(f1.portal_targets[k] == std::vector<int>{2});
}

TEST_CASE("portal sets follow their definitions") {
    Graph g = testutil::random_graph(100, 11);
    for (int m : {2, 4, 8}) {
        auto f = partition_hash(g, m, 3);
        std::size_t total = 0;
        for (const auto& fr : f.fragments) total += fr.edge_count();
        CHECK(total == g.edge_count());
        for (int i = 1; i <= m; ++i) {
            std::set<VertexId> in, out;
            for (VertexId u = 0; u < g.vertex_count; ++u)
                for (auto a : g.out_adj[u]) {
                    if (f.owner[u] == i && f.owner[a.v] != i) out.insert(a.v);
                    if (f.owner[u] != i && f.owner[a.v] == i) in.insert(a.v);
                }
            const auto& fr = f.fragment(i);
            CHECK(std::vector<VertexId>(in.begin(), in.end()) == fr.in_portals);
            CHECK(std::vector<VertexId>(out.begin(), out.end()) == fr.out_portals);
            for (auto v : fr.in_portals) CHECK(fr.owns(v));
            for (auto v : fr.out_portals) CHECK_FALSE(fr.owns(v));
        }
    }
}

TEST_CASE("hash partition is deterministic in the seed") {
    Graph g = testutil::random_graph(200, 2);
    CHECK(partition_hash(g, 4, 9).owner == partition_hash(g, 4, 9).owner);
    CHECK(partition_hash(g, 4, 9).owner != partition_hash(g, 4, 10).owner);
    CHECK_THROWS(partition_hash(g, 0, 1));
}

TEST_CASE("import maps parts to 1-based owners") {
    Graph g = testutil::parse("0 1 1\n1 2 1\n");
    std::istringstream in("0\n0\n1\n");
    auto f = import_partition(g, in, 2);
    CHECK(f.owner == std::vector<int>{1, 1, 2});

    std::istringstream zeros("0\n0\n0\n");
    auto z = import_partition(g, zeros, 3);
    CHECK(z.fragment(1).vertices.size() == 3);
    for (int i : {2, 3}) {
        CHECK(z.fragment(i).vertices.empty());
        CHECK(z.fragment(i).in_portals.empty());
        CHECK(z.fragment(i).out_portals.empty());
    }
}

TEST_CASE("import errors") {
    Graph g = testutil::parse("0 1 1\n1 2 1\n");
    std::istringstream short_file("0\n1\n");
    CHECK_THROWS_AS(import_partition(g, short_file, 2), GraphError);
    std::istringstream range("0\n2\n1\n");
    CHECK_THROWS_AS(import_partition(g, range, 2), GraphError);
    std::istringstream junk("0\nx\n1\n");
    CHECK_THROWS_AS(import_partition(g, junk, 2), GraphError);
}

TEST_CASE("written partitions import back") {
    Graph g = testutil::random_graph(100, 4);
    auto f = partition_hash(g, 4, 1);
    std::stringstream s;
    write_partition(f, s);
    auto back = import_partition(g, s, 4);
    CHECK(back.owner == f.owner);
}

TEST_CASE("answers do not depend on the partition") {
    Graph g = testutil::random_graph(100, 21);
    auto a = partition_hash(g, 4, 1);
    std::vector<int> blocks(g.vertex_count);
    for (std::size_t v = 0; v < blocks.size(); ++v) blocks[v] = 1 + static_cast<int>(v * 4 / blocks.size());
    auto b = make_fragmentation(g, 4, blocks);
    auto queries = generate_queries(g, 10, 3, 3.0, 5, 8);
    for (const auto& q : queries) {
        RunConfig c;
        c.variant = Variant::Bf;
        auto ra = run_query(g, a, nullptr, q, c);
        auto rb = run_query(g, b, nullptr, q, c);
        CHECK(score_multiset(ra.answers) == score_multiset(rb.answers));
        CHECK(score_multiset(ra.answers) == testutil::oracle_scores(g, q));
    }
}
