#include "doctest.h"
#include "util.hpp"

using namespace dkws;
using testutil::parse;

TEST_CASE("loader builds the transpose") {
    Graph g = parse("0 1 9\n1 2 1\n0 2 3\n", "2 a\n");
    REQUIRE(g.vertex_count == 3);
    REQUIRE(g.in_adj[2].size() == 2);
    std::vector<std::pair<VertexId, double>> in;
    for (auto a : g.in_adj[2]) in.push_back({a.v, a.w});
    std::sort(in.begin(), in.end());
    CHECK(in == std::vector<std::pair<VertexId, double>>{{0, 3.0}, {1, 1.0}});
    auto a = g.keyword("a");
    REQUIRE(a);
    CHECK(search_origins(g, *a) == std::vector<VertexId>{2});
    CHECK(g.total_weight == 13.0);
    CHECK(g.inf() > 13.0);
}

TEST_CASE("every out arc has one matching in arc") {
    Graph g = testutil::random_graph(300, 7);
    std::size_t out = 0, in = 0;
    for (VertexId u = 0; u < g.vertex_count; ++u) {
        out += g.out_adj[u].size();
        in += g.in_adj[u].size();
        for (auto a : g.out_adj[u]) {
            auto n = std::count_if(g.in_adj[a.v].begin(), g.in_adj[a.v].end(),
                                   [&](const Arc& b) { return b.v == u && b.w == a.w; });
            auto m = std::count_if(g.out_adj[u].begin(), g.out_adj[u].end(),
                                   [&](const Arc& b) { return b.v == a.v && b.w == a.w; });
            CHECK(n == m);
        }
    }
    CHECK(out == in);
}

TEST_CASE("origins equal a label scan") {
    Graph g = testutil::random_graph(1000, 3, true);
    for (KeywordId q = 0; q < g.keyword_count(); ++q) {
        std::vector<VertexId> scan;
        for (VertexId v = 0; v < g.vertex_count; ++v)
            if (std::find(g.labels[v].begin(), g.labels[v].end(), q) != g.labels[v].end()) scan.push_back(v);
        CHECK(search_origins(g, q) == scan);
    }
}

TEST_CASE("walkthrough origins") {
    Graph g = testutil::walkthrough_graph();
    CHECK(search_origins(g, *g.keyword("a")) == std::vector<VertexId>{4, 6, 8, 9});
    CHECK(search_origins(g, *g.keyword("b")) == std::vector<VertexId>{5, 7});
    CHECK_FALSE(g.keyword("zzz"));
    CHECK(search_origins(g, 999).empty());
}

TEST_CASE("labels on the v1..v7 fragment") {
    Graph g = parse("1 2 9\n2 3 1\n3 4 2\n5 6 1\n6 7 1\n4 5 1\n", "4 a\n7 b\n");
    CHECK(g.out_adj[1][0].w == 9.0);
    auto o = search_origins(g, *g.keyword("a"));
    CHECK(std::find(o.begin(), o.end(), 4u) != o.end());
}

TEST_CASE("empty label file gives no origins") {
    Graph g = parse("0 1 1\n", "");
    CHECK(g.keyword_count() == 0);
    Query q = make_query(g, {"a"}, 3, 1);
    CHECK(search_origins(g, q.keywords[0]).empty());
    CHECK(oracle::brute_top_k(g, q).empty());
}

TEST_CASE("comments and blank lines are skipped") {
    Graph g = parse("# header\n\n0 1 2.5  # trailing\n", "# none\n1 x y\n");
    CHECK(g.edge_count() == 1);
    CHECK(g.labels[1].size() == 2);
}

TEST_CASE("loader errors carry line numbers") {
    auto line_of = [](const std::string& e, const std::string& l, std::optional<std::size_t> n = std::nullopt) {
        std::istringstream es(e), ls(l);
        try {
            load_graph(es, ls, n);
        } catch (const GraphError& err) {
            return err.line();
        }
        return std::size_t{9999};
    };
    CHECK(line_of("0 1 1\n0 1\n", "") == 2);
    CHECK(line_of("0 1 1\n1 2 0\n", "") == 2);
    CHECK(line_of("0 1 -3\n", "") == 1);
    CHECK(line_of("0 1 x\n", "") == 1);
    CHECK(line_of("0 0 1\n", "") == 1);
    CHECK(line_of("0 1 1\n1 2 1 7\n", "") == 2);
    CHECK(line_of("0 1 1\n", "a kw\n") == 1);
    CHECK(line_of("0 1 1\n", "0 a\n5 b\n", 3) == 2);
    CHECK(line_of("0 7 1\n", "", 3) == 1);
}

TEST_CASE("declared size keeps isolated vertices") {
    std::istringstream e("0 1 1\n"), l("");
    Graph g = load_graph(e, l, 5);
    CHECK(g.vertex_count == 5);
}

TEST_CASE("query validation") {
    Graph g = parse("0 1 1\n", "0 a\n1 b\n");
    CHECK_THROWS(make_query(g, {}, 1, 1));
    CHECK_THROWS(make_query(g, {"a", "a"}, 1, 1));
    CHECK_THROWS(make_query(g, {"a"}, 1, 0));
    CHECK_THROWS(make_query(g, {"a"}, -1, 1));
    Query q = make_query(g, {"a", "nope"}, 2, 1);
    CHECK(q.keywords.size() == 2);
    CHECK(q.keywords[1] >= g.keyword_count());
}
