#include <limits>

#include "doctest.h"
#include "dkws/kernel.hpp"
#include "dkws/runtime.hpp"
#include "util.hpp"

using namespace dkws;

namespace {
constexpr double kOpen = std::numeric_limits<double>::infinity();
}

TEST_CASE("score sums slots") {
    Match m{1, {{2, 0.0}, {3, 0.0}}, false};
    CHECK(score(m) == 0.0);
    m.slots = {{2, 4.0}, {kNoVertex, 99.0}};
    CHECK(score(m) >= 99.0);
    m.slots = {{2, 1.5}, {3, 2.5}};
    CHECK(score(m) == 4.0);
}

TEST_CASE("heap bound opens at the k-th answer") {
    AnswerHeap h(2, kOpen);
    CHECK(h.bound() == kOpen);
    CHECK_FALSE(h.offer(2, 4.0, false));
    CHECK(h.bound() == kOpen);
    CHECK(h.offer(1, 8.0, false));
    CHECK(h.bound() == 8.0);
}

TEST_CASE("heap rejects offers at or above the bound") {
    AnswerHeap h(2, kOpen);
    h.offer(4, 2.0, false);
    h.offer(17, 3.0, false);
    CHECK_FALSE(h.offer(5, 5.0, false));
    CHECK(h.bound() == 3.0);
    CHECK_FALSE(h.offer(9, 3.0, false));
    CHECK(h.find(9) == nullptr);
    CHECK(h.offer(9, 2.5, false));
    CHECK(h.bound() == 2.5);
    CHECK(h.find(17) == nullptr);
}

TEST_CASE("heap keeps one entry per root") {
    AnswerHeap h(3, kOpen);
    h.offer(1, 5.0, true);
    h.offer(1, 5.0, false);
    REQUIRE(h.find(1));
    CHECK_FALSE(h.find(1)->approximate);
    h.offer(1, 7.0, false);
    CHECK(h.find(1)->score == 5.0);
    h.offer(1, 4.0, false);
    CHECK(h.find(1)->score == 4.0);
    CHECK(h.size() == 1);
    auto s = h.sorted();
    CHECK(s.size() == 1);
}

namespace {

// 0 (fragment 1) -> 1 (fragment 2) -> 2 (fragment 2, labeled a)
struct TwoFragments {
    Graph g = testutil::parse("0 1 1\n1 2 2\n", "2 a\n");
    Fragmentation f = make_fragmentation(g, 2, {1, 2, 2});
    Query q = make_query(g, {"a"}, 5.0, 3);  // k > 1 so the portal is not pruned
};

}  // namespace

TEST_CASE("settled in-portal value is sent to the neighbour") {
    TwoFragments t;
    FragmentSearch w2(t.f.fragment(2), t.q, t.g.inf(), nullptr, KernelOptions{});
    w2.backward_init();
    while (w2.has_backward_work()) w2.backward_expand();
    auto out = w2.drain_outbox();
    REQUIRE(out.size() == 1);
    CHECK(out[0].target == 1);
    CHECK(out[0].frame.kind == MsgKind::Backward);
    REQUIRE(out[0].frame.tuples.size() == 1);
    const auto& tup = out[0].frame.tuples[0];
    CHECK(unpack_vertex(tup.vertex) == 1);
    CHECK(unpack_leaf(tup.vertex) == 2);
    CHECK(tup.keyword == 0);
    CHECK(tup.dist == 2.0);

    FragmentSearch w1(t.f.fragment(1), t.q, t.g.inf(), nullptr, KernelOptions{});
    w1.backward_init();
    w1.merge_backward(out[0].frame);
    CHECK(w1.backward_value(1, 0) == 2.0);
    while (w1.has_backward_work()) w1.backward_expand();
    CHECK(w1.backward_value(0, 0) == 3.0);
    CHECK(w1.final_answers().size() == 1);

    CHECK_THROWS_AS(w2.merge_backward(out[0].frame), RoutingFault);
}

TEST_CASE("misrouted forward frames fault") {
    TwoFragments t;
    FragmentSearch w1(t.f.fragment(1), t.q, t.g.inf(), nullptr, KernelOptions{});
    FragmentSearch w2(t.f.fragment(2), t.q, t.g.inf(), nullptr, KernelOptions{});
    Frame req{MsgKind::ForwardRequest, {{pack_vertex(1, kNoVertex), 0, 3.0}}};
    CHECK_THROWS_AS(w1.apply_forward_request(req, 2), RoutingFault);
    Frame match{MsgKind::ForwardMatch, {{pack_vertex(1, 2), 0, 2.0}}};
    CHECK_THROWS_AS(w2.apply_forward_match(match), RoutingFault);
    Frame stray{MsgKind::Backward, {{pack_vertex(0, 2), 0, 2.0}}};
    CHECK_THROWS_AS(w1.merge_backward(stray), RoutingFault);
}

TEST_CASE("forward request is answered with the local value") {
    TwoFragments t;
    FragmentSearch w2(t.f.fragment(2), t.q, t.g.inf(), nullptr, KernelOptions{});
    w2.backward_init();
    while (w2.has_backward_work()) w2.backward_expand();
    w2.drain_outbox();
    w2.apply_forward_request({MsgKind::ForwardRequest, {{pack_vertex(1, kNoVertex), 0, 3.0}}}, 1);
    auto out = w2.drain_outbox();
    bool answered = false;
    for (const auto& o : out)
        if (o.frame.kind == MsgKind::ForwardMatch && o.target == 1)
            for (const auto& tup : o.frame.tuples)
                if (unpack_vertex(tup.vertex) == 1 && tup.dist == 2.0) answered = true;
    CHECK(answered);
}

TEST_CASE("single keyword equals truncated reverse search") {
    Graph g = testutil::random_graph(100, 14);
    auto f = partition_hash(g, 1, 1);
    for (KeywordId q = 0; q < g.keyword_count(); ++q) {
        Query query{{q}, 2.0, g.vertex_count};
        FragmentSearch w(f.fragment(1), query, g.inf(), nullptr, KernelOptions{false});
        w.backward_init();
        while (w.has_backward_work()) w.backward_expand();
        auto d = oracle::exact_keyword_dists(g, q, 2.0);
        for (VertexId v = 0; v < g.vertex_count; ++v)
            if (d[v] < g.inf()) CHECK(w.backward_value(v, 0) == d[v]);
        std::size_t reached = std::count_if(d.begin(), d.end(), [&](double x) { return x < g.inf(); });
        CHECK(w.final_answers().size() == reached);
    }
}

TEST_CASE("complete root needs no forward work") {
    Graph g = testutil::parse("0 1 1\n", "0 a b\n");
    auto f = partition_hash(g, 1, 1);
    FragmentSearch w(f.fragment(1), make_query(g, {"a", "b"}, 3.0, 1), g.inf(), nullptr, KernelOptions{});
    w.backward_init();
    while (w.has_backward_work()) w.backward_expand();
    CHECK(w.local_bound() == 0.0);
    CHECK_FALSE(w.has_forward_work());
    CHECK(w.drain_outbox().empty());
}

TEST_CASE("push lowers the effective bound only downward") {
    Graph g = testutil::parse("0 1 6\n", "0 a\n1 b\n");
    auto f = make_fragmentation(g, 1, {1, 1});
    FragmentSearch w(f.fragment(1), make_query(g, {"a", "b"}, 10.0, 1), g.inf(), nullptr, KernelOptions{});
    w.backward_init();
    w.backward_expand();
    CHECK(w.effective_bound() == 6.0);
    w.apply_push(9.0);
    CHECK(w.effective_bound() == 6.0);
    w.apply_push(5.0);
    CHECK(w.effective_bound() == 5.0);
    CHECK(w.local_bound() == 6.0);
}

TEST_CASE("scores above the sentinel still count") {
    // sentinel is 4, the second answer scores 6
    Graph g = testutil::parse("0 1 3\n", "1 a b\n");
    auto f = make_fragmentation(g, 1, {1, 1});
    SketchSet sk = SketchSet::build(g, 2);
    sk.attach_borders(f);
    Query q = make_query(g, {"a", "b"}, 10.0, 2);
    for (auto v : all_variants()) {
        RunConfig c;
        c.variant = v;
        auto r = run_query(g, f, &sk, q, c);
        REQUIRE(r.answers.size() == 2);
        CHECK(r.answers[0].root == 1);
        CHECK(r.answers[0].score == 0.0);
        CHECK(r.answers[1].root == 0);
        CHECK(r.answers[1].score == 6.0);
    }
}

TEST_CASE("radius beyond the sentinel leaves unreached slots out") {
    Graph g = testutil::parse("0 1 6\n2 3 1\n", "0 a\n1 b\n3 a\n");
    auto f = make_fragmentation(g, 2, {1, 1, 2, 2});
    SketchSet sk = SketchSet::build(g, 2);
    sk.attach_borders(f);
    Query q = make_query(g, {"a", "b"}, 1000.0, 5);
    CHECK(testutil::oracle_scores(g, q) == std::vector<double>{6.0});
    for (auto v : all_variants()) {
        RunConfig c;
        c.variant = v;
        CHECK(score_multiset(run_query(g, f, &sk, q, c).answers) == std::vector<double>{6.0});
    }
}
