#include <limits>
#include <set>

#include "doctest.h"
#include "dkws/runtime.hpp"
#include "util.hpp"

using namespace dkws;

namespace {
constexpr double kOpen = std::numeric_limits<double>::infinity();

AnswerEntry entry(VertexId r, double s, bool approx = false) { return AnswerEntry{r, s, approx, 0, {}}; }
}  // namespace

TEST_CASE("variant names") {
    for (auto v : all_variants()) CHECK(parse_variant(variant_name(v)) == v);
    CHECK_FALSE(parse_variant("fast"));
    CHECK(uses_sketches(Variant::Pads));
    CHECK_FALSE(uses_sketches(Variant::Bf));
    CHECK(uses_notify_push(Variant::Np));
    CHECK_FALSE(uses_notify_push(Variant::Pads));
    RunConfig c;
    c.variant = Variant::Pine;
    c.opt_order = false;
    auto o = kernel_options(c);
    CHECK(o.opt_backtrack);
    CHECK_FALSE(o.opt_order);
}

TEST_CASE("notify refines the global bound") {
    Coordinator c(3, 2, kOpen);
    CHECK(c.bound() == kOpen);
    c.notify(3, 5.0);
    CHECK(c.bound() == 5.0);
    Coordinator a(2, 2, kOpen), b(2, 2, kOpen);
    a.notify(1, 7.0);
    a.notify(2, 5.0);
    b.notify(2, 5.0);
    b.notify(1, 7.0);
    CHECK(a.bound() == 5.0);
    CHECK(b.bound() == 5.0);
    CHECK(a.notify(1, 9.0).empty());
    CHECK(a.counters()[1] == 1);
}

TEST_CASE("counter gap pushes to the lagging worker") {
    Coordinator c(3, 2, kOpen);
    std::set<int> pushed;
    auto feed = [&](int w, double s) {
        for (int t : c.notify(w, s)) pushed.insert(t);
    };
    feed(1, 10);
    feed(3, 10);
    feed(1, 9);
    feed(3, 9);
    feed(1, 8);
    feed(3, 7);
    CHECK(c.counters() == std::vector<std::uint64_t>{0, 3, 0, 3});
    CHECK(pushed == std::set<int>{2});
}

TEST_CASE("push fixture: S_2 6 -> 5") {
    Graph g = testutil::parse("0 1 6\n", "0 a\n1 b\n");
    auto f = make_fragmentation(g, 1, {1, 1});
    FragmentSearch w2(f.fragment(1), make_query(g, {"a", "b"}, 10.0, 1), g.inf(), nullptr, KernelOptions{});
    w2.backward_init();
    w2.backward_expand();
    REQUIRE(w2.effective_bound() == 6.0);
    Coordinator c(3, 0, kOpen);
    auto targets = c.notify(3, 5.0);
    CHECK(std::find(targets.begin(), targets.end(), 2) != targets.end());
    w2.apply_push(c.bound());
    CHECK(w2.effective_bound() == 5.0);
}

TEST_CASE("selector") {
    CHECK(select_subtask(4, 2, kOpen, true, true) == Subtask::Forward);
    CHECK(select_subtask(2, 2, kOpen, true, true) == Subtask::Backward);
    CHECK(select_subtask(1, kOpen, kOpen, true, true) == Subtask::Backward);
    CHECK(select_subtask(kOpen, kOpen, kOpen, false, true) == Subtask::Forward);
    CHECK(select_subtask(kOpen, kOpen, kOpen, false, false) == Subtask::Idle);
    CHECK(staleness_forward({}, 3, kOpen) == kOpen);
    CHECK(staleness_backward({}, 5, 3, kOpen) == kOpen);
    std::vector<Frame> fb{{MsgKind::ForwardRequest, {{0, 0, 2.0}}}, {MsgKind::ForwardRequest, {{1, 0, 2.0}}}};
    CHECK(staleness_forward(fb, 3, kOpen) == 2.0);
    std::vector<Frame> bb{{MsgKind::Backward, {{0, 0, 1.0}}}};
    CHECK(staleness_backward(bb, 5, 3, kOpen) == 3.0);
    CHECK(staleness_backward(bb, 3, 3, kOpen) == 2.0);
}

TEST_CASE("assemble over local lists") {
    auto top = assemble({{entry(15, 4), entry(17, 3)}, {entry(11, 4), entry(6, 4)}, {entry(4, 2), entry(5, 5)}}, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].root == 4);
    CHECK(top[0].score == 2.0);
    CHECK(top[1].root == 17);
    CHECK(top[1].score == 3.0);

    CHECK(assemble({{entry(1, 2)}, {entry(2, 3)}}, 5).size() == 2);
    auto one = assemble({{entry(3, 1), entry(1, 1), entry(2, 0.5)}}, 3);
    CHECK(one[0].root == 2);
    CHECK(one[1].root == 1);
    CHECK(one[2].root == 3);
    auto dup = assemble({{entry(1, 4)}, {entry(1, 2), entry(2, 1, true)}}, 2);
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].score == 2.0);
}

TEST_CASE("walkthrough graph through every variant") {
    Graph g = testutil::walkthrough_graph();
    SketchSet sk = SketchSet::build(g, 2);
    Query q = make_query(g, {"a", "b"}, 6.0, 2);
    for (int m : {1, 2, 3}) {
        auto f = partition_hash(g, m, 4);
        sk.attach_borders(f);
        for (auto v : all_variants()) {
            for (bool det : {true, false}) {
                RunConfig c;
                c.variant = v;
                c.deterministic = det;
                auto r = run_query(g, f, &sk, q, c);
                REQUIRE(r.answers.size() == 2);
                CHECK(r.answers[0].root == 2);
                CHECK(r.answers[0].score == 4.0);
                CHECK(r.answers[1].root == 1);
                CHECK(r.answers[1].score == 8.0);
                CHECK(r.answers[1].slots.size() == 2);
            }
        }
    }
}

TEST_CASE("variant ladder matches the oracle") {
    for (int gi = 0; gi < 4; ++gi) {
        Graph g = testutil::random_graph(gi < 2 ? 100 : 300, 50 + gi, gi % 2);
        SketchSet sk = SketchSet::build(g, 4);
        auto queries = generate_queries(g, 8, 2 + gi, 3.0, 5, 60 + gi);
        for (int m : {1, 2, 4, 8}) {
            auto f = partition_hash(g, m, gi);
            sk.attach_borders(f);
            for (const auto& q : queries) {
                auto want = testutil::oracle_scores(g, q);
                for (auto v : all_variants()) {
                    RunConfig c;
                    c.variant = v;
                    c.seed = static_cast<std::uint64_t>(m);
                    c.deterministic = (m % 4) == 0;
                    c.trace = true;
                    auto r = run_query(g, f, &sk, q, c);
                    CHECK(score_multiset(r.answers) == want);
                    CHECK(audit_trace(r.trace, m).empty());
                    c.forced_alternation = v == Variant::Pine;  // flip the default selector
                    CHECK(score_multiset(run_query(g, f, &sk, q, c).answers) == want);
                }
            }
        }
    }
}

TEST_CASE("optimization toggles keep answers") {
    Graph g = testutil::random_graph(300, 77, true);
    SketchSet sk = SketchSet::build(g, 4);
    auto f = partition_hash(g, 4, 1);
    sk.attach_borders(f);
    for (const auto& q : generate_queries(g, 10, 3, 3.0, 10, 2)) {
        auto want = testutil::oracle_scores(g, q);
        for (int mask = 0; mask < 8; ++mask) {
            RunConfig c;
            c.opt_backtrack = (mask & 1) != 0;
            c.opt_bpads = (mask & 2) != 0;
            c.opt_order = (mask & 4) != 0;
            CHECK(score_multiset(run_query(g, f, &sk, q, c).answers) == want);
        }
    }
}

TEST_CASE("audit flags a rising slot") {
    Trace t;
    t.enabled = true;
    t.add({TraceEvent::Kind::BackwardSlot, 1, 4, 0, 9, 3});
    t.add({TraceEvent::Kind::BackwardSlot, 1, 4, 0, 3, 5});
    CHECK_FALSE(audit_trace(t, 1).empty());
    Trace ok;
    ok.enabled = true;
    ok.add({TraceEvent::Kind::Notify, 1, kNoVertex, 0, kOpen, 4});
    ok.add({TraceEvent::Kind::GlobalBound, 0, kNoVertex, 0, kOpen, 4});
    CHECK(audit_trace(ok, 2).empty());
    Trace bad;
    bad.enabled = true;
    bad.add({TraceEvent::Kind::Notify, 1, kNoVertex, 0, kOpen, 4});
    bad.add({TraceEvent::Kind::GlobalBound, 0, kNoVertex, 0, kOpen, 3});
    CHECK_FALSE(audit_trace(bad, 2).empty());
}

TEST_CASE("deterministic runs repeat exactly") {
    Graph g = testutil::random_graph(300, 8, true);
    SketchSet sk = SketchSet::build(g, 4);
    auto f = partition_hash(g, 4, 3);
    sk.attach_borders(f);
    for (const auto& q : generate_queries(g, 5, 3, 3.0, 10, 4)) {
        for (auto v : all_variants()) {
            RunConfig c;
            c.variant = v;
            c.deterministic = true;
            auto a = run_query(g, f, &sk, q, c).metrics;
            auto b = run_query(g, f, &sk, q, c).metrics;
            CHECK(a.supersteps == b.supersteps);
            CHECK(a.msg_count == b.msg_count);
            CHECK(a.msg_bytes == b.msg_bytes);
            CHECK(a.visited_nodes == b.visited_nodes);
            CHECK(a.notifies == b.notifies);
        }
    }
}

TEST_CASE("sketch variants need sketches") {
    Graph g = testutil::walkthrough_graph();
    auto f = partition_hash(g, 2, 1);
    RunConfig c;
    c.variant = Variant::Pads;
    CHECK_THROWS_AS(run_query(g, f, nullptr, make_query(g, {"a"}, 3, 1), c), std::invalid_argument);
    c.variant = Variant::Bf;
    CHECK_NOTHROW(run_query(g, f, nullptr, make_query(g, {"a"}, 3, 1), c));
}

TEST_CASE("absent keyword yields no answers") {
    Graph g = testutil::walkthrough_graph();
    SketchSet sk = SketchSet::build(g, 2);
    auto f = partition_hash(g, 2, 1);
    sk.attach_borders(f);
    for (auto v : all_variants()) {
        RunConfig c;
        c.variant = v;
        CHECK(run_query(g, f, &sk, make_query(g, {"a", "nope"}, 3, 2), c).answers.empty());
    }
}
