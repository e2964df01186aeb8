#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "dkws/backtrack.hpp"
#include "dkws/graph.hpp"
#include "dkws/partition.hpp"
#include "dkws/sketch.hpp"
#include "dkws/wire.hpp"

namespace dkws {

struct Slot {
    VertexId leaf = kNoVertex;
    double dist = 0.0;
};

struct Match {
    VertexId root = kNoVertex;
    std::vector<Slot> slots;  // one per query keyword, in query order
    bool approximate = false;
};

// Sum of slot distances; a missing slot carries the sentinel and dominates.
double score(const Match& m);

struct AnswerEntry {
    VertexId root;
    double score;
    bool approximate;
    std::uint64_t seq;
    std::vector<Slot> slots;
};

// Fixed-capacity top-k keyed by distinct roots. bound() is S.
class AnswerHeap {
public:
    AnswerHeap(std::size_t k, double inf) : k_(k), inf_(inf) {}

    // Returns true when bound() changed.
    bool offer(VertexId root, double score, bool approximate, std::vector<Slot> slots = {});

    double bound() const { return full() ? worst_score() : inf_; }
    bool full() const { return entries_.size() >= k_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return k_; }
    const AnswerEntry* find(VertexId root) const;
    std::vector<AnswerEntry> sorted() const;

private:
    double worst_score() const;
    std::size_t worst_index() const;

    std::size_t k_;
    double inf_;
    std::uint64_t next_seq_ = 0;
    std::vector<AnswerEntry> entries_;
};

bool answer_offer(AnswerHeap& a, const Match& m);

// Budgets f_u[q] per query slot; negative means "not requested".
using Budgets = std::vector<double>;

// Instrumentation for the monotone audit.
struct TraceEvent {
    enum class Kind : std::uint8_t { BackwardSlot, ForwardSlot, RootSlot, LocalBound, Notify, GlobalBound, Push };
    Kind kind;
    int worker;
    VertexId vertex;
    std::uint32_t slot;
    double before;
    double after;
};

struct Trace {
    bool enabled = false;
    std::vector<TraceEvent> events;

    void add(TraceEvent e) {
        if (enabled) events.push_back(e);
    }
};

struct KernelOptions {
    bool prune = true;        // bound-driven pruning; off for the baseline
    bool sketches = false;    // estimates, approximate answers, candidate checks
    bool opt_backtrack = false;
    bool opt_bpads = false;
    bool opt_order = false;
    bool forward_after_backward = false;  // forward work only once backward search is globally done
};

struct KernelCounters {
    std::uint64_t backward_pops = 0;
    std::uint64_t forward_settles = 0;
    std::uint64_t forward_runs = 0;
    std::uint64_t pruned_candidates = 0;
    std::uint64_t approximate_offers = 0;
};

// An outbound data message before framing.
struct Outgoing {
    int target;
    Frame frame;
};

class RoutingFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-fragment search state for one query: backward expansion from keyword
// origins, forward expansion from partial roots, portal bookkeeping and the
// local answer heap. A whole graph is the m = 1 case.
class FragmentSearch {
public:
    FragmentSearch(const Fragment& frag, const Query& query, double inf, const SketchSet* sketches,
                   KernelOptions opts, Trace* trace = nullptr);

    // Hooks.
    std::function<void(double)> on_bound;  // local heap bound strictly decreased

    // Backward subtask.
    void backward_init();
    void backward_expand();
    void merge_backward(const Frame& f);
    bool has_backward_work();
    // Forward subtask.
    void apply_forward_match(const Frame& f);
    void apply_forward_request(const Frame& f, int from);
    void forward_expand();
    bool has_forward_work();

    // Bounds.
    double local_bound() const { return heap_.bound(); }
    double effective_bound() const;  // +inf until a bound exists
    void apply_push(double s);
    double pushed_bound() const { return pushed_; }
    double backward_radius() const;

    // Frontier floors: lower bound on any distance the backward search may
    // still produce for each query slot, as seen by this fragment.
    std::vector<double> floor_report();
    void set_floors(const std::vector<double>& global);
    // Smallest queued backward value per slot, dropped entries excluded.
    std::vector<double> frontier_report();
    // No backward work for slot j remains on any worker or in flight.
    void set_keyword_done(std::uint32_t j);
    const std::vector<double>& floors() const { return floor_; }
    void set_backward_done(bool done) { backward_done_ = done; }

    bool is_candidate(std::uint32_t key, const Budgets& f) const;

    std::vector<Outgoing> drain_outbox();

    const AnswerHeap& heap() const { return heap_; }
    std::vector<AnswerEntry> final_answers() const;
    std::size_t visited_count() const { return visited_count_; }
    const KernelCounters& counters() const { return counters_; }
    const Fragment& fragment() const { return frag_; }
    std::size_t slot_count() const { return nq_; }
    const BacktrackGraph& backtrack(std::uint32_t slot) const { return bt_[slot]; }

    // Current best slot of a local vertex (min of backward and forward values).
    Slot root_slot(std::uint32_t key, std::uint32_t j) const;
    double backward_value(VertexId v, std::uint32_t j) const;
    double forward_value(VertexId v, std::uint32_t j) const;

private:
    struct QItem {
        double d;
        std::uint32_t key;
        bool operator>(const QItem& o) const { return d != o.d ? d > o.d : key > o.key; }
    };
    using MinQueue = std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>>;

    std::size_t at(std::uint32_t key, std::uint32_t j) const { return static_cast<std::size_t>(key) * nq_ + j; }
    void visit(std::uint32_t key);
    void set_backward(std::uint32_t key, std::uint32_t j, double d, VertexId leaf);
    void set_forward(std::uint32_t key, std::uint32_t j, double d, VertexId leaf);
    void root_changed(std::uint32_t key);
    void offer(std::uint32_t key, double s, bool approximate, std::vector<Slot> slots);
    bool certified(std::uint32_t key, std::uint32_t j) const;
    // Admissible lower bound on the slot distance of any key.
    double lower_hint(std::uint32_t key, std::uint32_t j) const;
    double est_upper_cached(std::uint32_t key, std::uint32_t j);
    double est_lower_local(std::uint32_t key, std::uint32_t j) const;
    void clean_top(std::uint32_t j);
    void drop_queue(std::uint32_t j);

    struct Plan {
        std::uint32_t key;
        Budgets need;
        double partial;
    };
    std::vector<Plan> plan_roots();
    void forward_search(std::uint32_t source, const Budgets& need);
    void queue_match(std::uint32_t key, std::uint32_t j, double d, VertexId leaf, int only_target);

    const Fragment& frag_;
    Query query_;
    std::size_t nq_;
    double inf_;
    double tau_;  // query radius, kept below the sentinel
    const SketchSet* sk_;
    KernelOptions opt_;
    Trace* trace_;
    int wid_;

    AnswerHeap heap_;
    double pushed_;

    // Per (key, slot).
    std::vector<double> bdist_, fdist_;
    std::vector<VertexId> bleaf_, fleaf_;
    std::vector<double> fdone_;     // largest budget a forward search from this key covered
    std::vector<double> req_in_;    // largest budget requested from other fragments
    std::vector<double> req_sent_;  // largest budget requested for an out-portal
    std::vector<double> est_up_;    // cached est_upper, -2 when unknown
    std::vector<std::vector<int>> requesters_;

    std::vector<MinQueue> bq_;
    std::vector<double> dropped_;
    std::vector<double> floor_;
    std::vector<char> kw_done_;
    bool backward_done_ = false;

    std::vector<char> visited_;
    std::size_t visited_count_ = 0;
    std::vector<char> touched_flag_;
    std::vector<std::uint32_t> touched_;
    std::vector<double> offered_exact_, offered_approx_;

    std::vector<BacktrackGraph> bt_;
    std::vector<std::vector<std::uint32_t>> portal_sources_;  // per (out-portal key, slot)

    // Pending forward work imported from other fragments.
    std::vector<std::uint32_t> pending_sources_;
    std::vector<char> pending_flag_;

    // Scratch for forward Dijkstra.
    std::vector<double> fd_;
    std::vector<std::uint32_t> fparent_;
    std::vector<double> fparent_w_;
    std::vector<std::uint32_t> ftouched_;

    // Outboxes, keyed for coalescing.
    std::vector<std::vector<std::pair<std::uint32_t, double>>> out_backward_;  // per key
    std::vector<std::vector<std::pair<std::uint32_t, double>>> out_request_;   // per key
    struct MatchOut {
        int target;
        std::uint32_t key;
        std::uint32_t slot;
        double dist;
        VertexId leaf;
    };
    std::vector<MatchOut> out_match_;
    std::vector<std::uint32_t> out_backward_keys_, out_request_keys_;

    KernelCounters counters_;
};

// Packs a portal vertex and an optional leaf into the 8-byte vertex field.
inline std::uint64_t pack_vertex(VertexId v, VertexId leaf) {
    return static_cast<std::uint64_t>(v) | (static_cast<std::uint64_t>(leaf == kNoVertex ? 0u : leaf + 1u) << 32);
}
inline VertexId unpack_vertex(std::uint64_t x) { return static_cast<VertexId>(x & 0xffffffffu); }
inline VertexId unpack_leaf(std::uint64_t x) {
    auto hi = static_cast<std::uint32_t>(x >> 32);
    return hi == 0 ? kNoVertex : hi - 1;
}

}  // namespace dkws
