#include "dkws/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "dkws/wire.hpp"

namespace dkws {

std::optional<Variant> parse_variant(std::string_view name) {
    if (name == "baseline") return Variant::Baseline;
    if (name == "bf") return Variant::Bf;
    if (name == "pads") return Variant::Pads;
    if (name == "np") return Variant::Np;
    if (name == "pine") return Variant::Pine;
    return std::nullopt;
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Baseline: return "baseline";
        case Variant::Bf: return "bf";
        case Variant::Pads: return "pads";
        case Variant::Np: return "np";
        case Variant::Pine: return "pine";
    }
    return "?";
}

const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> v{Variant::Baseline, Variant::Bf, Variant::Pads, Variant::Np, Variant::Pine};
    return v;
}

bool uses_sketches(Variant v) { return v == Variant::Pads || v == Variant::Np || v == Variant::Pine; }
bool uses_notify_push(Variant v) { return v == Variant::Np || v == Variant::Pine; }

KernelOptions kernel_options(const RunConfig& cfg) {
    KernelOptions o;
    const bool opts = uses_sketches(cfg.variant);
    o.prune = cfg.variant != Variant::Baseline;
    o.sketches = uses_sketches(cfg.variant);
    o.opt_backtrack = cfg.opt_backtrack.value_or(opts);
    o.opt_bpads = cfg.opt_bpads.value_or(opts);
    o.opt_order = cfg.opt_order.value_or(opts);
    o.forward_after_backward = cfg.variant == Variant::Baseline;
    return o;
}

// ---- coordinator ----

Coordinator::Coordinator(int m, int threshold, double inf, Trace* trace)
    : m_(m), threshold_(threshold), s_(inf), trace_(trace) {
    table_.assign(static_cast<std::size_t>(m) + 1, inf);
    n_.assign(static_cast<std::size_t>(m) + 1, 0);
    last_pushed_.assign(static_cast<std::size_t>(m) + 1, inf);
}

std::vector<int> Coordinator::notify(int worker, double s) {
    auto& slot = table_[static_cast<std::size_t>(worker)];
    if (!(s < slot)) return {};
    if (trace_) trace_->add({TraceEvent::Kind::Notify, worker, kNoVertex, 0, slot, s});
    slot = s;
    ++n_[static_cast<std::size_t>(worker)];
    const double before = s_;
    s_ = *std::min_element(table_.begin() + 1, table_.end());
    if (trace_) trace_->add({TraceEvent::Kind::GlobalBound, 0, kNoVertex, 0, before, s_});
    return push_targets();
}

std::vector<int> Coordinator::push_targets() {
    std::vector<int> out;
    const std::uint64_t top = *std::max_element(n_.begin() + 1, n_.end());
    for (int j = 1; j <= m_; ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (top - n_[u] > static_cast<std::uint64_t>(threshold_) && table_[u] > s_ && s_ < last_pushed_[u]) {
            last_pushed_[u] = s_;
            out.push_back(j);
        }
    }
    return out;
}

// ---- selector ----

double staleness_backward(const std::vector<Frame>& frames, double s, double tau, double inf) {
    if (frames.empty()) return inf;
    double total = 0.0;
    for (const auto& f : frames)
        for (const auto& t : f.tuples) total += std::min(s - t.dist, tau);
    return total / static_cast<double>(frames.size());
}

double staleness_forward(const std::vector<Frame>& frames, double tau, double inf) {
    if (frames.empty()) return inf;
    double total = 0.0;
    for (const auto& f : frames)
        for (const auto& t : f.tuples) total += std::min(t.dist, tau);
    return total / static_cast<double>(frames.size());
}

Subtask select_subtask(double si_b, double si_f, double inf, bool backward_work, bool forward_work) {
    if (si_b >= inf && si_f >= inf) {
        if (backward_work) return Subtask::Backward;
        if (forward_work) return Subtask::Forward;
        return Subtask::Idle;
    }
    return si_b <= si_f ? Subtask::Backward : Subtask::Forward;
}

// ---- assemble ----

std::vector<Answer> assemble(const std::vector<std::vector<AnswerEntry>>& locals, std::size_t k) {
    std::map<VertexId, const AnswerEntry*> best;
    for (const auto& l : locals)
        for (const auto& e : l) {
            if (e.approximate) continue;
            auto it = best.find(e.root);
            if (it == best.end() || e.score < it->second->score) best[e.root] = &e;
        }
    std::vector<Answer> out;
    for (const auto& [root, e] : best) out.push_back({root, e->score, e->slots});
    std::stable_sort(out.begin(), out.end(), [](const Answer& a, const Answer& b) { return a.score < b.score; });
    if (out.size() > k) out.resize(k);
    return out;
}

// ---- run_query ----

namespace {

// Reserved keyword field in floor broadcasts.
constexpr std::uint32_t kKeywordDone = 0x80000000u;  // | slot

struct Worker {
    std::unique_ptr<FragmentSearch> kernel;
    std::vector<Frame> bbuf;
    std::vector<Frame> fbuf;
    std::vector<int> fbuf_from;
    std::vector<double> reported;  // last floor report per slot
};

Frame control_frame(MsgKind kind, std::uint64_t vertex, std::uint32_t slot, double d) {
    return Frame{kind, {{vertex, slot, d}}};
}

}  // namespace

RunResult run_query(const Graph& g, const Fragmentation& frag, const SketchSet* sketches, const Query& query,
                    const RunConfig& cfg) {
    query.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const KernelOptions ko = kernel_options(cfg);
    if (ko.sketches && !sketches) throw std::invalid_argument("variant " + variant_name(cfg.variant) + " needs sketches");
    const bool np = uses_notify_push(cfg.variant);
    const bool forced = cfg.forced_alternation.value_or(cfg.variant != Variant::Pine);
    const double inf = g.inf();
    const int m = frag.m;
    const std::size_t nq = query.keywords.size();

    RunResult res;
    res.trace.enabled = cfg.trace;
    Trace* trace = cfg.trace ? &res.trace : nullptr;
    Metrics& mt = res.metrics;

    const double open = std::numeric_limits<double>::infinity();
    Coordinator coord(m, cfg.np_threshold, open, trace);
    std::vector<Worker> workers(static_cast<std::size_t>(m));
    std::vector<std::pair<int, double>> queued_notifies;

    auto count = [&](const Frame& f) {
        ++mt.msg_count;
        mt.msg_bytes += frame_size(f);
        mt.bytes_by_kind[static_cast<std::size_t>(f.kind)] += frame_size(f);
    };
    auto deliver_pushes = [&](const std::vector<int>& targets) {
        for (int j : targets) {
            count(control_frame(MsgKind::Push, static_cast<std::uint64_t>(j), 0, coord.bound()));
            ++mt.pushes;
            if (trace) trace->add({TraceEvent::Kind::Push, j, kNoVertex, 0, open, coord.bound()});
            workers[static_cast<std::size_t>(j - 1)].kernel->apply_push(coord.bound());
        }
    };
    auto handle_notify = [&](int i, double s) {
        count(control_frame(MsgKind::Notify, static_cast<std::uint64_t>(i), 0, s));
        ++mt.notifies;
        deliver_pushes(coord.notify(i, s));
    };

    for (int i = 1; i <= m; ++i) {
        auto& w = workers[static_cast<std::size_t>(i - 1)];
        w.kernel = std::make_unique<FragmentSearch>(frag.fragment(i), query, inf, ko.sketches ? sketches : nullptr, ko,
                                                    trace);
        w.reported.assign(nq, -1.0);
        if (np) {
            w.kernel->on_bound = [&, i](double s) {
                if (cfg.deterministic) queued_notifies.emplace_back(i, s);
                else handle_notify(i, s);
            };
        }
    }

    std::vector<double> global_floor(nq, 0.0);
    std::vector<char> kw_done(nq, 0);
    bool backward_done = false;
    std::mt19937_64 rng(cfg.seed);
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);

    auto barrier = [&](std::vector<std::pair<int, Outgoing>>& sent) {
        // Data frames go through the codec so byte counts are the wire sizes.
        std::vector<std::uint8_t> buf;
        for (auto& [from, o] : sent) {
            buf.clear();
            encode_frame(o.frame, buf);
            std::size_t pos = 0;
            Frame f = decode_frame(buf, pos);
            ++mt.msg_count;
            mt.msg_bytes += buf.size();
            mt.bytes_by_kind[static_cast<std::size_t>(f.kind)] += buf.size();
            if (o.target < 1 || o.target > m) throw RoutingFault("message to unknown worker " + std::to_string(o.target));
            auto& w = workers[static_cast<std::size_t>(o.target - 1)];
            if (f.kind == MsgKind::Backward) {
                w.bbuf.push_back(std::move(f));
            } else {
                w.fbuf.push_back(std::move(f));
                w.fbuf_from.push_back(from);
            }
        }
        sent.clear();

        for (auto& [i, s] : queued_notifies) handle_notify(i, s);
        queued_notifies.clear();

        // Floors: each worker reports min(frontier, dropped, buffered backward values) per slot.
        std::vector<double> fl(nq, inf);
        for (int i = 1; i <= m; ++i) {
            auto& w = workers[static_cast<std::size_t>(i - 1)];
            auto rep = w.kernel->floor_report();
            for (const auto& f : w.bbuf)
                for (const auto& t : f.tuples)
                    if (t.keyword < nq) rep[t.keyword] = std::min(rep[t.keyword], t.dist);
            Frame report{MsgKind::FloorReport, {}};
            for (std::uint32_t j = 0; j < nq; ++j) {
                if (rep[j] != w.reported[j]) report.tuples.push_back({static_cast<std::uint64_t>(i), j, rep[j]});
                w.reported[j] = rep[j];
                fl[j] = std::min(fl[j], rep[j]);
            }
            if (!report.tuples.empty()) count(report);
        }
        // Keyword j is done once nothing for it is queued or buffered anywhere.
        std::vector<double> front(nq, inf);
        for (auto& w : workers) {
            auto fr = w.kernel->frontier_report();
            for (const auto& f : w.bbuf)
                for (const auto& t : f.tuples)
                    if (t.keyword < nq) fr[t.keyword] = std::min(fr[t.keyword], t.dist);
            for (std::uint32_t j = 0; j < nq; ++j) front[j] = std::min(front[j], fr[j]);
        }
        Frame bc{MsgKind::FloorBroadcast, {}};
        for (std::uint32_t j = 0; j < nq; ++j) {
            const double v = std::max(global_floor[j], fl[j]);
            if (v != global_floor[j]) bc.tuples.push_back({0, j, v});
            global_floor[j] = v;
        }
        bool done = true;
        for (std::uint32_t j = 0; j < nq; ++j) {
            if (front[j] >= inf && !kw_done[j]) {
                kw_done[j] = 1;
                bc.tuples.push_back({0, kKeywordDone | j, 0.0});
            }
            done = done && kw_done[j];
        }
        backward_done = done;
        for (auto& w : workers) {
            if (!bc.tuples.empty()) count(bc);
            w.kernel->set_floors(global_floor);
            for (std::uint32_t j = 0; j < nq; ++j)
                if (kw_done[j]) w.kernel->set_keyword_done(j);
            w.kernel->set_backward_done(backward_done);
        }
    };

    std::vector<std::pair<int, Outgoing>> sent;
    auto collect = [&](int i) {
        for (auto& o : workers[static_cast<std::size_t>(i - 1)].kernel->drain_outbox()) sent.emplace_back(i, std::move(o));
    };

    // Superstep 1: PEval of both subtasks.
    mt.supersteps = 1;
    if (!cfg.deterministic) std::shuffle(order.begin(), order.end(), rng);
    for (int idx : order) {
        auto& w = workers[static_cast<std::size_t>(idx)];
        w.kernel->backward_init();
        w.kernel->backward_expand();
        w.kernel->forward_expand();
        collect(idx + 1);
    }
    barrier(sent);

    for (;;) {
        bool any = false;
        for (auto& w : workers) {
            if (!w.bbuf.empty() || !w.fbuf.empty() || w.kernel->has_backward_work() || w.kernel->has_forward_work()) {
                any = true;
                break;
            }
        }
        if (!any) break;
        if (mt.supersteps >= cfg.max_supersteps) throw std::runtime_error("superstep limit reached");
        ++mt.supersteps;
        const bool even = mt.supersteps % 2 == 0;
        if (!cfg.deterministic) std::shuffle(order.begin(), order.end(), rng);
        for (int idx : order) {
            auto& w = workers[static_cast<std::size_t>(idx)];
            auto& k = *w.kernel;
            double si_b = staleness_backward(w.bbuf, k.effective_bound(), query.tau, open);
            double si_f = staleness_forward(w.fbuf, query.tau, open);
            Subtask pick;
            if (forced) {
                if (even) pick = (!w.fbuf.empty() || k.has_forward_work()) ? Subtask::Forward : Subtask::Idle;
                else pick = (!w.bbuf.empty() || k.has_backward_work()) ? Subtask::Backward : Subtask::Idle;
            } else {
                pick = select_subtask(si_b, si_f, open, k.has_backward_work(), k.has_forward_work());
            }
            if (pick == Subtask::Backward) {
                ++mt.bkws_steps;
                for (const auto& f : w.bbuf) k.merge_backward(f);
                w.bbuf.clear();
                k.backward_expand();
            } else if (pick == Subtask::Forward) {
                ++mt.fkws_steps;
                for (const auto& f : w.fbuf)
                    if (f.kind == MsgKind::ForwardMatch) k.apply_forward_match(f);
                for (std::size_t x = 0; x < w.fbuf.size(); ++x)
                    if (w.fbuf[x].kind == MsgKind::ForwardRequest) k.apply_forward_request(w.fbuf[x], w.fbuf_from[x]);
                w.fbuf.clear();
                w.fbuf_from.clear();
                k.forward_expand();
            }
            collect(idx + 1);
        }
        barrier(sent);
    }

    std::vector<std::vector<AnswerEntry>> locals;
    for (auto& w : workers) {
        locals.push_back(w.kernel->final_answers());
        mt.visited_per_worker.push_back(w.kernel->visited_count());
        mt.visited_nodes += w.kernel->visited_count();
        const auto& c = w.kernel->counters();
        mt.kernel.backward_pops += c.backward_pops;
        mt.kernel.forward_settles += c.forward_settles;
        mt.kernel.forward_runs += c.forward_runs;
        mt.kernel.pruned_candidates += c.pruned_candidates;
        mt.kernel.approximate_offers += c.approximate_offers;
    }
    res.answers = assemble(locals, query.k);
    mt.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ---- audit ----

std::vector<std::string> audit_trace(const Trace& t, int m) {
    std::vector<std::string> bad;
    std::unordered_map<std::uint64_t, double> slots;
    slots.reserve(t.events.size());
    std::vector<double> local(static_cast<std::size_t>(m) + 1, -1.0);
    std::vector<double> table(static_cast<std::size_t>(m) + 1, -1.0);
    double s = -1.0;
    std::size_t idx = 0;
    for (const auto& e : t.events) {
        auto where = [&] { return "event " + std::to_string(idx) + ": "; };
        switch (e.kind) {
            case TraceEvent::Kind::BackwardSlot:
            case TraceEvent::Kind::ForwardSlot:
            case TraceEvent::Kind::RootSlot: {
                if (e.after > e.before) bad.push_back(where() + "slot increased");
                // kind:2 | worker:10 | slot:20 | vertex:32
                const std::uint64_t key = (static_cast<std::uint64_t>(e.kind) << 62) |
                                          (static_cast<std::uint64_t>(e.worker & 0x3ff) << 52) |
                                          (static_cast<std::uint64_t>(e.slot & 0xfffff) << 32) | e.vertex;
                auto it = slots.find(key);
                if (it != slots.end() && e.after > it->second) bad.push_back(where() + "slot above its last value");
                slots[key] = e.after;
                break;
            }
            case TraceEvent::Kind::LocalBound: {
                auto& l = local[static_cast<std::size_t>(e.worker)];
                if (e.after > e.before || (l >= 0.0 && e.after > l)) bad.push_back(where() + "S_i increased");
                l = e.after;
                break;
            }
            case TraceEvent::Kind::Notify: {
                auto& l = table[static_cast<std::size_t>(e.worker)];
                if (e.after > e.before) bad.push_back(where() + "notify raised a bound");
                l = e.after;
                break;
            }
            case TraceEvent::Kind::GlobalBound: {
                if (e.after > e.before || (s >= 0.0 && e.after > s)) bad.push_back(where() + "S increased");
                s = e.after;
                double mn = -1.0;
                for (int i = 1; i <= m; ++i) {
                    double v = table[static_cast<std::size_t>(i)];
                    if (v >= 0.0) mn = mn < 0.0 ? v : std::min(mn, v);
                }
                if (mn >= 0.0 && s != mn) bad.push_back(where() + "S differs from min of notified S_i");
                break;
            }
            case TraceEvent::Kind::Push:
                if (s >= 0.0 && e.after != s) bad.push_back(where() + "push carries a value other than S");
                break;
        }
        ++idx;
    }
    return bad;
}

}  // namespace dkws
