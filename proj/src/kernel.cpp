#include "dkws/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace dkws {

double score(const Match& m) {
    double s = 0.0;
    for (const auto& slot : m.slots) s += slot.dist;
    return s;
}

// ---- AnswerHeap ----

const AnswerEntry* AnswerHeap::find(VertexId root) const {
    for (const auto& e : entries_)
        if (e.root == root) return &e;
    return nullptr;
}

double AnswerHeap::worst_score() const { return entries_[worst_index()].score; }

std::size_t AnswerHeap::worst_index() const {
    std::size_t w = 0;
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        const auto& a = entries_[i];
        const auto& b = entries_[w];
        if (a.score > b.score || (a.score == b.score && a.seq > b.seq)) w = i;
    }
    return w;
}

bool AnswerHeap::offer(VertexId root, double s, bool approximate, std::vector<Slot> slots) {
    if (k_ == 0) return false;
    const double before = bound();
    for (auto& e : entries_) {
        if (e.root != root) continue;
        if (s < e.score || (s == e.score && e.approximate && !approximate)) {
            e.score = s;
            e.approximate = approximate;
            e.slots = std::move(slots);
            return bound() != before;
        }
        return false;
    }
    if (full()) {
        if (!(s < worst_score())) return false;
        entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(worst_index()));
    }
    entries_.push_back({root, s, approximate, next_seq_++, std::move(slots)});
    return bound() != before;
}

std::vector<AnswerEntry> AnswerHeap::sorted() const {
    auto out = entries_;
    std::sort(out.begin(), out.end(), [](const AnswerEntry& a, const AnswerEntry& b) {
        return a.score != b.score ? a.score < b.score : a.seq < b.seq;
    });
    return out;
}

bool answer_offer(AnswerHeap& a, const Match& m) { return a.offer(m.root, score(m), m.approximate, m.slots); }

// ---- FragmentSearch ----

FragmentSearch::FragmentSearch(const Fragment& frag, const Query& query, double inf, const SketchSet* sketches,
                               KernelOptions opts, Trace* trace)
    : frag_(frag),
      query_(query),
      nq_(query.keywords.size()),
      inf_(inf),
      tau_(std::min(query.tau, std::nextafter(inf, 0.0))),
      sk_(sketches),
      opt_(opts),
      trace_(trace),
      wid_(frag.id),
      heap_(query.k, std::numeric_limits<double>::infinity()),
      pushed_(std::numeric_limits<double>::infinity()) {
    if (!sk_) opt_.sketches = false;
    const std::size_t keys = frag_.key_count();
    const std::size_t local = frag_.local_count();
    bdist_.assign(keys * nq_, inf_);
    fdist_.assign(keys * nq_, inf_);
    bleaf_.assign(keys * nq_, kNoVertex);
    fleaf_.assign(keys * nq_, kNoVertex);
    fdone_.assign(keys * nq_, -1.0);
    req_in_.assign(keys * nq_, -1.0);
    req_sent_.assign(keys * nq_, -1.0);
    est_up_.assign(local * nq_, -2.0);
    requesters_.assign(keys, {});
    bq_.resize(nq_);
    dropped_.assign(nq_, inf_);
    floor_.assign(nq_, 0.0);
    kw_done_.assign(nq_, 0);
    visited_.assign(keys, 0);
    touched_flag_.assign(local, 0);
    // Scores may exceed the distance sentinel, so "no bound" is +infinity.
    offered_exact_.assign(local, std::numeric_limits<double>::infinity());
    offered_approx_.assign(local, std::numeric_limits<double>::infinity());
    bt_.resize(nq_);
    if (!opt_.opt_backtrack) portal_sources_.assign(keys * nq_, {});
    pending_flag_.assign(keys, 0);
    fd_.assign(keys, inf_);
    fparent_.assign(keys, kNoKey);
    fparent_w_.assign(keys, 0.0);
    out_backward_.assign(keys, {});
    out_request_.assign(keys, {});
}

double FragmentSearch::effective_bound() const { return std::min(heap_.bound(), pushed_); }



double FragmentSearch::backward_radius() const {
    if (!opt_.prune) return tau_;
    return std::min(tau_, effective_bound() / static_cast<double>(nq_));
}

void FragmentSearch::apply_push(double s) {
    if (!(s < pushed_)) return;
    const double before = effective_bound();
    pushed_ = s;
    const double after = effective_bound();
    if (trace_ && after != before) trace_->add({TraceEvent::Kind::LocalBound, wid_, kNoVertex, 0, before, after});
}

void FragmentSearch::visit(std::uint32_t key) {
    if (!visited_[key]) {
        visited_[key] = 1;
        ++visited_count_;
    }
}

Slot FragmentSearch::root_slot(std::uint32_t key, std::uint32_t j) const {
    const auto i = at(key, j);
    return bdist_[i] <= fdist_[i] ? Slot{bleaf_[i], bdist_[i]} : Slot{fleaf_[i], fdist_[i]};
}

double FragmentSearch::backward_value(VertexId v, std::uint32_t j) const {
    auto key = frag_.key_of(v);
    return key == kNoKey ? inf_ : bdist_[at(key, j)];
}

double FragmentSearch::forward_value(VertexId v, std::uint32_t j) const {
    auto key = frag_.key_of(v);
    return key == kNoKey ? inf_ : fdist_[at(key, j)];
}

void FragmentSearch::set_backward(std::uint32_t key, std::uint32_t j, double d, VertexId leaf) {
    const auto i = at(key, j);
    const double before = bdist_[i];
    const double comb_before = std::min(before, fdist_[i]);
    bdist_[i] = d;
    bleaf_[i] = leaf;
    if (trace_) {
        const VertexId v = frag_.key_vertex[key];
        trace_->add({TraceEvent::Kind::BackwardSlot, wid_, v, j, before, d});
        if (frag_.is_local_key(key) && d < comb_before)
            trace_->add({TraceEvent::Kind::RootSlot, wid_, v, j, comb_before, d});
    }
    if (frag_.is_local_key(key)) root_changed(key);
}

void FragmentSearch::set_forward(std::uint32_t key, std::uint32_t j, double d, VertexId leaf) {
    const auto i = at(key, j);
    const double before = fdist_[i];
    const double comb_before = std::min(before, bdist_[i]);
    fdist_[i] = d;
    fleaf_[i] = leaf;
    if (trace_) {
        const VertexId v = frag_.key_vertex[key];
        trace_->add({TraceEvent::Kind::ForwardSlot, wid_, v, j, before, d});
        if (frag_.is_local_key(key) && d < comb_before)
            trace_->add({TraceEvent::Kind::RootSlot, wid_, v, j, comb_before, d});
    }
    if (!frag_.is_local_key(key)) return;
    root_changed(key);
    if (frag_.is_in_portal[key] && !requesters_[key].empty()) queue_match(key, j, d, leaf, -1);
}

double FragmentSearch::est_upper_cached(std::uint32_t key, std::uint32_t j) {
    double& c = est_up_[at(key, j)];
    if (c < -1.0) {
        auto e = sk_->est_upper(frag_.key_vertex[key], query_.keywords[j]);
        c = e ? *e : inf_;
    }
    return c;
}

double FragmentSearch::est_lower_local(std::uint32_t key, std::uint32_t j) const {
    if (!opt_.sketches || !frag_.is_local_key(key)) return 0.0;
    return sk_->est_lower(frag_.key_vertex[key], query_.keywords[j]);
}

void FragmentSearch::root_changed(std::uint32_t key) {
    if (!touched_flag_[key]) {
        touched_flag_[key] = 1;
        touched_.push_back(key);
    }
    double total = 0.0;
    bool complete = true;
    for (std::uint32_t j = 0; j < nq_; ++j) {
        const auto i = at(key, j);
        const double c = std::min(bdist_[i], fdist_[i]);
        if (c > tau_) complete = false;
        else total += c;
    }
    if (complete) {
        if (total < offered_exact_[key]) {
            offered_exact_[key] = total;
            std::vector<Slot> slots(nq_);
            for (std::uint32_t j = 0; j < nq_; ++j) slots[j] = root_slot(key, j);
            offer(key, total, false, std::move(slots));
        }
        return;
    }
    if (!opt_.sketches || !opt_.prune) return;
    double approx = 0.0;
    for (std::uint32_t j = 0; j < nq_; ++j) {
        const auto i = at(key, j);
        const double c = std::min({bdist_[i], fdist_[i], est_upper_cached(key, j)});
        if (c > tau_) return;
        approx += c;
    }
    if (approx < offered_approx_[key] && approx < offered_exact_[key]) {
        offered_approx_[key] = approx;
        ++counters_.approximate_offers;
        offer(key, approx, true, {});
    }
}

void FragmentSearch::offer(std::uint32_t key, double s, bool approximate, std::vector<Slot> slots) {
    const double eff_before = effective_bound();
    const double heap_before = heap_.bound();
    if (!heap_.offer(frag_.key_vertex[key], s, approximate, std::move(slots))) return;
    const double eff_after = effective_bound();
    if (trace_ && eff_after != eff_before)
        trace_->add({TraceEvent::Kind::LocalBound, wid_, kNoVertex, 0, eff_before, eff_after});
    if (heap_.bound() < heap_before && on_bound) on_bound(heap_.bound());
}

// ---- backward subtask ----

void FragmentSearch::backward_init() {
    for (std::uint32_t key = 0; key < frag_.local_count(); ++key) {
        for (std::uint32_t j = 0; j < nq_; ++j) {
            if (frag_.has_label(key, query_.keywords[j])) {
                set_backward(key, j, 0.0, frag_.key_vertex[key]);
                bq_[j].push({0.0, key});
            }
        }
    }
}

void FragmentSearch::clean_top(std::uint32_t j) {
    auto& q = bq_[j];
    while (!q.empty() && q.top().d > bdist_[at(q.top().key, j)]) q.pop();
}

void FragmentSearch::drop_queue(std::uint32_t j) {
    auto& q = bq_[j];
    if (q.empty()) return;
    dropped_[j] = std::min(dropped_[j], q.top().d);
    q = MinQueue();
}

void FragmentSearch::backward_expand() {
    for (;;) {
        int pick = -1;
        double top = 0.0;
        for (std::uint32_t j = 0; j < nq_; ++j) {
            clean_top(j);
            if (bq_[j].empty()) continue;
            if (pick < 0 || bq_[j].top().d < top) {
                pick = static_cast<int>(j);
                top = bq_[j].top().d;
            }
        }
        if (pick < 0) return;
        const auto j = static_cast<std::uint32_t>(pick);
        if (top > backward_radius()) {
            drop_queue(j);
            continue;
        }
        const std::uint32_t x = bq_[j].top().key;
        bq_[j].pop();
        ++counters_.backward_pops;
        visit(x);
        const VertexId leaf = bleaf_[at(x, j)];
        if (frag_.is_local_key(x) && frag_.is_in_portal[x]) {
            auto& pending = out_backward_[x];
            if (pending.empty()) out_backward_keys_.push_back(x);
            bool found = false;
            for (auto& [pj, pd] : pending)
                if (pj == j) pd = top, found = true;
            if (!found) pending.emplace_back(j, top);
        }
        for (const LocalArc& a : frag_.in_adj[x]) {
            const double nd = top + a.w;
            if (!(nd < bdist_[at(a.key, j)])) continue;
            if (nd > backward_radius()) {
                dropped_[j] = std::min(dropped_[j], nd);
                continue;
            }
            set_backward(a.key, j, nd, leaf);
            bq_[j].push({nd, a.key});
        }
    }
}

void FragmentSearch::merge_backward(const Frame& f) {
    for (const Tuple& t : f.tuples) {
        const VertexId v = unpack_vertex(t.vertex);
        const auto key = frag_.key_of(v);
        if (key == kNoKey || frag_.is_local_key(key) || t.keyword >= nq_)
            throw RoutingFault("backward message for vertex " + std::to_string(v) + " is not an out-portal of fragment " +
                               std::to_string(wid_));
        if (!(t.dist < bdist_[at(key, t.keyword)])) continue;
        if (t.dist > backward_radius()) {
            dropped_[t.keyword] = std::min(dropped_[t.keyword], t.dist);
            continue;
        }
        set_backward(key, t.keyword, t.dist, unpack_leaf(t.vertex));
        bq_[t.keyword].push({t.dist, key});
    }
}

bool FragmentSearch::has_backward_work() {
    for (std::uint32_t j = 0; j < nq_; ++j) {
        clean_top(j);
        if (bq_[j].empty()) continue;
        if (bq_[j].top().d > backward_radius()) drop_queue(j);
        else return true;
    }
    return false;
}

std::vector<double> FragmentSearch::floor_report() {
    has_backward_work();
    std::vector<double> out(nq_);
    for (std::uint32_t j = 0; j < nq_; ++j) {
        clean_top(j);
        out[j] = bq_[j].empty() ? dropped_[j] : std::min(dropped_[j], bq_[j].top().d);
    }
    return out;
}

std::vector<double> FragmentSearch::frontier_report() {
    has_backward_work();
    std::vector<double> out(nq_, inf_);
    for (std::uint32_t j = 0; j < nq_; ++j)
        if (!bq_[j].empty()) out[j] = bq_[j].top().d;
    return out;
}

void FragmentSearch::set_floors(const std::vector<double>& global) {
    for (std::uint32_t j = 0; j < nq_ && j < global.size(); ++j) floor_[j] = std::max(floor_[j], global[j]);
}

void FragmentSearch::set_keyword_done(std::uint32_t j) {
    if (j < nq_) kw_done_[j] = 1;
}

bool FragmentSearch::certified(std::uint32_t key, std::uint32_t j) const { return bdist_[at(key, j)] < floor_[j]; }

double FragmentSearch::lower_hint(std::uint32_t key, std::uint32_t j) const {
    if (certified(key, j)) return bdist_[at(key, j)];
    return std::max(floor_[j], est_lower_local(key, j));
}

// ---- forward subtask ----

bool FragmentSearch::is_candidate(std::uint32_t key, const Budgets& f) const {
    if (!opt_.sketches || !frag_.is_local_key(key)) return true;
    const VertexId u = frag_.key_vertex[key];
    const double border = opt_.opt_bpads ? sk_->est_lower_to_border(u, frag_.id, inf_) : 0.0;
    for (std::uint32_t j = 0; j < nq_ && j < f.size(); ++j) {
        if (f[j] < 0.0) continue;
        if (sk_->est_lower(u, query_.keywords[j]) > f[j] && border > f[j]) return false;
    }
    return true;
}

std::vector<FragmentSearch::Plan> FragmentSearch::plan_roots() {
    std::vector<Plan> plans;
    if (opt_.forward_after_backward && !backward_done_) return plans;
    const double s = effective_bound();
    std::vector<double> lb(nq_);
    std::vector<char> cert(nq_);
    for (std::uint32_t key : touched_) {
        bool any_cert = false, invalid = false;
        double sum = 0.0, partial = 0.0;
        for (std::uint32_t j = 0; j < nq_; ++j) {
            cert[j] = certified(key, j);
            if (cert[j]) {
                lb[j] = bdist_[at(key, j)];
                any_cert = true;
            } else {
                lb[j] = std::max(floor_[j], est_lower_local(key, j));
            }
            if (lb[j] > tau_) invalid = true;
            sum += lb[j];
            const double c = root_slot(key, j).dist;
            if (c <= tau_) partial += c;
        }
        if (!any_cert || invalid) continue;
        if (opt_.prune && sum > s) continue;
        Plan p{key, Budgets(nq_, -1.0), partial};
        bool any = false;
        for (std::uint32_t j = 0; j < nq_; ++j) {
            // Forward work waits until the keyword's backward frontier is empty everywhere.
            if (cert[j] || !kw_done_[j]) continue;
            const double b = opt_.prune ? std::min(tau_, s - (sum - lb[j])) : tau_;
            if (fdone_[at(key, j)] >= b) continue;
            p.need[j] = b;
            any = true;
        }
        if (any) plans.push_back(std::move(p));
    }
    return plans;
}

bool FragmentSearch::has_forward_work() { return !pending_sources_.empty() || !plan_roots().empty(); }

void FragmentSearch::queue_match(std::uint32_t key, std::uint32_t j, double d, VertexId leaf, int only_target) {
    auto send = [&](int t) { out_match_.push_back({t, key, j, d, leaf}); };
    if (only_target >= 0) send(only_target);
    else
        for (int t : requesters_[key]) send(t);
}

void FragmentSearch::apply_forward_request(const Frame& f, int from) {
    for (const Tuple& t : f.tuples) {
        const VertexId v = unpack_vertex(t.vertex);
        const auto key = frag_.key_of(v);
        if (key == kNoKey || !frag_.is_local_key(key) || !frag_.is_in_portal[key] || t.keyword >= nq_)
            throw RoutingFault("forward request for vertex " + std::to_string(v) + " is not an in-portal of fragment " +
                               std::to_string(wid_));
        auto& rq = requesters_[key];
        if (std::find(rq.begin(), rq.end(), from) == rq.end()) rq.push_back(from);
        const auto i = at(key, t.keyword);
        req_in_[i] = std::max(req_in_[i], t.dist);
        const Slot cur = root_slot(key, t.keyword);
        if (cur.dist <= tau_) queue_match(key, t.keyword, cur.dist, cur.leaf, from);
        if (req_in_[i] > fdone_[i] && !pending_flag_[key]) {
            pending_flag_[key] = 1;
            pending_sources_.push_back(key);
        }
    }
}

void FragmentSearch::apply_forward_match(const Frame& f) {
    std::vector<DistList> refined(nq_);
    for (const Tuple& t : f.tuples) {
        const VertexId v = unpack_vertex(t.vertex);
        const auto key = frag_.key_of(v);
        if (key == kNoKey || frag_.is_local_key(key) || t.keyword >= nq_)
            throw RoutingFault("forward match for vertex " + std::to_string(v) + " is not an out-portal of fragment " +
                               std::to_string(wid_));
        if (!(t.dist < fdist_[at(key, t.keyword)])) continue;
        set_forward(key, t.keyword, t.dist, unpack_leaf(t.vertex));
        refined[t.keyword].emplace_back(key, t.dist);
    }
    for (std::uint32_t j = 0; j < nq_; ++j) {
        if (refined[j].empty()) continue;
        std::sort(refined[j].begin(), refined[j].end());
        if (opt_.opt_backtrack) {
            for (const Reached& r : propagate_update_batch(bt_[j], refined[j], tau_)) {
                const auto y = r.vertex;
                if (!frag_.is_local_key(y)) continue;
                const auto i = at(y, j);
                if (fdone_[i] < 0.0 || !(r.dist < fdist_[i])) continue;
                set_forward(y, j, r.dist, fleaf_[at(r.origin, j)]);
            }
        } else {
            std::vector<std::uint32_t> sources;
            for (const auto& [x, d] : refined[j])
                for (auto s : portal_sources_[at(x, j)]) sources.push_back(s);
            std::sort(sources.begin(), sources.end());
            sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
            for (auto s : sources) {
                Budgets need(nq_, -1.0);
                need[j] = fdone_[at(s, j)];
                forward_search(s, need);
            }
        }
    }
}

void FragmentSearch::forward_search(std::uint32_t s, const Budgets& need) {
    ++counters_.forward_runs;
    std::vector<double> best(nq_, inf_);
    std::vector<VertexId> best_leaf(nq_, kNoVertex);
    std::vector<char> act(nq_, 0);
    std::vector<std::uint32_t> js;
    for (std::uint32_t j = 0; j < nq_; ++j) {
        if (need[j] < 0.0) continue;
        js.push_back(j);
        const Slot cur = root_slot(s, j);
        best[j] = cur.dist;
        best_leaf[j] = cur.leaf;
    }
    auto cand = [&](std::uint32_t j, double d, VertexId leaf) {
        if (d < best[j]) {
            best[j] = d;
            best_leaf[j] = leaf;
        }
    };

    MinQueue pq;
    fd_[s] = 0.0;
    ftouched_.push_back(s);
    pq.push({0.0, s});
    while (!pq.empty()) {
        const auto [delta, x] = pq.top();
        pq.pop();
        if (delta > fd_[x]) continue;
        bool any = false, live = false;
        for (auto j : js) {
            const bool open = delta <= need[j] && delta < best[j];
            const double h = delta + lower_hint(x, j);
            act[j] = open && h <= need[j] && h < best[j];
            live = live || open;
            any = any || act[j];
        }
        if (!live) break;
        if (!any) continue;
        visit(x);
        ++counters_.forward_settles;
        const bool local = frag_.is_local_key(x);
        for (auto j : js) {
            if (!act[j]) continue;
            if (opt_.opt_backtrack && x != s) bt_[j].add_edge(fparent_[x], x, fparent_w_[x]);
            const auto i = at(x, j);
            if (local && frag_.has_label(x, query_.keywords[j])) cand(j, delta, frag_.key_vertex[x]);
            if (bdist_[i] < inf_) cand(j, delta + bdist_[i], bleaf_[i]);
            if (x != s && fdist_[i] < inf_) cand(j, delta + fdist_[i], fleaf_[i]);
            if (certified(x, j)) {
                act[j] = 0;  // exact here, nothing shorter lies beyond x
                continue;
            }
            if (local) continue;
            const double lim = std::min(need[j], best[j]) - delta;
            if (lim >= 0.0 && lim > req_sent_[i]) {
                req_sent_[i] = lim;
                auto& pending = out_request_[x];
                if (pending.empty()) out_request_keys_.push_back(x);
                bool found = false;
                for (auto& [pj, pd] : pending)
                    if (pj == j) pd = std::max(pd, lim), found = true;
                if (!found) pending.emplace_back(j, lim);
            }
            if (!opt_.opt_backtrack) {
                auto& srcs = portal_sources_[i];
                if (std::find(srcs.begin(), srcs.end(), s) == srcs.end()) srcs.push_back(s);
            }
        }
        if (!local) continue;
        for (const LocalArc& a : frag_.out_adj[x]) {
            const double nd = delta + a.w;
            if (!(nd < fd_[a.key])) continue;
            bool useful = false;
            for (auto j : js) {
                if (!act[j]) continue;
                const double lb = nd + lower_hint(a.key, j);
                if (lb > need[j] || !(lb < best[j])) continue;
                useful = true;
                break;
            }
            if (!useful) continue;
            if (fd_[a.key] == inf_) ftouched_.push_back(a.key);
            fd_[a.key] = nd;
            fparent_[a.key] = x;
            fparent_w_[a.key] = a.w;
            pq.push({nd, a.key});
        }
    }
    for (auto t : ftouched_) fd_[t] = inf_;
    ftouched_.clear();

    for (auto j : js) {
        const auto i = at(s, j);
        fdone_[i] = std::max(fdone_[i], need[j]);
        if (best[j] < fdist_[i] && best[j] <= tau_) set_forward(s, j, best[j], best_leaf[j]);
    }
}

void FragmentSearch::forward_expand() {
    auto sources = std::move(pending_sources_);
    pending_sources_.clear();
    std::sort(sources.begin(), sources.end());
    for (auto key : sources) {
        pending_flag_[key] = 0;
        Budgets need(nq_, -1.0);
        bool any = false;
        for (std::uint32_t j = 0; j < nq_; ++j) {
            const auto i = at(key, j);
            if (!(req_in_[i] > fdone_[i])) continue;
            Budgets one(nq_, -1.0);
            one[j] = req_in_[i];
            if (!is_candidate(key, one)) {
                fdone_[i] = req_in_[i];
                ++counters_.pruned_candidates;
                continue;
            }
            need[j] = req_in_[i];
            any = true;
        }
        if (any) forward_search(key, need);
    }

    auto plans = plan_roots();
    std::vector<std::uint32_t> order;
    if (opt_.opt_order) {
        std::vector<std::pair<VertexId, double>> scored;
        for (const auto& p : plans) scored.emplace_back(p.key, p.partial);
        order = order_frontier(std::move(scored));
    } else {
        for (const auto& p : plans) order.push_back(p.key);
        std::sort(order.begin(), order.end());
    }
    std::unordered_map<std::uint32_t, std::size_t> index;
    for (std::size_t i = 0; i < plans.size(); ++i) index[plans[i].key] = i;
    for (auto key : order) {
        Budgets need = plans[index[key]].need;
        // The bound may have tightened since planning; never widen.
        const double s = effective_bound();
        if (opt_.prune) {
            double sum = 0.0;
            std::vector<double> lb(nq_);
            for (std::uint32_t j = 0; j < nq_; ++j) {
                lb[j] = certified(key, j) ? bdist_[at(key, j)] : std::max(floor_[j], est_lower_local(key, j));
                sum += lb[j];
            }
            if (sum > s) continue;
            for (std::uint32_t j = 0; j < nq_; ++j)
                if (need[j] >= 0.0) need[j] = std::min(need[j], s - (sum - lb[j]));
        }
        if (!is_candidate(key, need)) {
            for (std::uint32_t j = 0; j < nq_; ++j)
                if (need[j] >= 0.0) fdone_[at(key, j)] = std::max(fdone_[at(key, j)], need[j]);
            ++counters_.pruned_candidates;
            continue;
        }
        forward_search(key, need);
    }
}

// ---- outbox ----

std::vector<Outgoing> FragmentSearch::drain_outbox() {
    std::vector<Outgoing> out;
    std::sort(out_backward_keys_.begin(), out_backward_keys_.end());
    for (auto key : out_backward_keys_) {
        auto& pending = out_backward_[key];
        std::sort(pending.begin(), pending.end());
        Frame f{MsgKind::Backward, {}};
        const VertexId v = frag_.key_vertex[key];
        for (const auto& [j, d] : pending) f.tuples.push_back({pack_vertex(v, bleaf_[at(key, j)]), j, d});
        for (int t : frag_.portal_targets[key]) out.push_back({t, f});
        pending.clear();
    }
    out_backward_keys_.clear();

    std::sort(out_request_keys_.begin(), out_request_keys_.end());
    for (auto key : out_request_keys_) {
        auto& pending = out_request_[key];
        std::sort(pending.begin(), pending.end());
        Frame f{MsgKind::ForwardRequest, {}};
        const VertexId v = frag_.key_vertex[key];
        for (const auto& [j, d] : pending) f.tuples.push_back({pack_vertex(v, kNoVertex), j, d});
        out.push_back({frag_.portal_targets[key].front(), std::move(f)});
        pending.clear();
    }
    out_request_keys_.clear();

    // Keep the smallest value per (target, key, slot), one frame per (target, key).
    std::map<std::tuple<int, std::uint32_t, std::uint32_t>, std::pair<double, VertexId>> best;
    for (const auto& m : out_match_) {
        auto k = std::make_tuple(m.target, m.key, m.slot);
        auto it = best.find(k);
        if (it == best.end() || m.dist < it->second.first) best[k] = {m.dist, m.leaf};
    }
    out_match_.clear();
    for (auto it = best.begin(); it != best.end();) {
        const int target = std::get<0>(it->first);
        const auto key = std::get<1>(it->first);
        Frame f{MsgKind::ForwardMatch, {}};
        const VertexId v = frag_.key_vertex[key];
        for (; it != best.end() && std::get<0>(it->first) == target && std::get<1>(it->first) == key; ++it)
            f.tuples.push_back({pack_vertex(v, it->second.second), std::get<2>(it->first), it->second.first});
        out.push_back({target, std::move(f)});
    }
    return out;
}

std::vector<AnswerEntry> FragmentSearch::final_answers() const {
    std::vector<AnswerEntry> out;
    for (auto& e : heap_.sorted())
        if (!e.approximate) out.push_back(e);
    return out;
}

}  // namespace dkws
