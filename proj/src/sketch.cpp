#include "dkws/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace dkws {

std::vector<double> pagerank(const Graph& g, double damping, double tol, std::size_t max_iters) {
    if (!(damping > 0.0 && damping < 1.0)) throw std::invalid_argument("damping must be in (0,1)");
    const std::size_t n = g.vertex_count;
    if (n == 0) return {};
    std::vector<double> pr(n, 1.0 / static_cast<double>(n)), next(n);
    for (std::size_t it = 0; it < max_iters; ++it) {
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (g.out_adj[v].empty()) dangling += pr[v];
        const double base = (1.0 - damping) / static_cast<double>(n) + damping * dangling / static_cast<double>(n);
        std::fill(next.begin(), next.end(), base);
        for (std::size_t v = 0; v < n; ++v) {
            const auto& adj = g.out_adj[v];
            if (adj.empty()) continue;
            const double share = damping * pr[v] / static_cast<double>(adj.size());
            for (const Arc& a : adj) next[a.v] += share;
        }
        double residual = 0.0;
        for (std::size_t v = 0; v < n; ++v) residual += std::abs(next[v] - pr[v]);
        pr.swap(next);
        if (residual < tol) break;
    }
    return pr;
}

namespace {

using QItem = std::pair<double, VertexId>;
using MinQueue = std::priority_queue<QItem, std::vector<QItem>, std::greater<>>;

// One pruned Dijkstra pass per center in rank order. `adj` decides the
// direction; entries land in `rows[u]` as (center, distance).
void pads_pass(const std::vector<std::vector<Arc>>& adj, const std::vector<VertexId>& order,
               std::size_t k, std::vector<Sketch>& rows) {
    const std::size_t n = adj.size();
    std::vector<double> dist(n, -1.0);
    std::vector<char> done(n, 0);
    std::vector<VertexId> touched;
    for (VertexId c : order) {
        MinQueue pq;
        dist[c] = 0.0;
        touched.push_back(c);
        pq.push({0.0, c});
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (done[u] || d > dist[u]) continue;
            done[u] = 1;
            std::size_t closer = 0;
            for (const auto& e : rows[u])
                if (e.dist <= d) ++closer;
            if (closer >= k) continue;
            rows[u].push_back({c, d});
            for (const Arc& a : adj[u]) {
                double nd = d + a.w;
                if (dist[a.v] < 0.0 || nd < dist[a.v]) {
                    if (dist[a.v] < 0.0) touched.push_back(a.v);
                    dist[a.v] = nd;
                    pq.push({nd, a.v});
                }
            }
        }
        for (VertexId t : touched) {
            dist[t] = -1.0;
            done[t] = 0;
        }
        touched.clear();
    }
    for (auto& r : rows)
        std::sort(r.begin(), r.end(), [](const SketchEntry& a, const SketchEntry& b) { return a.center < b.center; });
}

}  // namespace

PadsIndex build_pads(const Graph& g, std::size_t k_param, const std::vector<double>* pr) {
    if (k_param < 1) throw std::invalid_argument("k_param must be >= 1");
    PadsIndex idx;
    idx.k_param = k_param;
    idx.pagerank = pr ? *pr : pagerank(g);
    const std::size_t n = g.vertex_count;
    std::vector<VertexId> order(n);
    for (VertexId v = 0; v < n; ++v) order[v] = v;
    std::stable_sort(order.begin(), order.end(),
                     [&](VertexId a, VertexId b) { return idx.pagerank[a] > idx.pagerank[b]; });
    idx.in_sketch.assign(n, {});
    idx.out_sketch.assign(n, {});
    pads_pass(g.out_adj, order, k_param, idx.in_sketch);
    pads_pass(g.in_adj, order, k_param, idx.out_sketch);
    return idx;
}

Sketch merge_sketches(const std::vector<const Sketch*>& rows, bool keep_max, bool require_all) {
    struct Acc {
        VertexId center;
        double dist;
        std::size_t count;
    };
    std::vector<Acc> acc;
    for (const Sketch* r : rows)
        for (const auto& e : *r) acc.push_back({e.center, e.dist, 1});
    std::sort(acc.begin(), acc.end(), [](const Acc& a, const Acc& b) { return a.center < b.center; });
    Sketch out;
    for (std::size_t i = 0; i < acc.size();) {
        std::size_t j = i;
        double d = acc[i].dist;
        while (j < acc.size() && acc[j].center == acc[i].center) {
            d = keep_max ? std::max(d, acc[j].dist) : std::min(d, acc[j].dist);
            ++j;
        }
        if (!require_all || j - i == rows.size()) out.push_back({acc[i].center, d});
        i = j;
    }
    return out;
}

KpadsIndex build_kpads(const PadsIndex& pads, const Graph& g) {
    KpadsIndex k;
    const std::size_t nk = g.keyword_count();
    k.out_sketch.resize(nk);
    k.in_sketch.resize(nk);
    k.out_bound.resize(nk);
    for (KeywordId q = 0; q < nk; ++q) {
        std::vector<const Sketch*> outs, ins;
        for (VertexId v : g.keyword_index[q]) {
            outs.push_back(&pads.out_sketch[v]);
            ins.push_back(&pads.in_sketch[v]);
        }
        k.out_sketch[q] = merge_sketches(outs);
        k.in_sketch[q] = merge_sketches(ins);
        k.out_bound[q] = merge_sketches(outs, true, true);
    }
    return k;
}

BpadsIndex build_bpads(const Fragment& frag, const PadsIndex& pads) {
    BpadsIndex b;
    std::vector<const Sketch*> rows;
    for (VertexId v : frag.out_portals) rows.push_back(&pads.out_sketch[v]);
    b.has_portals = !rows.empty();
    b.merged = merge_sketches(rows);
    b.bound = merge_sketches(rows, true, true);
    return b;
}

namespace {

// Calls f(d_a, d_b) for each common center of two center-sorted rows.
template <class F>
void for_common(const Sketch& a, const Sketch& b, F&& f) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].center < b[j].center) ++i;
        else if (b[j].center < a[i].center) ++j;
        else f(a[i++].dist, b[j++].dist);
    }
}

}  // namespace

std::optional<double> upper_from_rows(const Sketch& out_u, const Sketch& in_q) {
    std::optional<double> best;
    for_common(out_u, in_q, [&](double du, double dq) {
        if (!best || du + dq < *best) best = du + dq;
    });
    return best;
}

double lower_from_rows(const Sketch& out_u, const Sketch& out_q) {
    double best = 0.0;
    for_common(out_u, out_q, [&](double du, double dq) { best = std::max(best, du - dq); });
    return best;
}

std::optional<double> dist_from_rows(const Sketch& out_u, const Sketch& in_v) {
    return upper_from_rows(out_u, in_v);
}

double est_lower_to_border(const Sketch& out_u, const BpadsIndex& b, double inf) {
    if (!b.has_portals) return inf;
    return lower_from_rows(out_u, b.bound);
}

SketchSet SketchSet::build(const Graph& g, std::size_t k_param) {
    PadsIndex p = build_pads(g, k_param);
    KpadsIndex k = build_kpads(p, g);
    return SketchSet(std::move(p), std::move(k));
}

std::optional<double> SketchSet::est_upper(VertexId u, KeywordId q) const {
    if (q >= kpads_.in_sketch.size()) return std::nullopt;
    return upper_from_rows(pads_.out_sketch[u], kpads_.in_sketch[q]);
}

double SketchSet::est_lower(VertexId u, KeywordId q) const {
    if (q >= kpads_.out_bound.size()) return 0.0;
    return lower_from_rows(pads_.out_sketch[u], kpads_.out_bound[q]);
}

std::optional<double> SketchSet::est_dist(VertexId u, VertexId v) const {
    return dist_from_rows(pads_.out_sketch[u], pads_.in_sketch[v]);
}

void SketchSet::attach_borders(const Fragmentation& f) {
    borders_.clear();
    borders_.resize(static_cast<std::size_t>(f.m) + 1);
    for (const auto& fr : f.fragments) borders_[static_cast<std::size_t>(fr.id)] = build_bpads(fr, pads_);
}

double SketchSet::est_lower_to_border(VertexId u, int frag_id, double inf) const {
    if (frag_id < 0 || static_cast<std::size_t>(frag_id) >= borders_.size()) return 0.0;
    return dkws::est_lower_to_border(pads_.out_sketch[u], borders_[static_cast<std::size_t>(frag_id)], inf);
}

// ---- persistence ----

namespace {

constexpr const char* kHeader = "dkws-sketch v1";

std::string fmt_num(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

void write_row(std::ostream& out, const std::string& owner, const char* dir, const Sketch& s) {
    out << owner << '|' << dir << '|';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out << ',';
        out << s[i].center << ':' << fmt_num(s[i].dist);
    }
    out << '\n';
}

Sketch parse_row(const std::string& text, std::size_t line) {
    Sketch s;
    if (text.empty()) return s;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw GraphError("bad sketch entry '" + item + "'", line);
        try {
            s.push_back({static_cast<VertexId>(std::stoul(item.substr(0, colon))), std::stod(item.substr(colon + 1))});
        } catch (const std::exception&) {
            throw GraphError("bad sketch entry '" + item + "'", line);
        }
    }
    return s;
}

}  // namespace

void SketchSet::save(std::ostream& out, const Graph& g) const {
    out << kHeader << " k=" << pads_.k_param << " vertices=" << pads_.out_sketch.size()
        << " keywords=" << kpads_.out_sketch.size() << " borders=" << (borders_.empty() ? 0 : borders_.size() - 1)
        << '\n';
    out << "[vertices]\n";
    for (std::size_t v = 0; v < pads_.out_sketch.size(); ++v) {
        write_row(out, std::to_string(v), "out", pads_.out_sketch[v]);
        write_row(out, std::to_string(v), "in", pads_.in_sketch[v]);
    }
    out << "[pagerank]\n";
    for (std::size_t v = 0; v < pads_.pagerank.size(); ++v) out << v << '|' << fmt_num(pads_.pagerank[v]) << '\n';
    out << "[keywords]\n";
    for (std::size_t q = 0; q < kpads_.out_sketch.size(); ++q) {
        const std::string& name = g.keyword_names.at(q);
        write_row(out, name, "out", kpads_.out_sketch[q]);
        write_row(out, name, "in", kpads_.in_sketch[q]);
        write_row(out, name, "outbound", kpads_.out_bound[q]);
    }
    out << "[borders]\n";
    for (std::size_t f = 1; f < borders_.size(); ++f) {
        out << f << "|portals|" << (borders_[f].has_portals ? 1 : 0) << '\n';
        write_row(out, std::to_string(f), "min", borders_[f].merged);
        write_row(out, std::to_string(f), "bound", borders_[f].bound);
    }
}

SketchSet SketchSet::load(std::istream& in, const Graph& g) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(kHeader, 0) != 0) throw GraphError("not a dkws sketch file", 1);
    std::size_t k_param = 0, nv = 0, nk = 0, nb = 0;
    if (std::sscanf(line.c_str(), "dkws-sketch v1 k=%zu vertices=%zu keywords=%zu borders=%zu", &k_param, &nv, &nk,
                    &nb) != 4)
        throw GraphError("bad sketch header", 1);
    if (nv != g.vertex_count) throw GraphError("sketch vertex count does not match graph", 1);

    PadsIndex p;
    p.k_param = k_param;
    p.out_sketch.assign(nv, {});
    p.in_sketch.assign(nv, {});
    p.pagerank.assign(nv, 0.0);
    KpadsIndex k;
    k.out_sketch.assign(g.keyword_count(), {});
    k.in_sketch.assign(g.keyword_count(), {});
    k.out_bound.assign(g.keyword_count(), {});
    std::vector<BpadsIndex> borders(nb ? nb + 1 : 0);

    std::string section;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.front() == '[') {
            section = line;
            continue;
        }
        auto p1 = line.find('|');
        auto p2 = line.find('|', p1 == std::string::npos ? p1 : p1 + 1);
        const std::string owner = line.substr(0, p1);
        if (section == "[pagerank]") {
            if (p1 == std::string::npos) throw GraphError("bad pagerank row", lineno);
            p.pagerank.at(std::stoul(owner)) = std::stod(line.substr(p1 + 1));
            continue;
        }
        if (p1 == std::string::npos || p2 == std::string::npos) throw GraphError("bad sketch row", lineno);
        const std::string dir = line.substr(p1 + 1, p2 - p1 - 1);
        const std::string body = line.substr(p2 + 1);
        if (section == "[vertices]") {
            std::size_t v = std::stoul(owner);
            if (v >= nv) throw GraphError("sketch vertex out of range", lineno);
            (dir == "out" ? p.out_sketch : p.in_sketch)[v] = parse_row(body, lineno);
        } else if (section == "[keywords]") {
            auto q = g.keyword(owner);
            if (!q) continue;  // keyword unknown to this graph
            Sketch s = parse_row(body, lineno);
            if (dir == "out") k.out_sketch[*q] = std::move(s);
            else if (dir == "in") k.in_sketch[*q] = std::move(s);
            else if (dir == "outbound") k.out_bound[*q] = std::move(s);
            else throw GraphError("bad keyword direction '" + dir + "'", lineno);
        } else if (section == "[borders]") {
            std::size_t f = std::stoul(owner);
            if (f == 0 || f >= borders.size()) throw GraphError("border id out of range", lineno);
            if (dir == "portals") borders[f].has_portals = body == "1";
            else if (dir == "min") borders[f].merged = parse_row(body, lineno);
            else if (dir == "bound") borders[f].bound = parse_row(body, lineno);
            else throw GraphError("bad border row", lineno);
        } else {
            throw GraphError("row outside a section", lineno);
        }
    }
    SketchSet s(std::move(p), std::move(k));
    s.set_borders(std::move(borders));
    return s;
}

}  // namespace dkws
