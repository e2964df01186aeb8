#include "dkws/backtrack.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <unordered_set>

namespace dkws {

void BacktrackGraph::add_edge(VertexId parent, VertexId child, double w) {
    auto& ps = parents_[child];
    for (auto& a : ps) {
        if (a.v == parent) {
            a.w = std::min(a.w, w);
            return;
        }
    }
    ps.push_back({parent, w});
    ++edges_;
}

const std::vector<Arc>& BacktrackGraph::parents(VertexId child) const {
    static const std::vector<Arc> none;
    auto it = parents_.find(child);
    return it == parents_.end() ? none : it->second;
}

bool BacktrackGraph::has_edge(VertexId parent, VertexId child) const {
    for (const auto& a : parents(child))
        if (a.v == parent) return true;
    return false;
}

std::size_t BacktrackGraph::vertex_count() const {
    std::unordered_set<VertexId> vs;
    for (const auto& [child, ps] : parents_) {
        vs.insert(child);
        for (const auto& a : ps) vs.insert(a.v);
    }
    return vs.size();
}

std::vector<std::pair<VertexId, VertexId>> BacktrackGraph::edges() const {
    std::vector<std::pair<VertexId, VertexId>> out;
    for (const auto& [child, ps] : parents_)
        for (const auto& a : ps) out.emplace_back(a.v, child);
    std::sort(out.begin(), out.end());
    return out;
}

void BacktrackGraph::clear() {
    parents_.clear();
    edges_ = 0;
}

void record_backtrack(BacktrackGraph& bt, const std::vector<TreeEdge>& settled) {
    for (const auto& e : settled) bt.add_edge(e.parent, e.child, e.w);
}

namespace {

ReachList reverse_dijkstra(const BacktrackGraph& bt, const DistList& seeds, double limit) {
    std::unordered_map<VertexId, std::pair<double, VertexId>> dist;
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (const auto& [v, d] : seeds) {
        if (d > limit) continue;
        auto it = dist.find(v);
        if (it == dist.end() || d < it->second.first) {
            dist[v] = {d, v};
            pq.push({d, v});
        }
    }
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        auto [dv, origin] = dist[v];
        if (d > dv) continue;
        for (const Arc& a : bt.parents(v)) {
            double nd = d + a.w;
            if (nd > limit) continue;
            auto it = dist.find(a.v);
            if (it == dist.end() || nd < it->second.first) {
                dist[a.v] = {nd, origin};
                pq.push({nd, a.v});
            }
        }
    }
    ReachList out;
    out.reserve(dist.size());
    for (const auto& [v, p] : dist) out.push_back({v, p.first, p.second});
    std::sort(out.begin(), out.end(), [](const Reached& a, const Reached& b) { return a.vertex < b.vertex; });
    return out;
}

}  // namespace

ReachList propagate_update_batch(const BacktrackGraph& bt, const DistList& refined, double limit) {
    return reverse_dijkstra(bt, refined, limit);
}

ReachList propagate_update_naive(const BacktrackGraph& bt, const DistList& refined, double limit) {
    std::unordered_map<VertexId, Reached> best;
    for (const auto& seed : refined) {
        for (const Reached& r : reverse_dijkstra(bt, {seed}, limit)) {
            auto it = best.find(r.vertex);
            if (it == best.end() || r.dist < it->second.dist) best[r.vertex] = r;
        }
    }
    ReachList out;
    out.reserve(best.size());
    for (const auto& [v, r] : best) out.push_back(r);
    std::sort(out.begin(), out.end(), [](const Reached& a, const Reached& b) { return a.vertex < b.vertex; });
    return out;
}

std::vector<VertexId> order_frontier(std::vector<std::pair<VertexId, double>> roots) {
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::vector<VertexId> out;
    out.reserve(roots.size());
    for (const auto& r : roots) out.push_back(r.first);
    return out;
}

}  // namespace dkws
