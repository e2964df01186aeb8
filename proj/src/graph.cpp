#include "dkws/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace dkws {

std::size_t Graph::edge_count() const {
    std::size_t m = 0;
    for (const auto& a : out_adj) m += a.size();
    return m;
}

std::optional<KeywordId> Graph::keyword(std::string_view name) const {
    auto it = keyword_ids.find(std::string(name));
    if (it == keyword_ids.end()) return std::nullopt;
    return it->second;
}

bool Graph::has_label(VertexId v, KeywordId q) const {
    if (v >= labels.size()) return false;
    const auto& l = labels[v];
    return std::binary_search(l.begin(), l.end(), q);
}

void GraphBuilder::add_edge(VertexId u, VertexId v, double w, std::size_t line) {
    if (!(w > 0.0)) throw GraphError("edge weight must be positive", line);
    if (u == v) throw GraphError("self-loop on vertex " + std::to_string(u), line);
    edges_.push_back({u, v, w});
}

void GraphBuilder::add_label(VertexId u, std::string_view keyword, std::size_t line) {
    if (keyword.empty()) throw GraphError("empty keyword", line);
    std::string key(keyword);
    auto it = ids_.find(key);
    KeywordId id;
    if (it == ids_.end()) {
        id = static_cast<KeywordId>(names_.size());
        ids_.emplace(key, id);
        names_.push_back(std::move(key));
    } else {
        id = it->second;
    }
    labels_.emplace_back(u, id);
}

Graph GraphBuilder::build() {
    std::size_t n = n_;
    for (const auto& e : edges_) n = std::max<std::size_t>(n, std::max(e.from, e.to) + std::size_t{1});
    for (const auto& [u, q] : labels_) n = std::max<std::size_t>(n, u + std::size_t{1});

    Graph g;
    g.vertex_count = n;
    g.out_adj.assign(n, {});
    g.in_adj.assign(n, {});
    g.labels.assign(n, {});
    for (const auto& e : edges_) {
        g.out_adj[e.from].push_back({e.to, e.w});
        g.in_adj[e.to].push_back({e.from, e.w});
        g.total_weight += e.w;
    }
    g.keyword_names = names_;
    g.keyword_ids = ids_;
    g.keyword_index.assign(names_.size(), {});
    for (const auto& [u, q] : labels_) g.labels[u].push_back(q);
    for (VertexId v = 0; v < n; ++v) {
        auto& l = g.labels[v];
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
        for (KeywordId q : l) g.keyword_index[q].push_back(v);
    }
    return g;
}

namespace {

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

VertexId parse_vertex(const std::string& tok, std::size_t line) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw GraphError("bad vertex id '" + tok + "'", line);
    unsigned long long v = std::stoull(tok);
    if (v >= kNoVertex) throw GraphError("vertex id too large", line);
    return static_cast<VertexId>(v);
}

}  // namespace

Graph load_graph(std::istream& edge_source, std::istream& label_source,
                 std::optional<std::size_t> declared_n) {
    GraphBuilder b(declared_n.value_or(0));
    auto check_range = [&](VertexId v, std::size_t line) {
        if (declared_n && v >= *declared_n)
            throw GraphError("vertex " + std::to_string(v) + " beyond declared range", line);
    };

    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(edge_source, raw)) {
        ++lineno;
        std::istringstream ss(strip_comment(raw));
        std::string a, c, d, extra;
        if (!(ss >> a)) continue;
        if (!(ss >> c >> d) || (ss >> extra)) throw GraphError("expected 'u v w'", lineno);
        VertexId u = parse_vertex(a, lineno), v = parse_vertex(c, lineno);
        double w;
        try {
            std::size_t used = 0;
            w = std::stod(d, &used);
            if (used != d.size()) throw std::invalid_argument(d);
        } catch (const std::exception&) {
            throw GraphError("bad weight '" + d + "'", lineno);
        }
        check_range(u, lineno);
        check_range(v, lineno);
        b.add_edge(u, v, w, lineno);
    }

    lineno = 0;
    while (std::getline(label_source, raw)) {
        ++lineno;
        std::istringstream ss(strip_comment(raw));
        std::string a, kw;
        if (!(ss >> a)) continue;
        VertexId u = parse_vertex(a, lineno);
        check_range(u, lineno);
        while (ss >> kw) b.add_label(u, kw, lineno);
    }
    return b.build();
}

Graph load_graph_files(const std::string& edge_path, const std::string& label_path,
                       std::optional<std::size_t> declared_n) {
    std::ifstream ef(edge_path);
    if (!ef) throw GraphError("cannot open " + edge_path);
    if (label_path.empty()) {
        std::istringstream none;
        return load_graph(ef, none, declared_n);
    }
    std::ifstream lf(label_path);
    if (!lf) throw GraphError("cannot open " + label_path);
    return load_graph(ef, lf, declared_n);
}

const std::vector<VertexId>& search_origins(const Graph& g, KeywordId q) {
    static const std::vector<VertexId> empty;
    return q < g.keyword_index.size() ? g.keyword_index[q] : empty;
}

void Query::validate() const {
    if (keywords.empty()) throw std::invalid_argument("query has no keywords");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (!(tau >= 0.0)) throw std::invalid_argument("tau must be non-negative");
    std::set<KeywordId> seen(keywords.begin(), keywords.end());
    if (seen.size() != keywords.size()) throw std::invalid_argument("duplicate query keyword");
}

Query make_query(const Graph& g, const std::vector<std::string>& names, double tau, std::size_t k) {
    Query q;
    q.tau = tau;
    q.k = k;
    std::unordered_map<std::string, KeywordId> unknown;
    for (const auto& name : names) {
        if (auto id = g.keyword(name)) {
            q.keywords.push_back(*id);
        } else {
            auto [it, fresh] = unknown.emplace(name, static_cast<KeywordId>(g.keyword_count() + unknown.size()));
            q.keywords.push_back(it->second);
        }
    }
    q.validate();
    return q;
}

}  // namespace dkws
