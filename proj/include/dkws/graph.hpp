#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dkws {

using VertexId = std::uint32_t;
using KeywordId = std::uint32_t;

inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

struct Arc {
    VertexId v;
    double w;
};

struct Edge {
    VertexId from;
    VertexId to;
    double w;
};

class GraphError : public std::runtime_error {
public:
    GraphError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Labeled, weighted, directed graph. Immutable once built.
struct Graph {
    std::size_t vertex_count = 0;
    std::vector<std::vector<Arc>> out_adj;
    std::vector<std::vector<Arc>> in_adj;  // transpose of out_adj
    std::vector<std::vector<KeywordId>> labels;  // sorted per vertex
    std::vector<std::vector<VertexId>> keyword_index;  // keyword -> sorted origins
    std::vector<std::string> keyword_names;
    std::unordered_map<std::string, KeywordId> keyword_ids;
    double total_weight = 0.0;

    // Encoding of "unreached"; strictly larger than any path length.
    double inf() const { return total_weight + 1.0; }

    std::size_t keyword_count() const { return keyword_names.size(); }
    std::size_t edge_count() const;
    std::optional<KeywordId> keyword(std::string_view name) const;
    bool has_label(VertexId v, KeywordId q) const;
};

class GraphBuilder {
public:
    explicit GraphBuilder(std::size_t n = 0) : n_(n) {}

    void reserve_vertices(std::size_t n) { if (n > n_) n_ = n; }
    void add_edge(VertexId u, VertexId v, double w, std::size_t line = 0);
    void add_label(VertexId u, std::string_view keyword, std::size_t line = 0);
    Graph build();

private:
    std::size_t n_;
    std::vector<Edge> edges_;
    std::vector<std::pair<VertexId, KeywordId>> labels_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, KeywordId> ids_;
};

// Edge lines "u v w", label lines "u kw1 kw2 ...". '#' starts a comment.
// With declared_n set, any id >= declared_n is an error; otherwise n = max id + 1.
Graph load_graph(std::istream& edge_source, std::istream& label_source,
                 std::optional<std::size_t> declared_n = std::nullopt);

Graph load_graph_files(const std::string& edge_path, const std::string& label_path,
                       std::optional<std::size_t> declared_n = std::nullopt);

// O_q; empty when q is not a known keyword.
const std::vector<VertexId>& search_origins(const Graph& g, KeywordId q);

struct Query {
    std::vector<KeywordId> keywords;
    double tau = 0.0;
    std::size_t k = 1;

    void validate() const;
};

// Resolves names against the graph. Unknown names are interned as fresh ids
// beyond the graph's keyword range, so they simply have no origins.
Query make_query(const Graph& g, const std::vector<std::string>& names, double tau, std::size_t k);

}  // namespace dkws
