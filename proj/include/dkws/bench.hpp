#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "dkws/graph.hpp"
#include "dkws/runtime.hpp"

namespace dkws {

enum class GraphModel { ErdosRenyi, PrefAttach };

struct GenParams {
    GraphModel model = GraphModel::ErdosRenyi;
    std::size_t n = 100;
    double avg_degree = 4.0;
    std::size_t keywords = 20;
    double zipf_s = 1.0;
    std::uint64_t seed = 1;
};

// Weights are drawn from {0.5, 1, 1.5, 2} so path sums stay exact in binary.
Graph generate_graph(const GenParams& p);

// Distinct keywords drawn uniformly among those with at least one origin.
// Throws when fewer such keywords exist than the query needs.
std::vector<Query> generate_queries(const Graph& g, std::size_t count, std::size_t num_keywords, double tau,
                                    std::size_t k, std::uint64_t seed);

struct BenchRow {
    std::string variant;
    std::size_t query_id = 0;
    std::size_t num_keywords = 0;
    double tau = 0.0;
    std::size_t k = 0;
    int workers = 1;
    Metrics metrics;
    std::vector<Answer> answers;
};

inline constexpr const char* kCsvHeader =
    "variant,query_id,num_keywords,tau,k,workers,elapsed_ms,supersteps,msg_count,msg_bytes,visited_nodes,results";

// results = root:score pairs joined by ";" in answer order.
std::string format_results(const std::vector<Answer>& answers);
void write_csv_row(std::ostream& out, const BenchRow& row);

// Sorted score list; the root-agnostic comparison key.
std::vector<double> score_multiset(const std::vector<Answer>& answers);

struct BenchSpec {
    std::vector<Variant> variants{Variant::Pine};
    std::size_t queries = 50;
    std::size_t num_keywords = 3;
    double tau = 3.0;
    std::size_t k = 10;
    std::uint64_t query_seed = 1;
    RunConfig base;  // variant is overwritten per row
    bool check = false;  // compare every row with the oracle
    bool header = true;
};

struct BenchSummary {
    std::size_t rows = 0;
    std::size_t mismatches = 0;
};

// Writes the header (unless disabled) and one row per (query, variant).
BenchSummary run_bench(const Graph& g, const Fragmentation& frag, const SketchSet* sketches, const BenchSpec& spec,
                       std::ostream& csv);

}  // namespace dkws
