#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dkws/graph.hpp"
#include "dkws/partition.hpp"

namespace dkws {

struct SketchEntry {
    VertexId center;
    double dist;

    bool operator==(const SketchEntry&) const = default;
};

// Sorted by center id, one entry per center.
using Sketch = std::vector<SketchEntry>;

std::vector<double> pagerank(const Graph& g, double damping = 0.85, double tol = 1e-9,
                             std::size_t max_iters = 100);

struct PadsIndex {
    std::vector<Sketch> out_sketch;  // (w, dist(u, w))
    std::vector<Sketch> in_sketch;   // (w, dist(w, u))
    std::size_t k_param = 4;
    std::vector<double> pagerank;
};

// Algo-6 style construction over the whole graph. Uses `pr` if given.
PadsIndex build_pads(const Graph& g, std::size_t k_param, const std::vector<double>* pr = nullptr);

struct KpadsIndex {
    std::vector<Sketch> out_sketch;  // center-wise min of PADS^out over labeled vertices
    std::vector<Sketch> in_sketch;   // center-wise min of PADS^in over labeled vertices
    // Center-wise max of PADS^out, kept only for centers present in every
    // labeled vertex's sketch. This is the row the lower bound uses.
    std::vector<Sketch> out_bound;
};

KpadsIndex build_kpads(const PadsIndex& pads, const Graph& g);

struct BpadsIndex {
    Sketch merged;  // center-wise min over out-portals' PADS^out
    Sketch bound;   // center-wise max, centers covered by every out-portal
    bool has_portals = false;
};

BpadsIndex build_bpads(const Fragment& frag, const PadsIndex& pads);

// Center-wise merge of several sketches. `keep_max` with `require_all`
// yields the covering variant used for lower bounds.
Sketch merge_sketches(const std::vector<const Sketch*>& rows, bool keep_max = false, bool require_all = false);

// Row-level estimators. All distances are path lengths, so the results are
// sound bounds whenever the rows carry exact distances.
std::optional<double> upper_from_rows(const Sketch& out_u, const Sketch& in_q);
double lower_from_rows(const Sketch& out_u, const Sketch& out_q);
std::optional<double> dist_from_rows(const Sketch& out_u, const Sketch& in_v);

class SketchSet {
public:
    SketchSet() = default;
    SketchSet(PadsIndex pads, KpadsIndex kpads) : pads_(std::move(pads)), kpads_(std::move(kpads)) {}

    static SketchSet build(const Graph& g, std::size_t k_param);

    const PadsIndex& pads() const { return pads_; }
    const KpadsIndex& kpads() const { return kpads_; }
    std::size_t vertex_count() const { return pads_.out_sketch.size(); }

    std::optional<double> est_upper(VertexId u, KeywordId q) const;
    double est_lower(VertexId u, KeywordId q) const;
    std::optional<double> est_dist(VertexId u, VertexId v) const;

    // Border sketches, indexed by fragment id.
    void attach_borders(const Fragmentation& f);
    void set_borders(std::vector<BpadsIndex> b) { borders_ = std::move(b); }
    const std::vector<BpadsIndex>& borders() const { return borders_; }
    bool has_borders() const { return !borders_.empty(); }
    // `inf` is returned when the fragment has no out-portals.
    double est_lower_to_border(VertexId u, int frag_id, double inf) const;

    void save(std::ostream& out, const Graph& g) const;
    static SketchSet load(std::istream& in, const Graph& g);

private:
    PadsIndex pads_;
    KpadsIndex kpads_;
    std::vector<BpadsIndex> borders_;
};

double est_lower_to_border(const Sketch& out_u, const BpadsIndex& b, double inf);

}  // namespace dkws
