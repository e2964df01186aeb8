#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dkws/graph.hpp"
#include "dkws/kernel.hpp"
#include "dkws/partition.hpp"
#include "dkws/sketch.hpp"

namespace dkws {

enum class Variant { Baseline, Bf, Pads, Np, Pine };

std::optional<Variant> parse_variant(std::string_view name);
std::string variant_name(Variant v);
const std::vector<Variant>& all_variants();

struct RunConfig {
    Variant variant = Variant::Pine;
    int np_threshold = 2;
    bool deterministic = false;  // notifies and pushes only at barriers, fixed worker order
    std::uint64_t seed = 0;      // worker order per superstep when not deterministic
    std::optional<bool> opt_backtrack, opt_bpads, opt_order;
    std::optional<bool> forced_alternation;  // default: on for every variant but pine
    bool trace = false;
    std::size_t max_supersteps = 1000000;
};

// Kernel options implied by a variant plus overrides.
KernelOptions kernel_options(const RunConfig& cfg);
bool uses_sketches(Variant v);
bool uses_notify_push(Variant v);

struct Metrics {
    double elapsed_ms = 0.0;
    std::size_t supersteps = 0;
    std::uint64_t msg_count = 0;
    std::uint64_t msg_bytes = 0;
    std::uint64_t visited_nodes = 0;
    std::vector<std::uint64_t> visited_per_worker;
    std::uint64_t notifies = 0;
    std::uint64_t pushes = 0;
    std::uint64_t bkws_steps = 0;  // IncEval-bkws invocations
    std::uint64_t fkws_steps = 0;
    KernelCounters kernel;  // summed over workers
    std::array<std::uint64_t, 8> bytes_by_kind{};  // indexed by MsgKind
};

struct Answer {
    VertexId root;
    double score;
    std::vector<Slot> slots;
};

struct RunResult {
    std::vector<Answer> answers;  // ascending score, ties by root id
    Metrics metrics;
    Trace trace;
};

// Bound table kept by the coordinator.
class Coordinator {
public:
    Coordinator(int m, int threshold, double inf, Trace* trace = nullptr);

    // Returns the workers (1-based) that must receive a push of bound().
    std::vector<int> notify(int worker, double s);
    double bound() const { return s_; }
    const std::vector<std::uint64_t>& counters() const { return n_; }
    const std::vector<double>& table() const { return table_; }

    // Workers that would receive a push now under the counter-gap rule.
    std::vector<int> push_targets();

private:
    int m_;
    int threshold_;
    double s_;
    Trace* trace_;
    std::vector<double> table_;        // 1-based
    std::vector<std::uint64_t> n_;     // 1-based
    std::vector<double> last_pushed_;  // 1-based
};

// Staleness indicators over buffered frames; `inf` when the buffer is empty.
double staleness_backward(const std::vector<Frame>& frames, double s, double tau, double inf);
double staleness_forward(const std::vector<Frame>& frames, double tau, double inf);

enum class Subtask { Backward, Forward, Idle };
// bkws iff SI^b <= SI^f; when both are inf, whichever subtask has local work.
Subtask select_subtask(double si_b, double si_f, double inf, bool backward_work, bool forward_work);

// Global top-k over the local answer lists: distinct roots, ascending score, ties by root.
std::vector<Answer> assemble(const std::vector<std::vector<AnswerEntry>>& locals, std::size_t k);

RunResult run_query(const Graph& g, const Fragmentation& frag, const SketchSet* sketches, const Query& query,
                    const RunConfig& cfg);

// Checks the monotone invariants on a trace; returns one message per violation.
std::vector<std::string> audit_trace(const Trace& t, int m);

}  // namespace dkws
