#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fuzztwin/common/execution.hpp"
#include "fuzztwin/common/trace.hpp"

namespace fuzztwin::analysis {

using Transaction = std::pair<StateId, StateId>;

struct EdgeCounts {
    std::size_t success = 0;
    std::size_t failed = 0;

    std::size_t total() const noexcept { return success + failed; }
    bool operator==(const EdgeCounts&) const = default;
};

/// Vertices are derived states, edges consecutive state pairs, with
/// occurrence counts split by the outcome of the trace they came from.
struct TransitionGraph {
    std::set<StateId> vertices;
    std::map<Transaction, EdgeCounts> edges;
    std::map<StateId, EdgeCounts> state_counts;
    std::size_t success_traces = 0;
    std::size_t failed_traces = 0;

    bool operator==(const TransitionGraph&) const = default;
};

/// Throws Error(EmptyInput) for no traces.
TransitionGraph build_graph(std::span<const ConnectionTrace> traces, Execution exec = Execution::Parallel);

/// States whose occurrence count across failed traces is strictly above the
/// mean failed count over all observed states. Throws Error(NoFailedTraces).
std::set<StateId> high_risk_states(const TransitionGraph& graph);

/// Edges seen in at least one failed trace and in at most
/// `max_success_occurrences` successful ones.
std::set<Transaction> high_risk_transactions(const TransitionGraph& graph,
                                             std::size_t max_success_occurrences = 1);

/// Failed iff the trace contains a high-risk transaction.
Outcome rule_predict(const ConnectionTrace& trace, const std::set<Transaction>& high_risk);

enum class EvalMode : std::uint8_t { Resubstitution, Split };
std::string_view to_string(EvalMode m) noexcept;

struct RiskReport {
    EvalMode mode = EvalMode::Resubstitution;
    std::set<StateId> high_risk_states;
    std::set<Transaction> high_risk_transactions;
    std::size_t train_size = 0;
    std::size_t eval_size = 0;
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;
    double rule_recall = 0;     // TP / (TP + FN), 0 without failed traces
    double rule_precision = 0;  // TP / (TP + FP), 0 without positive predictions
};

struct EvalOptions {
    EvalMode mode = EvalMode::Resubstitution;
    double train_fraction = 0.5;  // split mode
    std::size_t max_success_occurrences = 1;
    std::uint64_t seed = 1;
};

/// Extracts the rule from the training partition and scores it on the
/// evaluation partition (both the whole set in resubstitution mode).
RiskReport evaluate(std::span<const ConnectionTrace> traces, const EvalOptions& options = {});

/// Scores a fixed rule on `traces`; fills only the confusion counts and rates.
RiskReport score_rule(std::span<const ConnectionTrace> traces, const std::set<Transaction>& high_risk);

}  // namespace fuzztwin::analysis
