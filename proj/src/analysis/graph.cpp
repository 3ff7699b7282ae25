#include "fuzztwin/analysis/graph.hpp"

#include <omp.h>

#include <algorithm>
#include <numeric>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"

namespace fuzztwin::analysis {

namespace {

void add_trace(TransitionGraph& g, const ConnectionTrace& t) {
    const bool failed = t.outcome == Outcome::Failed;
    (failed ? g.failed_traces : g.success_traces)++;
    const auto& steps = t.steps;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        g.vertices.insert(steps[i].state);
        auto& sc = g.state_counts[steps[i].state];
        (failed ? sc.failed : sc.success)++;
        if (i + 1 < steps.size()) {
            auto& e = g.edges[{steps[i].state, steps[i + 1].state}];
            (failed ? e.failed : e.success)++;
        }
    }
}

void merge_into(TransitionGraph& into, const TransitionGraph& part) {
    into.vertices.insert(part.vertices.begin(), part.vertices.end());
    for (const auto& [k, c] : part.edges) {
        auto& e = into.edges[k];
        e.success += c.success;
        e.failed += c.failed;
    }
    for (const auto& [k, c] : part.state_counts) {
        auto& s = into.state_counts[k];
        s.success += c.success;
        s.failed += c.failed;
    }
    into.success_traces += part.success_traces;
    into.failed_traces += part.failed_traces;
}

double ratio(std::size_t num, std::size_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

TransitionGraph build_graph(std::span<const ConnectionTrace> traces, Execution exec) {
    if (traces.empty()) throw Error(ErrorKind::EmptyInput, "no traces to build a graph from");
    TransitionGraph g;
    if (exec == Execution::Serial) {
        for (const auto& t : traces) add_trace(g, t);
        return g;
    }
    const int threads = std::max(1, omp_get_max_threads());
    std::vector<TransitionGraph> parts(static_cast<std::size_t>(threads));
    const auto n = static_cast<long>(traces.size());
#pragma omp parallel num_threads(threads)
    {
        auto& local = parts[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
        for (long i = 0; i < n; ++i) add_trace(local, traces[static_cast<std::size_t>(i)]);
    }
    for (const auto& p : parts) merge_into(g, p);
    return g;
}

std::set<StateId> high_risk_states(const TransitionGraph& graph) {
    if (graph.failed_traces == 0) throw Error(ErrorKind::NoFailedTraces, "no failed traces");
    std::size_t total = 0;
    for (const auto& [s, c] : graph.state_counts) total += c.failed;
    const auto n = graph.vertices.size();
    std::set<StateId> out;
    // count > total / n, compared without division
    for (const auto& [s, c] : graph.state_counts)
        if (c.failed * n > total) out.insert(s);
    return out;
}

std::set<Transaction> high_risk_transactions(const TransitionGraph& graph,
                                             std::size_t max_success_occurrences) {
    std::set<Transaction> out;
    for (const auto& [k, c] : graph.edges)
        if (c.failed >= 1 && c.success <= max_success_occurrences) out.insert(k);
    return out;
}

Outcome rule_predict(const ConnectionTrace& trace, const std::set<Transaction>& high_risk) {
    const auto& steps = trace.steps;
    for (std::size_t i = 0; i + 1 < steps.size(); ++i)
        if (high_risk.count({steps[i].state, steps[i + 1].state})) return Outcome::Failed;
    return Outcome::Success;
}

std::string_view to_string(EvalMode m) noexcept {
    return m == EvalMode::Resubstitution ? "resubstitution" : "split";
}

RiskReport score_rule(std::span<const ConnectionTrace> traces, const std::set<Transaction>& high_risk) {
    RiskReport r;
    r.eval_size = traces.size();
    for (const auto& t : traces) {
        const bool predicted = rule_predict(t, high_risk) == Outcome::Failed;
        const bool actual = t.outcome == Outcome::Failed;
        if (predicted && actual) ++r.true_positive;
        else if (predicted) ++r.false_positive;
        else if (actual) ++r.false_negative;
        else ++r.true_negative;
    }
    r.rule_recall = ratio(r.true_positive, r.true_positive + r.false_negative);
    r.rule_precision = ratio(r.true_positive, r.true_positive + r.false_positive);
    return r;
}

RiskReport evaluate(std::span<const ConnectionTrace> traces, const EvalOptions& options) {
    if (traces.empty()) throw Error(ErrorKind::EmptyInput, "no traces to evaluate");
    std::vector<ConnectionTrace> train, eval;
    if (options.mode == EvalMode::Resubstitution) {
        train.assign(traces.begin(), traces.end());
        eval = train;
    } else {
        if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
            throw Error(ErrorKind::InvalidArgument, "train_fraction must be in (0, 1)");
        }
        std::vector<std::size_t> order(traces.size());
        std::iota(order.begin(), order.end(), 0);
        Rng rng(options.seed);
        rng.shuffle(std::span(order));
        const auto cut = std::clamp<std::size_t>(
            static_cast<std::size_t>(options.train_fraction * static_cast<double>(traces.size())), 1,
            traces.size() - 1);
        for (std::size_t i = 0; i < order.size(); ++i) (i < cut ? train : eval).push_back(traces[order[i]]);
    }
    const auto graph = build_graph(train, Execution::Serial);
    const auto hr = high_risk_transactions(graph, options.max_success_occurrences);
    RiskReport r = score_rule(eval, hr);
    r.mode = options.mode;
    r.train_size = train.size();
    r.high_risk_transactions = hr;
    if (graph.failed_traces) r.high_risk_states = high_risk_states(graph);
    return r;
}

}  // namespace fuzztwin::analysis
