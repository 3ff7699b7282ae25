#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "fuzztwin/analysis/curve_fit.hpp"
#include "fuzztwin/analysis/graph.hpp"
#include "fuzztwin/analysis/synthetic.hpp"
#include "fuzztwin/common/error.hpp"
#include "fuzztwin/store/store.hpp"
#include "oracles.hpp"

using namespace fuzztwin;
using namespace fuzztwin::analysis;
using fixtures::trace_of;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

void expect_graph_matches(const TransitionGraph& g, const oracle::Recount& r) {
    EXPECT_EQ(g.vertices, r.vertices);
    EXPECT_EQ(g.success_traces, r.success);
    EXPECT_EQ(g.failed_traces, r.failed);
    ASSERT_EQ(g.edges.size(), r.edges.size());
    for (const auto& [k, c] : r.edges) {
        ASSERT_TRUE(g.edges.count(k));
        EXPECT_EQ(g.edges.at(k).success, c.first);
        EXPECT_EQ(g.edges.at(k).failed, c.second);
    }
    ASSERT_EQ(g.state_counts.size(), r.states.size());
    for (const auto& [k, c] : r.states) {
        EXPECT_EQ(g.state_counts.at(k).success, c.first);
        EXPECT_EQ(g.state_counts.at(k).failed, c.second);
    }
}

}  // namespace

TEST(Graph, SingleEdgeAndAdditivity) {
    const auto s = synthetic_states(2);
    const std::vector<ConnectionTrace> one{trace_of({s[0], s[1]}, Outcome::Success)};
    const auto g = build_graph(one);
    EXPECT_EQ(g.edges.at({s[0], s[1]}), (EdgeCounts{1, 0}));
    const std::vector<ConnectionTrace> three(3, one[0]);
    EXPECT_EQ(build_graph(three).edges.at({s[0], s[1]}), (EdgeCounts{3, 0}));
    EXPECT_EQ(kind_of([] { build_graph(std::vector<ConnectionTrace>{}); }), ErrorKind::EmptyInput);
}

TEST(Graph, MatchesRecountSerialAndParallel) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto data = fixtures::random_dataset(seed, 300);
        const auto ref = oracle::recount(data);
        const auto serial = build_graph(data, Execution::Serial);
        expect_graph_matches(serial, ref);
        EXPECT_EQ(build_graph(data, Execution::Parallel), serial);
    }
}

TEST(Graph, SurvivesStoreExportImport) {
    const auto data = synthetic_dataset(SyntheticConfig{}).traces;
    store::CampaignStore s;
    for (const auto& t : data) s.record_trace(t);
    const auto back = store::CampaignStore::import_json(s.export_json());
    std::vector<ConnectionTrace> reloaded;
    for (const auto& st : back.traces()) reloaded.push_back(st.trace);
    EXPECT_EQ(build_graph(reloaded), build_graph(data));
}

TEST(HighRiskStates, Examples) {
    const auto s = synthetic_states(4);
    const std::vector<ConnectionTrace> uniform{trace_of({s[0], s[1], s[2], s[3]}, Outcome::Failed)};
    EXPECT_TRUE(high_risk_states(build_graph(uniform)).empty());
    const std::vector<ConnectionTrace> one{trace_of({s[0]}, Outcome::Failed), trace_of({s[0]}, Outcome::Failed),
                                           trace_of({s[1], s[2], s[3]}, Outcome::Success)};
    EXPECT_EQ(high_risk_states(build_graph(one)), std::set<StateId>{s[0]});
    const std::vector<ConnectionTrace> ok{trace_of({s[0], s[1]}, Outcome::Success)};
    EXPECT_EQ(kind_of([&] { high_risk_states(build_graph(ok)); }), ErrorKind::NoFailedTraces);
}

TEST(HighRiskStates, CampaignShapedDatasetIsSmallAndMatchesRecount) {
    const auto data = synthetic_dataset(SyntheticConfig{});
    const auto hr = high_risk_states(build_graph(data.traces));
    EXPECT_EQ(hr, oracle::high_risk_states(oracle::recount(data.traces)));
    EXPECT_GT(hr.size(), 0u);
    EXPECT_LT(hr.size(), data.states.size() / 2);
}

TEST(HighRiskTransactions, ToleranceExamples) {
    const auto s = synthetic_states(6);
    std::vector<ConnectionTrace> data;
    for (int i = 0; i < 50; ++i) {
        data.push_back(trace_of({s[0], s[0]}, Outcome::Success, 1000 + i));
        data.push_back(trace_of({s[0], s[0]}, Outcome::Failed, 1000 + i));
    }
    for (int i = 0; i < 3; ++i) data.push_back(trace_of({s[1], s[2]}, Outcome::Failed, 1000 + i));
    for (int i = 0; i < 9; ++i) data.push_back(trace_of({s[3], s[4]}, Outcome::Failed, 1000 + i));
    data.push_back(trace_of({s[3], s[4]}, Outcome::Success));
    const auto hr = high_risk_transactions(build_graph(data));
    EXPECT_EQ(hr, (std::set<Transaction>{{s[1], s[2]}, {s[3], s[4]}}));
    EXPECT_EQ(high_risk_transactions(build_graph(data), 0), (std::set<Transaction>{{s[1], s[2]}}));
}

TEST(HighRiskTransactions, MonotoneInTolerance) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto g = build_graph(fixtures::random_dataset(seed, 200));
        std::set<Transaction> prev;
        for (std::size_t tol = 0; tol < 6; ++tol) {
            const auto cur = high_risk_transactions(g, tol);
            EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
            prev = cur;
        }
    }
}

TEST(RulePredict, Examples) {
    const auto data = fixtures::random_dataset(5, 100);
    const auto empty = score_rule(data, {});
    EXPECT_EQ(empty.rule_recall, 0.0);
    EXPECT_EQ(empty.true_positive + empty.false_positive, 0u);
    std::set<Transaction> every_failed_edge;
    for (const auto& t : data) {
        if (t.outcome != Outcome::Failed) continue;
        for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) every_failed_edge.insert({t.steps[i].state, t.steps[i + 1].state});
    }
    // Failed traces shorter than two steps carry no edge and cannot be caught.
    std::size_t catchable = 0;
    std::size_t failed = 0;
    for (const auto& t : data) {
        if (t.outcome != Outcome::Failed) continue;
        ++failed;
        catchable += t.steps.size() >= 2;
    }
    EXPECT_DOUBLE_EQ(score_rule(data, every_failed_edge).rule_recall,
                     static_cast<double>(catchable) / static_cast<double>(failed));
}

TEST(Evaluate, ResubstitutionMatchesBruteForce) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto data = fixtures::random_dataset(seed, 300);
        const auto report = evaluate(data);
        const auto ref = oracle::recount(data);
        const auto rule = oracle::high_risk_transactions(ref, 1);
        EXPECT_EQ(report.high_risk_transactions, rule);
        EXPECT_EQ(report.high_risk_states, oracle::high_risk_states(ref));
        EXPECT_DOUBLE_EQ(report.rule_recall, oracle::rule_recall(data, rule));
        const auto tp = static_cast<double>(report.true_positive);
        EXPECT_DOUBLE_EQ(report.rule_recall, tp / static_cast<double>(report.true_positive + report.false_negative));
        EXPECT_GE(report.rule_recall, 0.0);
        EXPECT_LE(report.rule_precision, 1.0);
        EXPECT_EQ(report.true_positive + report.false_positive + report.true_negative + report.false_negative,
                  data.size());
    }
}

TEST(Evaluate, ResubstitutionRecallAtLeastHeldOutOnAverage) {
    double resub = 0;
    double held = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SyntheticConfig cfg;
        cfg.seed = seed;
        cfg.injection_rate = 0.7;
        const auto data = synthetic_dataset(cfg).traces;
        resub += evaluate(data).rule_recall;
        EvalOptions split;
        split.mode = EvalMode::Split;
        split.seed = seed;
        held += evaluate(data, split).rule_recall;
    }
    EXPECT_GE(resub, held);
}

TEST(Synthetic, InjectedPairsOnlyInFailedTraces) {
    SyntheticConfig cfg;
    const auto data = synthetic_dataset(cfg);
    EXPECT_EQ(data.traces.size(), cfg.traces);
    EXPECT_EQ(data.states.size(), cfg.states);
    EXPECT_EQ(data.injected.size(), cfg.injected_pairs);
    for (const auto& t : data.traces) {
        EXPECT_TRUE(trace_is_valid(t));
        bool has = false;
        for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) has |= data.injected.count({t.steps[i].state, t.steps[i + 1].state}) > 0;
        EXPECT_EQ(has, t.outcome == Outcome::Failed);
    }
    EXPECT_EQ(synthetic_dataset(cfg).traces, data.traces);
}

TEST(CurveFit, RecoversKnownCoefficients) {
    std::vector<double> x;
    std::vector<double> lin;
    std::vector<double> expo;
    for (int i = 1; i <= 200; ++i) {
        x.push_back(i);
        lin.push_back(0.015 * i - 0.617);
        expo.push_back(2.072 * std::exp(0.004 * i));
    }
    const auto l = fit_curve(x, lin, CurveModel::Linear);
    EXPECT_LE(std::abs(l.a - 0.015) / 0.015, 1e-9);
    EXPECT_LE(std::abs(l.b + 0.617) / 0.617, 1e-9);
    EXPECT_GE(l.r_squared, 1 - 1e-12);
    const auto e = fit_curve(x, expo, CurveModel::Exponential);
    EXPECT_LE(std::abs(e.a - 2.072) / 2.072, 1e-9);
    EXPECT_LE(std::abs(e.b - 0.004) / 0.004, 1e-9);
    EXPECT_GE(e.r_squared, 1 - 1e-12);
}

TEST(CurveFit, RSquaredIsRecomputable) {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const std::vector<double> y{1.1, 1.9, 3.3, 3.8, 5.4, 5.9};
    for (auto m : {CurveModel::Linear, CurveModel::Exponential}) {
        const auto f = fit_curve(x, y, m);
        double mean = 0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(y.size());
        double res = 0;
        double tot = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            res += (y[i] - f(x[i])) * (y[i] - f(x[i]));
            tot += (y[i] - mean) * (y[i] - mean);
        }
        EXPECT_NEAR(f.r_squared, 1 - res / tot, 1e-12);
    }
}

TEST(CurveFit, Errors) {
    const std::vector<double> two{1, 2};
    EXPECT_EQ(kind_of([&] { fit_curve(two, two, CurveModel::Linear); }), ErrorKind::InvalidArgument);
    const std::vector<double> flat{3, 3, 3};
    const std::vector<double> y{1, 2, 3};
    EXPECT_EQ(kind_of([&] { fit_curve(flat, y, CurveModel::Linear); }), ErrorKind::DegenerateInput);
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> zero{0, 1, 2};
    EXPECT_EQ(kind_of([&] { fit_curve(x, zero, CurveModel::Exponential); }), ErrorKind::NonPositiveValues);
}
