#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "fixtures.hpp"
#include "fuzztwin/analysis/synthetic.hpp"
#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"
#include "fuzztwin/predict/dataset.hpp"
#include "fuzztwin/predict/lstm.hpp"
#include "fuzztwin/predict/model_io.hpp"
#include "fuzztwin/predict/train.hpp"
#include "oracles.hpp"

using namespace fuzztwin;
using namespace fuzztwin::predict;
namespace fs = std::filesystem;

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

// Failed traces carry a sentinel state somewhere in their first six steps;
// successful ones never do.
std::vector<ConnectionTrace> toy_set(std::uint64_t seed, std::size_t n = 120) {
    Rng rng(seed);
    const auto states = analysis::synthetic_states(9);
    const StateId sentinel = states[8];
    std::vector<ConnectionTrace> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<StateId> seq(6 + rng.below(5));
        for (auto& s : seq) s = states[rng.below(8)];
        const bool failed = i % 2 == 0;
        if (failed) seq[rng.below(6)] = sentinel;
        out.push_back(fixtures::trace_of(seq, failed ? Outcome::Failed : Outcome::Success,
                                         1000 + static_cast<std::int64_t>(i), 10'000'000));
    }
    return out;
}

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.embed_dim = 8;
    cfg.hidden_dim = 8;
    return cfg;
}

std::vector<std::uint32_t> random_sequence(Rng& rng, std::size_t len, std::size_t vocab) {
    std::vector<std::uint32_t> seq(len);
    for (auto& s : seq) s = static_cast<std::uint32_t>(rng.below(vocab));
    return seq;
}

}  // namespace

TEST(Lstm, ZeroParametersGiveOneHalf) {
    const auto m = LstmModel::zeros(5);
    const std::vector<std::uint32_t> seq{1, 2, 3, 4};
    EXPECT_EQ(lstm_forward(m, seq), 0.5);
    EXPECT_EQ(kind_of([] { LstmModel::zeros(0); }), ErrorKind::InvalidArgument);
}

TEST(Lstm, MatchesScalarRecomputationOnHandSetWeights) {
    auto m = LstmModel::zeros(3, 2, 2);
    // Deterministic, distinct weights so every gate and every index matters.
    for (std::size_t k = 0; k < m.parameter_count(); ++k) {
        m.parameter(k) = 0.1 * std::sin(1.0 + 0.7 * static_cast<double>(k));
    }
    const std::vector<std::uint32_t> seq{2, 0, 1};
    EXPECT_NEAR(lstm_forward(m, seq), oracle::lstm_forward(m, seq), 1e-15);
}

TEST(Lstm, MatchesScalarRecomputationOnRandomModels) {
    Rng rng(3);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto m = LstmModel::random(12, seed, 5, 7);
        const auto seq = random_sequence(rng, 1 + rng.below(20), 12);
        const double p = lstm_forward(m, seq);
        EXPECT_NEAR(p, oracle::lstm_forward(m, seq), 1e-13);
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
    }
}

TEST(Lstm, InputErrors) {
    const auto m = LstmModel::random(4, 1);
    const std::vector<std::uint32_t> empty;
    EXPECT_EQ(kind_of([&] { lstm_forward(m, empty); }), ErrorKind::EmptySequence);
    const std::vector<std::uint32_t> bad{1, 4};
    EXPECT_EQ(kind_of([&] { lstm_forward(m, bad); }), ErrorKind::IndexOutOfVocab);
}

TEST(Lstm, StableOnTenThousandSteps) {
    auto m = LstmModel::random(6, 2);
    for (auto& w : m.W) w *= 20;
    for (auto& w : m.w_out) w *= 50;
    Rng rng(4);
    const auto seq = random_sequence(rng, 10'000, 6);
    const double p = lstm_forward(m, seq);
    EXPECT_TRUE(std::isfinite(p));
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_TRUE(std::isfinite(lstm_loss(m, seq, 1)));
    EXPECT_TRUE(std::isfinite(lstm_loss(m, seq, 0)));
}

TEST(GradientCheck, QuadraticStubIsExact) {
    const std::vector<double> x{0.3, -1.2, 2.5, 0.0, 4.0};
    const std::vector<double> coeff{1.0, 2.0, 0.5, 3.0, 0.25};
    auto f = [&](std::span<const double> v) {
        double s = 0;
        for (std::size_t i = 0; i < v.size(); ++i) s += coeff[i] * v[i] * v[i] + v[i];
        return s;
    };
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) grad[i] = 2 * coeff[i] * x[i] + 1;
    EXPECT_LE(gradient_check(f, grad, x, 1e-5), 1e-10);
    EXPECT_EQ(kind_of([&] { gradient_check(f, grad, x, 1e-2); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { gradient_check(f, grad, x, 1e-9); }), ErrorKind::InvalidArgument);
}

TEST(GradientCheck, LstmBackwardAgreesAcrossSeeds) {
    Rng rng(5);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto m = LstmModel::random(7, seed, 4, 6);
        const auto seq = random_sequence(rng, 5, 7);
        const int label = static_cast<int>(seed % 2);
        EXPECT_LE(gradient_check(m, seq, label, 1e-5), 1e-4) << seed;
    }
}

TEST(GradientCheck, CatchesInjectedForgetGateFault) {
    Rng rng(6);
    const auto m = LstmModel::random(7, 1, 4, 6);
    const auto seq = random_sequence(rng, 5, 7);
    EXPECT_GT(gradient_check(m, seq, 1, 1e-5, BackwardFault::DropForgetGate), 1e-2);
}

TEST(GradientCheck, AccumulatesAcrossSamples) {
    Rng rng(8);
    const auto m = LstmModel::random(5, 3, 3, 4);
    const auto a = random_sequence(rng, 4, 5);
    const auto b = random_sequence(rng, 6, 5);
    LstmGrad ga(m);
    LstmGrad gb(m);
    LstmGrad both(m);
    lstm_loss_and_grad(m, a, 1, ga);
    lstm_loss_and_grad(m, b, 0, gb);
    lstm_loss_and_grad(m, a, 1, both);
    lstm_loss_and_grad(m, b, 0, both);
    for (std::size_t k = 0; k < m.parameter_count(); ++k) {
        EXPECT_NEAR(both.flat(k), ga.flat(k) + gb.flat(k), 1e-14);
    }
}

TEST(Roc, HandExamples) {
    const std::vector<double> s{0.9, 0.8, 0.3};
    const std::vector<int> l{1, 0, 1};
    EXPECT_DOUBLE_EQ(roc_and_auc(s, l).auc, 0.5);
    const std::vector<double> sep{0.9, 0.8, 0.2, 0.1};
    const std::vector<int> sl{1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(roc_and_auc(sep, sl).auc, 1.0);
    const std::vector<double> ties(6, 0.4);
    const std::vector<int> tl{1, 0, 1, 0, 0, 1};
    EXPECT_DOUBLE_EQ(roc_and_auc(ties, tl).auc, 0.5);
    const std::vector<int> one{1, 1, 1};
    EXPECT_EQ(kind_of([&] { roc_and_auc(s, one); }), ErrorKind::SingleClass);
    const std::vector<int> short_labels{1, 0};
    EXPECT_EQ(kind_of([&] { roc_and_auc(s, short_labels); }), ErrorKind::InvalidArgument);
}

TEST(Roc, TrapezoidEqualsPairEnumeration) {
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(999);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        const bool coarse = rng.below(2);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.below(2));
            const double u = rng.uniform() + 0.3 * labels[i];
            scores[i] = coarse ? std::round(u * 10) / 10 : u;
        }
        labels[0] = 0;
        labels[1] = 1;
        const auto r = roc_and_auc(scores, labels);
        ASSERT_LE(std::abs(r.auc - oracle::auc_by_pairs(scores, labels)), 1e-12);
        ASSERT_EQ(r.roc.front(), (RocPoint{0, 0}));
        ASSERT_EQ(r.roc.back(), (RocPoint{1, 1}));
        double area = 0;
        for (std::size_t i = 1; i < r.roc.size(); ++i) {
            ASSERT_GE(r.roc[i].fpr, r.roc[i - 1].fpr);
            ASSERT_GE(r.roc[i].tpr, r.roc[i - 1].tpr);
            area += (r.roc[i].fpr - r.roc[i - 1].fpr) * (r.roc[i].tpr + r.roc[i - 1].tpr) / 2;
        }
        ASSERT_NEAR(area, r.auc, 1e-12);
    }
}

TEST(Dataset, CutoffTruncationAndLabels) {
    const auto states = analysis::synthetic_states(5);
    auto t = fixtures::trace_of({states[0], states[1], states[2], states[3], states[4]}, Outcome::Failed, 0,
                                100'000'000);
    const auto vocab = Vocabulary::build(std::vector<ConnectionTrace>{t});
    const auto s3 = make_sample(t, vocab, Cutoff::Steps(3));
    EXPECT_EQ(s3.states.size(), 3u);
    EXPECT_EQ(s3.label, 1);
    EXPECT_DOUBLE_EQ(s3.detection_time, 0.2);
    EXPECT_DOUBLE_EQ(s3.outcome_time, 0.5);
    const auto d = make_sample(t, vocab, Cutoff::Duration(0.25));
    EXPECT_EQ(d.states.size(), 3u);
    const auto exact = make_sample(t, vocab, Cutoff::Duration(0.2));
    EXPECT_EQ(exact.states.size(), 2u);
    EXPECT_EQ(make_sample(t, vocab, Cutoff::Steps(50)).states.size(), 5u);
    EXPECT_EQ(kind_of([&] { make_sample(t, vocab, Cutoff::Duration(0)); }), ErrorKind::EmptySequence);
    EXPECT_EQ(kind_of([&] { make_sample(t, vocab, Cutoff::Steps(0)); }), ErrorKind::EmptySequence);
}

TEST(Dataset, VocabularyReservesUnknown) {
    const auto states = analysis::synthetic_states(4);
    const Vocabulary v({states[2], states[0]});
    EXPECT_EQ(v.size(), 3u);
    EXPECT_NE(v.index_of(states[2]), 0u);
    EXPECT_NE(v.index_of(states[0]), 0u);
    EXPECT_EQ(v.index_of(states[3]), 0u);
    EXPECT_EQ(kind_of([&] { Vocabulary({states[1], states[1]}); }), ErrorKind::InvalidArgument);
}

TEST(Dataset, CutoffParsing) {
    EXPECT_EQ(cutoff_from_string("steps:10"), Cutoff::Steps(10));
    EXPECT_EQ(cutoff_from_string("8"), Cutoff::Steps(8));
    EXPECT_EQ(cutoff_from_string("duration:0.08"), Cutoff::Duration(0.08));
    EXPECT_EQ(cutoff_from_string("0.5s"), Cutoff::Duration(0.5));
    EXPECT_FALSE(cutoff_from_string("sometimes").has_value());
    EXPECT_EQ(Cutoff::Steps(10).describe(), "steps:10");
}

TEST(Train, PredictionIgnoresStatesAfterTheCutoff) {
    const auto data = toy_set(1);
    const auto r = lstm_train(data, Cutoff::Steps(4), quick_config());
    auto longer = data[0];
    for (int i = 0; i < 5; ++i) {
        longer.steps.push_back({data[1].steps[0].state, longer.steps.back().time_ns + 1, Direction::Uplink, {}});
    }
    EXPECT_EQ(predict_failure(r.model, r.vocab, data[0], Cutoff::Steps(4)),
              predict_failure(r.model, r.vocab, longer, Cutoff::Steps(4)));
}

TEST(Train, SeparableToySetIsLearned) {
    for (auto opt : {Optimizer::Adam, Optimizer::Sgd}) {
        auto cfg = quick_config();
        cfg.optimizer = opt;
        cfg.learning_rate = opt == Optimizer::Sgd ? 0.3 : 0.02;
        const auto r = lstm_train(toy_set(2), Cutoff::Steps(10), cfg);
        EXPECT_GE(r.report.accuracy, 0.95) << to_string(opt);
        EXPECT_EQ(r.report.epoch_loss.size(), cfg.epochs);
    }
}

TEST(Train, LossNonincreasingAtDefaultRate) {
    for (auto opt : {Optimizer::Adam, Optimizer::Sgd}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto cfg = quick_config();
            cfg.optimizer = opt;
            cfg.seed = seed;
            const auto r = lstm_train(toy_set(seed), Cutoff::Steps(10), cfg);
            const auto& loss = r.report.epoch_loss;
            for (std::size_t e = 1; e < loss.size(); ++e) {
                EXPECT_LE(loss[e], loss[e - 1]) << to_string(opt) << " seed " << seed << " epoch " << e;
            }
        }
    }
}

TEST(Train, DeterministicAndExecutionIndependent) {
    auto cfg = quick_config();
    cfg.runs = 3;
    const auto data = toy_set(3);
    const auto a = lstm_train(data, Cutoff::Steps(6), cfg, Execution::Serial);
    const auto b = lstm_train(data, Cutoff::Steps(6), cfg, Execution::Serial);
    const auto c = lstm_train(data, Cutoff::Steps(6), cfg, Execution::Parallel);
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(a.model, c.model);
    EXPECT_EQ(a.report.auc, c.report.auc);
    EXPECT_EQ(a.report.runs, 3u);
}

TEST(Train, Preconditions) {
    const auto data = toy_set(4);
    std::vector<ConnectionTrace> one_class;
    for (const auto& t : data) {
        if (t.outcome == Outcome::Success) one_class.push_back(t);
    }
    EXPECT_EQ(kind_of([&] { lstm_train(one_class, Cutoff::Steps(5), quick_config()); }), ErrorKind::SingleClass);
    const std::vector<ConnectionTrace> few(data.begin(), data.begin() + 10);
    EXPECT_EQ(kind_of([&] { lstm_train(few, Cutoff::Steps(5), quick_config()); }), ErrorKind::InvalidArgument);
    auto bad = quick_config();
    bad.test_fraction = 1.0;
    EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::InvalidArgument);
}

TEST(Train, LeadTimeIsNonNegative) {
    const auto r = lstm_train(toy_set(5), Cutoff::Steps(4), quick_config());
    EXPECT_GE(r.report.mean_lead_time, 0.0);
    EXPECT_GE(r.report.mean_detection_time, 0.0);
    EXPECT_GE(r.report.early_detection_fraction, 0.0);
    EXPECT_LE(r.report.early_detection_fraction, 1.0);
}

TEST(Sweep, DegenerateCutoffIsSkippedAndMoreStepsDoNotHurt) {
    const auto data = toy_set(6);
    const std::vector<Cutoff> cutoffs{Cutoff::Duration(0), Cutoff::Steps(1), Cutoff::Steps(10)};
    const auto sweep = cutoff_sweep(data, cutoffs, quick_config());
    ASSERT_EQ(sweep.entries.size(), 3u);
    EXPECT_TRUE(sweep.entries[0].skipped);
    EXPECT_EQ(sweep.entries[0].empty_samples, data.size());
    EXPECT_FALSE(sweep.entries[1].skipped);
    EXPECT_LE(sweep.entries[1].auc, sweep.entries[2].auc);
    const std::vector<Cutoff> none;
    EXPECT_EQ(kind_of([&] { cutoff_sweep(data, none, quick_config()); }), ErrorKind::InvalidArgument);
}

TEST(ModelIo, RoundTripAndCorruption) {
    const auto dir = fs::temp_directory_path() / ("fuzztwin_model_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const auto r = lstm_train(toy_set(7), Cutoff::Steps(6), quick_config());
    const auto path = dir / "m.model";
    save_model(path, r.model, r.vocab);
    const auto [model, vocab] = load_model(path);
    EXPECT_EQ(model, r.model);
    EXPECT_EQ(vocab.states(), r.vocab.states());

    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    auto write = [&](const std::string& data) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << data;
    };
    auto wrong_version = bytes;
    wrong_version[6] = '9';
    write(wrong_version);
    EXPECT_EQ(kind_of([&] { load_model(path); }), ErrorKind::UnsupportedFormat);
    auto wrong_magic = bytes;
    wrong_magic[0] = 'X';
    write(wrong_magic);
    EXPECT_EQ(kind_of([&] { load_model(path); }), ErrorKind::CorruptRecord);
    write(bytes.substr(0, bytes.size() - 3));
    EXPECT_EQ(kind_of([&] { load_model(path); }), ErrorKind::CorruptRecord);
    fs::remove_all(dir);
}
