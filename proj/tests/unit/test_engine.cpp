#include <gtest/gtest.h>

#include <map>
#include <set>
#include <vector>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"
#include "fuzztwin/common/state_id.hpp"
#include "fuzztwin/engine/campaign.hpp"
#include "fuzztwin/engine/experiment.hpp"
#include "fuzztwin/engine/pool.hpp"
#include "fuzztwin/engine/soal.hpp"
#include "fuzztwin/engine/syal.hpp"
#include "fuzztwin/engine/target.hpp"
#include "fuzztwin/twin/codec.hpp"
#include "fuzztwin/twin/handshake.hpp"
#include "fuzztwin/twin/service_type.hpp"

using namespace fuzztwin;
using namespace fuzztwin::engine;

namespace {

constexpr std::uint16_t kRnti = 0x4601;

twin::Frame frame_of(twin::MsgType type) {
    const auto msg = twin::make_message(type, kRnti);
    return twin::encode_message(msg, {}, msg.direction());
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

std::vector<StateId> states(std::size_t n) { return CommandSpaceTarget::make_commands(n); }

twin::VulnerabilityProfile all_pairs_profile(const std::vector<StateId>& s) {
    twin::VulnerabilityProfile p;
    for (auto a : s) {
        for (auto b : s) {
            if (a != b) p.vulnerable_pairs.insert({a, b});
        }
    }
    return p;
}

BitFuzz bit_fuzz_of(const FuzzAction& a) { return std::get<BitFuzz>(a.kind); }

}  // namespace

TEST(StateIdDerivation, StableAndDistinguishing) {
    const auto req = frame_of(twin::MsgType::RRCSetupRequest);
    EXPECT_EQ(derive_state_id(req.raw), derive_state_id(frame_of(twin::MsgType::RRCSetupRequest).raw));
    EXPECT_NE(derive_state_id(req.raw), derive_state_id(frame_of(twin::MsgType::RRCSetup).raw));
    auto other = twin::make_message(twin::MsgType::RRCSetupRequest, 0x4701);
    EXPECT_NE(derive_state_id(twin::encode_message(other, {}, Direction::Uplink).raw),
              derive_state_id(req.raw));
}

TEST(Pool, TwoCommandsGiveTwoOrderedCases) {
    CandidatePool pool;
    EXPECT_EQ(kind_of([&] { lal_schedule(pool, 1); }), ErrorKind::EmptyPool);
    EXPECT_TRUE(pool.observe(frame_of(twin::MsgType::RRCSetupComplete)));
    EXPECT_FALSE(pool.observe(frame_of(twin::MsgType::RRCSetupComplete)));
    EXPECT_TRUE(pool.observe(frame_of(twin::MsgType::SecurityModeComplete)));
    const auto cases = lal_schedule(pool, 1);
    ASSERT_EQ(cases.size(), 2u);
    EXPECT_EQ(cases[0].from, cases[1].to);
    EXPECT_EQ(cases[0].to, cases[1].from);
}

TEST(Pool, PairsStayWithinAChannel) {
    twin::Interceptor identity;
    const auto trace = twin::run_handshake(twin::TwinConfig{}, {}, identity).trace;
    CandidatePool pool;
    pool.observe(trace);
    std::size_t expected = 0;
    for (auto ch : pool.channels()) {
        const std::size_t k = pool.entries(ch).size();
        expected += k * (k - 1);
    }
    const auto pairs = pool.all_pairs();
    EXPECT_EQ(pairs.size(), expected);
    std::set<std::pair<StateId, StateId>> seen;
    for (const auto& p : pairs) {
        EXPECT_NE(p.from, p.to);
        EXPECT_EQ(physical_channel_of(p.from), physical_channel_of(p.to));
        EXPECT_TRUE(seen.insert({p.from, p.to}).second);
    }
}

TEST(Lal, FullCampaignCoversEveryPairOnce) {
    TwinCommandTarget target({}, {});
    target.bootstrap();
    const auto all = target.pool().all_pairs();
    CampaignOptions opts;
    opts.budget = all.size() + 10;
    auto result = lal_campaign(target.pool(), target, opts, 3);
    EXPECT_EQ(result.cases_run, all.size());
    EXPECT_EQ(target.pool().applied_count(), all.size());
    EXPECT_TRUE(target.pool().unapplied_pairs().empty());
    std::set<std::pair<StateId, StateId>> tried;
    for (const auto& t : result.traces) {
        ASSERT_TRUE(t.fuzz_action.has_value());
        const auto& c = std::get<CommandReplace>(t.fuzz_action->kind);
        EXPECT_TRUE(tried.insert({c.from, c.to}).second);
    }
    EXPECT_EQ(tried.size(), all.size());
}

TEST(Lal, UplinkSetupRequestReplacedBySecurityModeCompleteFails) {
    TwinCommandTarget target({}, {});
    const auto baseline = target.bootstrap();
    const CommandReplace pair{baseline.steps[0].state, baseline.steps[4].state};
    const auto r = target.attempt(pair, 1);
    EXPECT_TRUE(r.applied);
    EXPECT_EQ(r.outcome, Outcome::Failed);
}

TEST(Lal, DeterministicForSeed) {
    auto run = [](std::uint64_t seed) {
        TwinCommandTarget target({}, {});
        target.bootstrap();
        CampaignOptions opts;
        return lal_campaign(target.pool(), target, opts, seed);
    };
    const auto a = run(5);
    const auto b = run(5);
    EXPECT_EQ(a.traces, b.traces);
    EXPECT_EQ(a.found_curve, b.found_curve);
}

TEST(SyalUpdate, ExactArithmeticAndClamp) {
    EXPECT_EQ(syal_update_value(0.5, Outcome::Failed, 0.5, 0.1, 0.01), 0.75);
    EXPECT_EQ(syal_update_value(0.5, Outcome::Success, 0.5, 0.1, 0.01), 0.475);
    EXPECT_EQ(syal_update_value(0.8, Outcome::Failed, 0.5, 0.1, 0.01), 1.0);
    EXPECT_EQ(syal_update_value(0.0105, Outcome::Success, 0.5, 0.9, 0.01), 0.01);
    EXPECT_EQ(syal_update_value(0.5, Outcome::Success, 2.0, 0.9, 0.01), 0.01);
}

TEST(SyalUpdate, RowAndColumnOnly) {
    SyalParams params;
    params.p0 = 0.5;
    ProbabilityMatrix m(states(6), params.p0);
    syal_update(m, 1, 3, Outcome::Failed, params);
    for (std::size_t a = 0; a < 6; ++a) {
        for (std::size_t b = 0; b < 6; ++b) {
            if (a == b) continue;
            const bool touched = a == 1 || b == 3;
            EXPECT_EQ(m.p(a, b), touched ? 0.75 : 0.5) << a << "," << b;
        }
    }
    SyalParams entry = params;
    entry.scope = UpdateScope::Entry;
    ProbabilityMatrix e(states(6), entry.p0);
    syal_update(e, 1, 3, Outcome::Success, entry);
    for (std::size_t a = 0; a < 6; ++a) {
        for (std::size_t b = 0; b < 6; ++b) {
            if (a != b) EXPECT_EQ(e.p(a, b), (a == 1 && b == 3) ? 0.475 : 0.5);
        }
    }
}

TEST(SyalUpdate, DisjointUpdatesCommuteAwayFromTheClamp) {
    // Values stay inside [p_min, 1] through both orders, so only rounding
    // at the two crossing entries (a, d) and (c, b) can differ.
    SyalParams params;
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        ProbabilityMatrix x(states(8), params.p0);
        for (std::size_t i = 0; i < 8; ++i) {
            for (std::size_t j = 0; j < 8; ++j) {
                if (i != j) x.p(i, j) = rng.uniform(0.02, 0.4);
            }
        }
        ProbabilityMatrix y = x;
        const std::size_t a = rng.below(4);
        const std::size_t c = 4 + rng.below(4);
        const std::size_t b = 4 + rng.below(4);
        const std::size_t d = rng.below(4);
        if (a == d || c == b) continue;
        const auto o1 = rng.below(2) ? Outcome::Failed : Outcome::Success;
        const auto o2 = rng.below(2) ? Outcome::Failed : Outcome::Success;
        syal_update(x, a, b, o1, params);
        syal_update(x, c, d, o2, params);
        syal_update(y, c, d, o2, params);
        syal_update(y, a, b, o1, params);
        for (std::size_t i = 0; i < 8; ++i) {
            for (std::size_t j = 0; j < 8; ++j) {
                const bool crossing = (i == a && j == d) || (i == c && j == b);
                if (crossing) {
                    ASSERT_NEAR(x.p(i, j), y.p(i, j), 1e-15);
                } else {
                    ASSERT_EQ(x.p(i, j), y.p(i, j));
                }
            }
        }
    }
}

TEST(SyalUpdate, ClampBreaksCommutationAtCrossingEntries) {
    SyalParams params;
    params.alpha = 0.5;
    params.ratio = 0.1;
    ProbabilityMatrix x(states(4), 0.9);
    ProbabilityMatrix y = x;
    syal_update(x, 0, 2, Outcome::Failed, params);
    syal_update(x, 1, 3, Outcome::Success, params);
    syal_update(y, 1, 3, Outcome::Success, params);
    syal_update(y, 0, 2, Outcome::Failed, params);
    EXPECT_EQ(x.p(0, 3), 0.95);
    EXPECT_EQ(y.p(0, 3), 1.0);
}

TEST(SyalSelect, SingleEntryAndExhaustion) {
    ProbabilityMatrix m(states(3), 0.1);
    m.mark_tested(0, 1);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(syal_select(m, 0, rng), 2u);
    m.mark_tested(0, 2);
    EXPECT_EQ(kind_of([&] { syal_select(m, 0, rng); }), ErrorKind::RowExhausted);
}

TEST(SyalSelect, EmpiricalFrequencies) {
    Rng rng(77);
    for (auto [p1, p2, tol] : {std::tuple{0.5, 0.5, 0.05}, std::tuple{0.9, 0.1, 0.02}}) {
        ProbabilityMatrix m(states(3), 0.5);
        m.p(0, 1) = p1;
        m.p(0, 2) = p2;
        int first = 0;
        for (int i = 0; i < 10000; ++i) first += syal_select(m, 0, rng) == 1;
        EXPECT_NEAR(first / 10000.0, p1 / (p1 + p2), tol);
    }
}

TEST(SyalSelect, PairDrawNeverReturnsTestedOrDisallowed) {
    ProbabilityMatrix m(states(5), 0.1, [](StateId a, StateId b) { return (a.value ^ b.value) != 3; });
    Rng rng(4);
    std::set<std::pair<std::size_t, std::size_t>> drawn;
    while (m.exist_fuzzing()) {
        const auto [a, b] = syal_select_pair(m, rng);
        ASSERT_TRUE(m.selectable(a, b));
        m.mark_tested(a, b);
        drawn.insert({a, b});
    }
    EXPECT_EQ(drawn.size(), m.allowed_count());
    EXPECT_EQ(kind_of([&] { syal_select_pair(m, rng); }), ErrorKind::RowExhausted);
}

TEST(SyalParamsTest, Validation) {
    SyalParams p;
    EXPECT_NO_THROW(p.validate());
    p.alpha = 0;
    EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidArgument);
    p = SyalParams{};
    p.ratio = 1.5;
    EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidArgument);
    p = SyalParams{};
    p.p0 = 0.001;
    EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidArgument);
}

TEST(SyalCampaign, EmptyProfileRunsEveryPairWithZeroCurve) {
    CommandSpaceTarget target(6, {});
    CampaignOptions opts;
    const auto r = syal_campaign(target, SyalParams{}, opts, 1);
    EXPECT_EQ(r.cases_run, 30u);
    EXPECT_EQ(r.found_curve, std::vector<std::size_t>(30, 0));
}

TEST(SyalCampaign, AllVulnerableCurveEqualsCaseIndex) {
    const auto s = states(6);
    CommandSpaceTarget target(6, all_pairs_profile(s));
    const auto r = syal_campaign(target, SyalParams{}, CampaignOptions{}, 1);
    ASSERT_EQ(r.found_curve.size(), 30u);
    for (std::size_t i = 0; i < r.found_curve.size(); ++i) EXPECT_EQ(r.found_curve[i], i + 1);
}

TEST(SyalCampaign, DeterministicAndStopsWhenAllFound) {
    const auto s = states(10);
    const auto profile = twin::generate_profile(s, 5, twin::Clustering::RowClustered, 3);
    CommandSpaceTarget target(10, profile);
    CampaignOptions opts;
    opts.stop_when_all_known_found = true;
    const auto a = syal_campaign(target, SyalParams{}, opts, 9);
    const auto b = syal_campaign(target, SyalParams{}, opts, 9);
    EXPECT_EQ(a.found_curve, b.found_curve);
    EXPECT_EQ(a.matrix, b.matrix);
    ASSERT_FALSE(a.found_curve.empty());
    EXPECT_EQ(a.found_curve.back(), 5u);
    EXPECT_EQ(a.cases_to_find(5), a.cases_run);
    EXPECT_LE(a.cases_run, 90u);
}

TEST(SyalCampaign, FailureOnlyPairsNeverDecrease) {
    // Every pair in row 0 and column 1 is vulnerable, so each update that
    // touches (0, 1) is a failure.
    const auto s = states(6);
    twin::VulnerabilityProfile profile;
    for (std::size_t k = 0; k < 6; ++k) {
        if (k != 0) profile.vulnerable_pairs.insert({s[0], s[k]});
        if (k != 1) profile.vulnerable_pairs.insert({s[k], s[1]});
    }
    CommandSpaceTarget target(6, profile);
    SyalParams params;
    ProbabilityMatrix shadow(s, params.p0);
    std::vector<double> history{shadow.p(0, 1)};
    CampaignOptions opts;
    opts.on_attempt = [&](const AttemptRecord& rec) {
        const auto& c = std::get<CommandReplace>(rec.action.kind);
        syal_update(shadow, *shadow.index_of(c.from), *shadow.index_of(c.to), rec.result.outcome, params);
        history.push_back(shadow.p(0, 1));
    };
    const auto r = syal_campaign(target, params, opts, 2);
    ASSERT_TRUE(r.matrix.has_value());
    EXPECT_EQ(r.matrix->p(0, 1), shadow.p(0, 1));
    for (std::size_t i = 1; i < history.size(); ++i) EXPECT_GE(history[i], history[i - 1]);
    EXPECT_EQ(history.back(), 1.0);
}

TEST(SyalCampaign, PriorPairsAreBoostedBeforeTheFirstCase) {
    const auto s = states(6);
    CommandSpaceTarget target(6, {});
    CampaignOptions opts;
    opts.budget = 1;
    SyalParams params;
    const auto r = syal_campaign(target, params, opts, 1, {{s[0], s[1]}});
    ASSERT_TRUE(r.matrix.has_value());
    EXPECT_GT(r.matrix->p(0, 2), params.p0);
    EXPECT_GT(r.matrix->p(3, 1), params.p0);
}

TEST(RandomCampaign, CoversTheSpaceWithoutRepeats) {
    CommandSpaceTarget target(7, {});
    std::set<std::pair<StateId, StateId>> seen;
    CampaignOptions opts;
    opts.on_attempt = [&](const AttemptRecord& rec) {
        const auto& c = std::get<CommandReplace>(rec.action.kind);
        EXPECT_TRUE(seen.insert({c.from, c.to}).second);
    };
    const auto r = random_campaign(target, opts, 3);
    EXPECT_EQ(r.cases_run, 42u);
    EXPECT_EQ(seen.size(), 42u);
}

TEST(Soal, EnumerationCounts) {
    const auto causes = reference_field_domains(twin::MsgType::RRCSetupRequest);
    std::vector<FieldSpec> cause_only;
    for (const auto& s : causes) {
        if (s.field == "establishment_cause") cause_only.push_back(s);
    }
    EXPECT_EQ(soal_enumerate(cause_only, true, false).size(), 16u);
    EXPECT_EQ(soal_enumerate({{twin::MsgType::RRCSetupRequest, "ue_identity", {0, 1, 2}}}, true, false).size(), 3u);
    EXPECT_EQ(soal_enumerate({{twin::MsgType::RRCSetup, "srb_id", {2}}}, true, false).size(), 1u);
    EXPECT_EQ(soal_enumerate({{twin::MsgType::RRCSetup, "srb_id", {2, 2, 0}}}, true, false).size(), 2u);

    const auto domains = reference_field_domains();
    std::size_t declared = 0;
    for (const auto& s : domains) declared += s.values.size();
    const auto before = soal_enumerate(domains, true, false);
    EXPECT_EQ(before.size(), declared);
    EXPECT_EQ(soal_enumerate(domains, true, false), before);
    const auto both = soal_enumerate(domains, true, true);
    std::size_t zero_values = 0;
    for (const auto& s : domains) zero_values += std::count(s.values.begin(), s.values.end(), 0u);
    EXPECT_EQ(both.size(), 2 * declared - zero_values);
}

TEST(Soal, EnumerationErrors) {
    EXPECT_EQ(kind_of([] { soal_enumerate({{twin::MsgType::RRCSetup, "nope", {1}}}, true, false); }),
              ErrorKind::UnknownField);
    EXPECT_EQ(kind_of([] {
                  soal_enumerate({{twin::MsgType::RRCSetupRequest, "establishment_cause", {16}}}, true, false);
              }),
              ErrorKind::FieldOutOfRange);
}

TEST(Soal, ApplyBeforeEncryptionPassesIntegrity) {
    auto msg = twin::make_message(twin::MsgType::RRCSetupRequest, kRnti);
    msg.fields["establishment_cause"] = 0b0110;
    const FuzzAction action{BitFuzz{twin::MsgType::RRCSetupRequest, "establishment_cause", 0},
                            Layer::Rrc, EncryptionPhase::BeforeEncryption};
    const auto f = soal_apply(action, msg, {}, Direction::Uplink);
    const auto d = twin::decode_message(f, {}, kRnti);
    ASSERT_TRUE(d.ok());
    EXPECT_EQ(d.message->field("establishment_cause"), 0u);
}

TEST(Soal, ApplyAfterEncryptionFailsIntegrity) {
    for (const auto& action : soal_enumerate(reference_field_domains(), false, true)) {
        const auto type = bit_fuzz_of(action).msg_type;
        const auto msg = twin::make_message(type, kRnti);
        const auto frame = twin::encode_message(msg, {}, msg.direction());
        const auto f = soal_apply(action, frame);
        EXPECT_NE(f.raw, frame.raw);
        EXPECT_EQ(twin::decode_message(f, {}, kRnti).error, ErrorKind::IntegrityError);
    }
}

TEST(Soal, CampaignOutcomesPerField) {
    TwinCommandTarget target({}, {});
    const auto res = soal_campaign(target, soal_enumerate(reference_field_domains(), true, false),
                                   CampaignOptions{}, 1);
    EXPECT_EQ(res.baseline_service, twin::ServiceType::MoSig);
    for (const auto& c : res.cases) {
        const auto b = bit_fuzz_of(c.action);
        if (b.field == "establishment_cause") {
            EXPECT_EQ(c.trace.outcome, Outcome::Success);
            EXPECT_EQ(c.trace.service_type, twin::establishment_cause_effect(static_cast<std::uint8_t>(b.value)));
            EXPECT_EQ(c.vulnerable, b.value != 0b0110);
        } else if (b.field == "srb_id") {
            EXPECT_EQ(c.trace.outcome, Outcome::Failed);
            EXPECT_EQ(c.trace.reason, FailureReason::Reject);
            EXPECT_TRUE(c.vulnerable);
        } else {
            EXPECT_EQ(c.trace.outcome, Outcome::Success) << b.field << "=" << b.value;
            EXPECT_FALSE(c.vulnerable);
        }
    }
    const auto emergency = std::find_if(res.cases.begin(), res.cases.end(), [](const SoalCase& c) {
        const auto b = bit_fuzz_of(c.action);
        return b.field == "establishment_cause" && b.value == 0;
    });
    ASSERT_NE(emergency, res.cases.end());
    EXPECT_EQ(emergency->note, "service mo_sig -> emergency");
}

TEST(Soal, MacLayerCampaignAlwaysFails) {
    TwinTargetOptions opts;
    opts.layer = Layer::Mac;
    TwinCommandTarget target(opts, {});
    auto actions = soal_enumerate(reference_field_domains(twin::MsgType::RRCSetupRequest), false, true);
    for (auto& a : actions) a.layer = Layer::Mac;
    const auto res = soal_campaign(target, actions, CampaignOptions{}, 1);
    ASSERT_EQ(res.cases.size(), actions.size());
    for (const auto& c : res.cases) {
        EXPECT_EQ(c.trace.outcome, Outcome::Failed);
        EXPECT_EQ(c.trace.reason, FailureReason::IntegrityError);
    }
}

TEST(Experiment, SerialMatchesParallel) {
    ExperimentConfig cfg;
    cfg.commands = 12;
    cfg.vulnerable_pairs = 6;
    cfg.seeds = 4;
    const auto s = run_comparison(cfg, Execution::Serial);
    const auto p = run_comparison(cfg, Execution::Parallel);
    ASSERT_EQ(s.runs.size(), p.runs.size());
    for (std::size_t i = 0; i < s.runs.size(); ++i) {
        EXPECT_EQ(s.runs[i].random_curve, p.runs[i].random_curve);
        EXPECT_EQ(s.runs[i].syal_curve, p.runs[i].syal_curve);
    }
    EXPECT_EQ(s.median_syal_to_all, p.median_syal_to_all);
    EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
    EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
}

TEST(Experiment, MeanCurvePadsWithFinalValue) {
    const auto m = mean_curve({{1, 2}, {1, 1, 3, 4}}, 4);
    EXPECT_EQ(m, (std::vector<double>{1, 1.5, 2.5, 3}));
}

TEST(Experiment, SweepTerminatesEverywhere) {
    ExperimentConfig cfg;
    cfg.commands = 8;
    cfg.vulnerable_pairs = 4;
    cfg.seeds = 2;
    const auto rows = hyper_sweep(cfg, {0.5, 2.0}, {0.1, 0.9});
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        EXPECT_TRUE(r.all_terminated);
        EXPECT_LE(r.max_to_all, r.case_space);
    }
}
