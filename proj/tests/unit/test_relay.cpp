#include <gtest/gtest.h>

#include <chrono>
#include <future>
#include <thread>
#include <vector>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"
#include "fuzztwin/common/state_id.hpp"
#include "fuzztwin/engine/target.hpp"
#include "fuzztwin/relay/net.hpp"
#include "fuzztwin/relay/relay.hpp"
#include "fuzztwin/relay/socket_relay.hpp"
#include "fuzztwin/twin/codec.hpp"
#include "fuzztwin/twin/handshake.hpp"
#include "fuzztwin/twin/socket_handshake.hpp"

using namespace fuzztwin;
using namespace fuzztwin::relay;
using std::chrono::milliseconds;

namespace {

constexpr std::uint16_t kRnti = 0x4601;

twin::Frame frame_of(twin::MsgType type, std::uint8_t tid = 0) {
    const auto msg = twin::make_message(type, kRnti, tid);
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

class DropDownlink : public twin::Interceptor {
public:
    ForwardDecision on_frame(const twin::Frame& f) override {
        if (f.direction == Direction::Downlink) return Drop{};
        return Pass{};
    }
};

twin::TwinConfig fast_config() {
    twin::TwinConfig cfg;
    cfg.retransmit_timeout_ns = 50'000'000;
    cfg.connection_timeout_ns = 400'000'000;
    return cfg;
}

}  // namespace

TEST(ApplyMutation, PassAndDrop) {
    const auto f = frame_of(twin::MsgType::RRCSetupRequest);
    EXPECT_EQ(apply_mutation(f, Pass{}), f);
    EXPECT_FALSE(apply_mutation(f, Drop{}).has_value());
}

TEST(ApplyMutation, BitMaskKeepsStaleChecksumAndFailsIntegrity) {
    twin::SecurityContext ctx;
    ctx.session_key = 99;
    ctx.activated = true;
    auto msg = twin::make_message(twin::MsgType::RRCReconfiguration, kRnti);
    msg.fields["sr_config_index"] = 32;
    const auto f = twin::encode_message(msg, ctx, Direction::Downlink);
    for (std::uint8_t mask = 1; mask != 0; mask = static_cast<std::uint8_t>(mask << 1)) {
        const auto out = apply_mutation(f, MutateBits{{{twin::kHeaderLength, mask}}});
        ASSERT_TRUE(out.has_value());
        EXPECT_EQ(out->raw[twin::kHeaderLength], f.raw[twin::kHeaderLength] ^ mask);
        EXPECT_TRUE(std::equal(f.raw.end() - 2, f.raw.end(), out->raw.end() - 2));
        EXPECT_EQ(twin::decode_message(*out, ctx, kRnti).error, ErrorKind::IntegrityError);
    }
}

TEST(ApplyMutation, OffsetPastEndIsRejected) {
    const auto f = frame_of(twin::MsgType::RRCSetup);
    EXPECT_EQ(kind_of([&] { apply_mutation(f, MutateBits{{{f.raw.size(), 1}}}); }),
              ErrorKind::OffsetOutOfRange);
}

TEST(ApplyMutation, ReplaceSubstitutesAndPreservesDirection) {
    const auto original = frame_of(twin::MsgType::RRCSetupComplete, 1);
    const auto recorded = frame_of(twin::MsgType::SecurityModeComplete, 2);
    const auto out = apply_mutation(original, ReplaceFrame{recorded});
    ASSERT_TRUE(out.has_value());
    EXPECT_EQ(out->raw, recorded.raw);
    const auto downlink = frame_of(twin::MsgType::RRCSetup);
    EXPECT_EQ(kind_of([&] { apply_mutation(original, ReplaceFrame{downlink}); }),
              ErrorKind::InvalidArgument);
}

TEST(RelayCore, RecordsEveryFrameOnceInOrder) {
    std::vector<RelayRecord> sunk;
    int n = 0;
    RelayCore core([&](const twin::Frame&) -> ForwardDecision {
        return (n++ % 3 == 0) ? ForwardDecision{Drop{}} : ForwardDecision{Pass{}};
    }, [&](const RelayRecord& r) { sunk.push_back(r); });
    std::vector<twin::Frame> sent;
    for (std::uint8_t i = 0; i < 30; ++i) {
        auto f = frame_of(i % 2 ? twin::MsgType::RRCSetup : twin::MsgType::RRCSetupRequest, i);
        f.timestamp_ns = i + 1;
        sent.push_back(f);
        core.process(f);
    }
    const auto report = core.report();
    ASSERT_EQ(report.records.size(), sent.size());
    ASSERT_EQ(sunk.size(), sent.size());
    for (std::size_t i = 0; i < sent.size(); ++i) {
        EXPECT_EQ(report.records[i].original, sent[i]);
        EXPECT_EQ(report.records[i].forwarded.has_value(), i % 3 != 0);
    }
    EXPECT_EQ(report.dropped, 10u);
    EXPECT_EQ(report.uplink_forwarded + report.downlink_forwarded, 20u);
}

TEST(RelayConfigTest, DefaultsAndCollisions) {
    RelayConfig cfg;
    EXPECT_EQ(cfg.ue_listen_port, 2003);
    EXPECT_EQ(cfg.gnb_forward_port, 2000);
    EXPECT_EQ(cfg.gnb_listen_port, 2002);
    EXPECT_EQ(cfg.ue_forward_port, 2001);
    EXPECT_NO_THROW(cfg.validate());
    cfg.ue_forward_port = cfg.ue_listen_port;
    EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::InvalidArgument);
}

TEST(VirtualRelay, CommandReplaceSetupCompleteWithSecurityModeCompleteFails) {
    twin::Interceptor identity;
    const auto baseline = twin::run_handshake(twin::TwinConfig{}, {}, identity).trace;
    const auto& setup_complete = baseline.steps[2];
    const auto& smc_complete = baseline.steps[4];
    ASSERT_EQ(setup_complete.raw[0], static_cast<std::uint8_t>(twin::MsgType::RRCSetupComplete));
    ASSERT_EQ(smc_complete.raw[0], static_cast<std::uint8_t>(twin::MsgType::SecurityModeComplete));

    const CommandReplace pair{setup_complete.state, smc_complete.state};
    engine::CommandReplaceInterceptor replace(
        pair, twin::Frame{smc_complete.raw, Direction::Uplink, 0}, Layer::Rrc);
    const auto r = twin::run_handshake(twin::TwinConfig{}, {}, replace);
    EXPECT_EQ(r.trace.outcome, Outcome::Failed);
    ASSERT_TRUE(r.trace.fuzz_action.has_value());
    EXPECT_EQ(std::get<CommandReplace>(r.trace.fuzz_action->kind), pair);
    EXPECT_EQ(r.trace.steps[2].state, smc_complete.state);
}

TEST(SocketRelay, IdentityForwardsByteStreamsUnchangedPerDirection) {
    const auto cfg = twin::ephemeral_relay_config();
    Socket gnb_side = listen_tcp(cfg.host, cfg.gnb_forward_port);
    Socket ue_side = listen_tcp(cfg.host, cfg.ue_forward_port);
    std::promise<void> listening;
    auto relay = std::async(std::launch::async, [&] {
        SocketRelayOptions opts;
        opts.on_listening = [&] { listening.set_value(); };
        return run_relay(cfg, [](const twin::Frame&) -> ForwardDecision { return Pass{}; }, {}, opts);
    });
    listening.get_future().wait();
    Socket ue = connect_tcp(cfg.host, cfg.ue_listen_port, milliseconds(2000));
    Socket gnb = connect_tcp(cfg.host, cfg.gnb_listen_port, milliseconds(2000));
    Socket uplink_out = accept_tcp(gnb_side, milliseconds(2000));
    Socket downlink_out = accept_tcp(ue_side, milliseconds(2000));

    Rng rng(21);
    std::vector<std::vector<std::uint8_t>> up;
    std::vector<std::vector<std::uint8_t>> down;
    for (int i = 0; i < 25; ++i) {
        auto u = frame_of(twin::MsgType::UECapabilityInformation, static_cast<std::uint8_t>(i)).raw;
        auto d = frame_of(twin::MsgType::RRCSetup, static_cast<std::uint8_t>(rng.below(256))).raw;
        send_frame(ue, u);
        send_frame(gnb, d);
        up.push_back(u);
        down.push_back(d);
    }
    ue.shutdown_write();
    gnb.shutdown_write();

    auto drain = [](const Socket& s) {
        std::vector<std::vector<std::uint8_t>> got;
        std::vector<std::uint8_t> pdu;
        while (recv_frame(s, pdu, milliseconds(2000)) == RecvStatus::Frame) got.push_back(pdu);
        return got;
    };
    EXPECT_EQ(drain(uplink_out), up);
    EXPECT_EQ(drain(downlink_out), down);
    const auto report = relay.get();
    EXPECT_EQ(report.records.size(), 50u);
    EXPECT_EQ(report.uplink_forwarded, 25u);
    EXPECT_EQ(report.downlink_forwarded, 25u);
    std::int64_t last = -1;
    for (const auto& r : report.records) {
        ASSERT_TRUE(r.forwarded.has_value());
        EXPECT_EQ(r.forwarded->raw, r.original.raw);
        EXPECT_GT(r.original.timestamp_ns, last);
        last = r.original.timestamp_ns;
    }
}

TEST(SocketRelay, OccupiedPortIsABindFailure) {
    auto cfg = twin::ephemeral_relay_config();
    Socket squatter = listen_tcp(cfg.host, 0);
    cfg.ue_listen_port = local_port(squatter);
    EXPECT_EQ(kind_of([&] { listen_tcp(cfg.host, cfg.ue_listen_port); }), ErrorKind::PortBindFailure);
    SocketRelayOptions opts;
    opts.connect_timeout = milliseconds(200);
    EXPECT_EQ(kind_of([&] {
                  run_relay(cfg, [](const twin::Frame&) -> ForwardDecision { return Pass{}; }, {}, opts);
              }),
              ErrorKind::PortBindFailure);
}

TEST(SocketHandshake, TransparentAgainstVirtualRun) {
    twin::Interceptor a;
    twin::Interceptor b;
    const auto virt = twin::run_handshake(twin::TwinConfig{}, {}, a).trace;
    const auto sock = twin::run_socket_handshake(twin::TwinConfig{}, {}, b, twin::ephemeral_relay_config());
    EXPECT_EQ(sock.trace.outcome, Outcome::Success);
    EXPECT_EQ(sock.trace.states(), virt.states());
    EXPECT_EQ(sock.trace.service_type, virt.service_type);
    EXPECT_TRUE(trace_is_valid(sock.trace));
    for (std::size_t i = 0; i < virt.steps.size(); ++i) {
        EXPECT_EQ(sock.trace.steps[i].raw, virt.steps[i].raw);
    }
}

TEST(SocketHandshake, DroppedDownlinkTimesOut) {
    DropDownlink drop;
    const auto cfg = fast_config();
    const auto r = twin::run_socket_handshake(cfg, {}, drop, twin::ephemeral_relay_config());
    EXPECT_EQ(r.trace.outcome, Outcome::Failed);
    EXPECT_EQ(r.trace.reason, FailureReason::Timeout);
    EXPECT_EQ(r.relay.downlink_forwarded, 0u);
    for (const auto& s : r.trace.steps) {
        EXPECT_EQ(s.state, r.trace.steps.front().state);
    }
}
