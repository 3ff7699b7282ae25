#include "fuzztwin/twin/socket_handshake.hpp"

#include <exception>
#include <future>
#include <mutex>
#include <set>
#include <thread>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/relay/net.hpp"
#include "fuzztwin/relay/socket_relay.hpp"

namespace fuzztwin::twin {

namespace {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;
using std::chrono::nanoseconds;

struct Leg {
    relay::Socket out;
    relay::Socket in;
};

Leg open_leg(const std::string& host, std::uint16_t listen_port, std::uint16_t send_port, milliseconds timeout) {
    relay::Socket listener = relay::listen_tcp(host, listen_port);
    Leg leg;
    leg.out = relay::connect_tcp(host, send_port, timeout);
    leg.in = relay::accept_tcp(listener, timeout);
    return leg;
}

void send_all(const Leg& leg, const Endpoint::Output& out) {
    for (const auto& f : out.frames) relay::send_frame(leg.out, f.raw);
}

// Reads until the relay closes our inbound leg so no unread bytes turn the
// close into a reset.
void drain(const Leg& leg, milliseconds limit) {
    std::vector<std::uint8_t> pdu;
    const auto end = Clock::now() + limit;
    while (Clock::now() < end) {
        if (relay::recv_frame(leg.in, pdu, milliseconds(50)) == relay::RecvStatus::Closed) return;
    }
}

milliseconds until(Clock::time_point t) {
    const auto d = std::chrono::duration_cast<milliseconds>(t - Clock::now());
    return std::max(milliseconds(0), d + milliseconds(1));
}

}  // namespace

relay::RelayConfig ephemeral_relay_config() {
    relay::RelayConfig cfg;
    std::set<std::uint16_t> seen;
    std::uint16_t* ports[] = {&cfg.ue_listen_port, &cfg.gnb_forward_port, &cfg.gnb_listen_port, &cfg.ue_forward_port};
    for (auto* p : ports) {
        do {
            *p = relay::ephemeral_port();
        } while (!seen.insert(*p).second);
    }
    return cfg;
}

HandshakeResult run_socket_handshake(const TwinConfig& config, const VulnerabilityProfile& profile,
                                     Interceptor& interceptor, const relay::RelayConfig& ports,
                                     milliseconds connect_timeout) {
    ports.validate();
    const auto origin = Clock::now();
    const auto deadline = origin + nanoseconds(config.connection_timeout_ns);
    auto since_origin = [origin] {
        return std::chrono::duration_cast<nanoseconds>(Clock::now() - origin).count();
    };

    std::mutex icpt_mu;
    auto hook = [&](Message& m, Direction d) {
        std::lock_guard lock(icpt_mu);
        interceptor.before_encode(m, d, since_origin());
    };
    Endpoint ue(Role::Ue, config.ue_params(&profile), config.session_key);
    Endpoint gnb(Role::Gnb, config.gnb_params(&profile), config.session_key);
    ue.set_encode_hook(hook);
    gnb.set_encode_hook(hook);

    std::atomic<bool> stop{false};
    std::promise<void> listening;
    auto listening_done = listening.get_future();
    relay::RelayReport report;
    std::exception_ptr relay_error, gnb_error;

    std::thread relay_thread([&] {
        relay::SocketRelayOptions opts;
        opts.connect_timeout = connect_timeout;
        opts.origin = origin;
        opts.stop = &stop;
        bool signalled = false;
        opts.on_listening = [&] {
            signalled = true;
            listening.set_value();
        };
        try {
            report = relay::run_relay(
                ports,
                [&](const Frame& f) {
                    std::lock_guard lock(icpt_mu);
                    return interceptor.on_frame(f);
                },
                {}, opts);
        } catch (...) {
            relay_error = std::current_exception();
            stop = true;
            if (!signalled) listening.set_value();
        }
    });
    listening_done.wait();
    if (relay_error) {
        relay_thread.join();
        std::rethrow_exception(relay_error);
    }

    std::optional<std::int64_t> complete_at;
    std::thread gnb_thread([&] {
        try {
            Leg leg = open_leg(ports.host, ports.gnb_forward_port, ports.gnb_listen_port, connect_timeout);
            std::vector<std::uint8_t> pdu;
            while (!stop && Clock::now() < deadline && !gnb.failed()) {
                const auto st = relay::recv_frame(leg.in, pdu, std::min(milliseconds(50), until(deadline)));
                if (st == relay::RecvStatus::Closed) break;
                if (st == relay::RecvStatus::Timeout) continue;
                auto out = gnb.on_frame(Frame{pdu, Direction::Uplink, since_origin()});
                if (out.connection_complete) {
                    complete_at = since_origin();
                    break;
                }
                send_all(leg, out);
            }
            leg.out.shutdown_write();
            drain(leg, connect_timeout);
        } catch (...) {
            gnb_error = std::current_exception();
            stop = true;
        }
    });

    std::exception_ptr ue_error;
    std::optional<std::int64_t> ue_failed_at;
    try {
        Leg leg = open_leg(ports.host, ports.ue_forward_port, ports.ue_listen_port, connect_timeout);
        const auto rto = nanoseconds(config.retransmit_timeout_ns);
        std::optional<Clock::time_point> timer;
        auto arm = [&] { timer = awaiting_response(ue.state()) ? std::optional(Clock::now() + rto) : std::nullopt; };
        send_all(leg, ue.start());
        arm();
        std::vector<std::uint8_t> pdu;
        while (!stop && !ue.failed() && ue.state().phase != Phase::Connected && Clock::now() < deadline) {
            const auto next = timer ? std::min(*timer, deadline) : deadline;
            const auto st = relay::recv_frame(leg.in, pdu, std::min(milliseconds(50), until(next)));
            if (st == relay::RecvStatus::Closed) break;
            if (st == relay::RecvStatus::Timeout) {
                if (timer && Clock::now() >= *timer) {
                    send_all(leg, ue.on_timer());
                    arm();
                }
                continue;
            }
            const auto before = ue.state();
            send_all(leg, ue.on_frame(Frame{pdu, Direction::Downlink, since_origin()}));
            if (!(before == ue.state())) arm();
        }
        if (ue.failed()) ue_failed_at = since_origin();
        leg.out.shutdown_write();
        drain(leg, connect_timeout);
    } catch (...) {
        ue_error = std::current_exception();
        stop = true;
    }
    gnb_thread.join();
    relay_thread.join();
    for (const auto& e : {relay_error, gnb_error, ue_error})
        if (e) std::rethrow_exception(e);

    HandshakeResult res;
    auto& tr = res.trace;
    for (const auto& rec : report.records) {
        if (!rec.forwarded) continue;
        const auto& f = *rec.forwarded;
        tr.steps.push_back(TraceStep{derive_state_id(f.raw), f.timestamp_ns, f.direction, f.raw});
    }
    tr.fuzz_action = interceptor.applied();
    if (tr.fuzz_action) tr.fuzz_time_ns = interceptor.applied_time_ns();
    tr.service_type = gnb.state().service_type;
    if (complete_at && *complete_at <= config.connection_timeout_ns) {
        tr.outcome = Outcome::Success;
        tr.outcome_time_ns = *complete_at;
    } else {
        tr.outcome = Outcome::Failed;
        tr.outcome_time_ns = ue_failed_at ? *ue_failed_at : config.connection_timeout_ns;
        if (gnb.failed()) {
            tr.reason = gnb.state().failure;
        } else if (ue.failed()) {
            tr.reason = ue.state().failure;
        } else {
            tr.reason = FailureReason::Timeout;
        }
    }
    if (!tr.steps.empty()) tr.outcome_time_ns = std::max(tr.outcome_time_ns, tr.steps.back().time_ns);
    if (tr.fuzz_action) tr.outcome_time_ns = std::max(tr.outcome_time_ns, tr.fuzz_time_ns);
    res.relay = std::move(report);
    res.ue = ue.state();
    res.gnb = gnb.state();
    return res;
}

}  // namespace fuzztwin::twin
