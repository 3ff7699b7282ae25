#include "fuzztwin/twin/endpoint.hpp"

#include <algorithm>

namespace fuzztwin::twin {

std::string_view to_string(Role r) noexcept { return r == Role::Ue ? "ue" : "gnb"; }

std::string_view to_string(Phase p) noexcept {
    switch (p) {
        case Phase::Idle: return "IDLE";
        case Phase::SetupSent: return "SETUP_SENT";
        case Phase::SetupComplete: return "SETUP_COMPLETE";
        case Phase::SecurityPending: return "SECURITY_PENDING";
        case Phase::Secured: return "SECURED";
        case Phase::CapabilityPending: return "CAPABILITY_PENDING";
        case Phase::ReconfigPending: return "RECONFIG_PENDING";
        case Phase::Connected: return "CONNECTED";
        case Phase::Failed: return "FAILED";
    }
    return "UNKNOWN";
}

EndpointState initial_state(Role role, std::uint16_t rnti, std::uint64_t session_key) {
    EndpointState s;
    s.role = role;
    s.rnti = rnti;
    s.security.session_key = session_key;
    return s;
}

std::optional<MsgType> expected_message(const EndpointState& state) noexcept {
    if (state.role == Role::Ue) {
        switch (state.phase) {
            case Phase::SetupSent: return MsgType::RRCSetup;
            case Phase::SetupComplete: return MsgType::SecurityModeCommand;
            case Phase::Secured: return MsgType::UECapabilityEnquiry;
            case Phase::CapabilityPending: return MsgType::RRCReconfiguration;
            default: return std::nullopt;
        }
    }
    switch (state.phase) {
        case Phase::Idle: return MsgType::RRCSetupRequest;
        case Phase::SetupSent: return MsgType::RRCSetupComplete;
        case Phase::SecurityPending: return MsgType::SecurityModeComplete;
        case Phase::CapabilityPending: return MsgType::UECapabilityInformation;
        case Phase::ReconfigPending: return MsgType::RRCReconfigurationComplete;
        default: return std::nullopt;
    }
}

bool awaiting_response(const EndpointState& state) noexcept {
    return state.role == Role::Ue && expected_message(state).has_value();
}

namespace {

StateId state_of(MsgType type, std::uint16_t rnti) {
    const auto ch = static_cast<std::uint8_t>(channel_of(type));
    return make_state_id(ch, static_cast<std::uint8_t>(type), ch,
                         static_cast<std::uint8_t>(rnti >> 8));
}

StepResult fail(StepResult r, FailureReason why) {
    r.state.phase = Phase::Failed;
    r.state.failure = why;
    r.out.clear();
    return r;
}

FailureReason reason_of(const DecodeResult& d) {
    return d.error == ErrorKind::IntegrityError ? FailureReason::IntegrityError
                                                : FailureReason::MalformedFrame;
}

// Legal message that is not the one the endpoint waits for.
StepResult unexpected(StepResult r, const Message& m, const EndpointParams& params) {
    const auto expected = expected_message(r.state);
    if (expected && params.profile &&
        params.profile->contains(state_of(*expected, r.state.rnti), state_of(m.type, m.rnti))) {
        return fail(std::move(r), FailureReason::ProfileViolation);
    }
    return r;
}

StepResult accept(StepResult r, const Message& in, Phase next, std::vector<Message> out) {
    r.state.phase = next;
    r.state.last_rx = in;
    r.state.last_tx = out;
    r.state.retransmissions = 0;
    r.out = std::move(out);
    r.accepted = true;
    return r;
}

Message reply(MsgType type, const EndpointState& s, std::uint8_t tid) {
    return make_message(type, s.rnti, tid);
}

}  // namespace

StepResult ue_step(const EndpointState& state, const Event& event, const EndpointParams& params) {
    StepResult r{state, {}, false};
    auto& s = r.state;
    if (s.phase == Phase::Failed || s.phase == Phase::Connected) return r;

    if (std::holds_alternative<Start>(event)) {
        if (s.phase != Phase::Idle) return r;
        Message req = reply(MsgType::RRCSetupRequest, s, s.next_transaction++);
        req.fields["ue_identity"] = params.ue_identity;
        req.fields["establishment_cause"] = params.establishment_cause;
        s.phase = Phase::SetupSent;
        s.last_tx = {req};
        r.out = {req};
        return r;
    }

    if (std::holds_alternative<TimerExpired>(event)) {
        if (!awaiting_response(s)) return r;
        if (s.retransmissions >= params.max_retransmissions) {
            return fail(std::move(r), FailureReason::RetriesExhausted);
        }
        ++s.retransmissions;
        r.out = s.last_tx;
        return r;
    }

    const auto& decoded = std::get<IncomingFrame>(event).decoded;
    if (!decoded.ok()) return fail(std::move(r), reason_of(decoded));
    const Message& m = *decoded.message;
    if (s.last_rx && m == *s.last_rx) return r;  // late duplicate, timer covers loss
    if (m.type == MsgType::RRCReject) return fail(std::move(r), FailureReason::Reject);
    if (expected_message(s) != m.type) return unexpected(std::move(r), m, params);

    const auto tid = m.transaction_id;
    switch (s.phase) {
        case Phase::SetupSent:
            if (m.field("srb_id") != 1) return fail(std::move(r), FailureReason::Reject);
            return accept(std::move(r), m, Phase::SetupComplete,
                          {reply(MsgType::RRCSetupComplete, s, tid)});
        case Phase::SetupComplete:
            s.security.activated = true;  // SecurityModeComplete itself goes out in the clear
            return accept(std::move(r), m, Phase::Secured,
                          {reply(MsgType::SecurityModeComplete, s, tid)});
        case Phase::Secured:
            return accept(std::move(r), m, Phase::CapabilityPending,
                          {reply(MsgType::UECapabilityInformation, s, tid)});
        case Phase::CapabilityPending:
            return accept(std::move(r), m, Phase::Connected,
                          {reply(MsgType::RRCReconfigurationComplete, s, tid)});
        default:
            return r;
    }
}

StepResult gnb_step(const EndpointState& state, const Event& event, const EndpointParams& params) {
    StepResult r{state, {}, false};
    auto& s = r.state;
    if (s.phase == Phase::Failed || s.phase == Phase::Connected) return r;
    if (!std::holds_alternative<IncomingFrame>(event)) return r;

    const auto& decoded = std::get<IncomingFrame>(event).decoded;
    if (!decoded.ok()) return fail(std::move(r), reason_of(decoded));
    const Message& m = *decoded.message;

    if (s.last_rx && m == *s.last_rx) {
        // Peer retransmitted: our answer was lost, send it again.
        r.out = s.last_tx;
        return r;
    }
    if (m.type == MsgType::SecurityModeComplete && s.phase != Phase::SecurityPending) {
        return fail(std::move(r), FailureReason::SecurityViolation);
    }
    if (expected_message(s) != m.type) return unexpected(std::move(r), m, params);

    const auto tid = s.next_transaction;
    switch (s.phase) {
        case Phase::Idle: {
            s.service_type = establishment_cause_effect(
                static_cast<std::uint8_t>(m.field("establishment_cause")));
            Message setup = reply(MsgType::RRCSetup, s, tid);
            setup.fields["srb_id"] = params.srb_id;
            ++s.next_transaction;
            return accept(std::move(r), m, Phase::SetupSent, {setup});
        }
        case Phase::SetupSent:
            ++s.next_transaction;
            return accept(std::move(r), m, Phase::SecurityPending,
                          {reply(MsgType::SecurityModeCommand, s, tid)});
        case Phase::SecurityPending:
            s.security.activated = true;
            ++s.next_transaction;
            return accept(std::move(r), m, Phase::CapabilityPending,
                          {reply(MsgType::UECapabilityEnquiry, s, tid)});
        case Phase::CapabilityPending: {
            Message reconf = reply(MsgType::RRCReconfiguration, s, tid);
            reconf.fields["sr_config_index"] = params.sr_config_index;
            ++s.next_transaction;
            return accept(std::move(r), m, Phase::ReconfigPending, {reconf});
        }
        case Phase::ReconfigPending:
            return accept(std::move(r), m, Phase::Connected,
                          {reply(MsgType::ConnectionComplete, s, tid)});
        default:
            return r;
    }
}

Endpoint::Endpoint(Role role, EndpointParams params, std::uint64_t session_key)
    : params_(params), state_(initial_state(role, params.rnti, session_key)) {}

Endpoint::Output Endpoint::start() {
    const auto result = state_.role == Role::Ue ? ue_step(state_, Start{}, params_)
                                                : gnb_step(state_, Start{}, params_);
    return apply(result, nullptr, false);
}

Endpoint::Output Endpoint::on_timer() {
    const auto result = state_.role == Role::Ue ? ue_step(state_, TimerExpired{}, params_)
                                                : gnb_step(state_, TimerExpired{}, params_);
    return apply(result, nullptr, false);
}

Endpoint::Output Endpoint::on_frame(const Frame& frame) {
    IncomingFrame in;
    bool ciphered = false;
    if (state_.last_rx && !last_rx_raw_.empty() && frame.raw == last_rx_raw_) {
        // Byte-identical repeat: the cipher counter has moved on, so reuse the
        // earlier decode instead of decrypting again.
        in.decoded.message = state_.last_rx;
    } else {
        in.decoded = decode_message(frame, state_.security, state_.rnti);
        ciphered = in.decoded.ok() && is_ciphered(in.decoded.message->type, state_.security);
    }
    const auto result = state_.role == Role::Ue ? ue_step(state_, in, params_)
                                                : gnb_step(state_, in, params_);
    return apply(result, &frame.raw, ciphered);
}

Endpoint::Output Endpoint::apply(const StepResult& result, const std::vector<std::uint8_t>* rx_raw,
                                 bool rx_ciphered) {
    const Direction tx = state_.role == Role::Ue ? Direction::Uplink : Direction::Downlink;
    const Direction rx = tx == Direction::Uplink ? Direction::Downlink : Direction::Uplink;
    state_ = result.state;
    if (result.accepted && rx_raw) {
        if (rx_ciphered) state_.security.advance(rx);
        last_rx_raw_ = *rx_raw;
    }

    Output out;
    std::vector<Message> fresh_msgs;
    std::vector<std::vector<std::uint8_t>> fresh_raw;
    for (const auto& msg : result.out) {
        if (msg.type == MsgType::ConnectionComplete) {
            out.connection_complete = true;
            continue;
        }
        const auto cached = std::find(last_tx_msgs_.begin(), last_tx_msgs_.end(), msg);
        if (cached != last_tx_msgs_.end()) {
            const auto idx = static_cast<std::size_t>(cached - last_tx_msgs_.begin());
            out.frames.push_back(Frame{last_tx_raw_[idx], tx, 0});
            continue;
        }
        Message wire = msg;
        if (hook_) hook_(wire, tx);
        Frame f = encode_message(wire, state_.security, tx);
        if (is_ciphered(wire.type, state_.security)) state_.security.advance(tx);
        fresh_msgs.push_back(msg);
        fresh_raw.push_back(f.raw);
        out.frames.push_back(std::move(f));
    }
    if (!fresh_msgs.empty()) {
        last_tx_msgs_ = std::move(fresh_msgs);
        last_tx_raw_ = std::move(fresh_raw);
    }
    return out;
}

}  // namespace fuzztwin::twin
