#include "fuzztwin/twin/handshake.hpp"

#include <queue>
#include <variant>

#include "fuzztwin/common/random.hpp"

namespace fuzztwin::twin {

EndpointParams TwinConfig::ue_params(const VulnerabilityProfile* profile) const {
    EndpointParams p;
    p.rnti = rnti;
    p.ue_identity = ue_identity;
    p.establishment_cause = establishment_cause;
    p.max_retransmissions = max_retransmissions;
    p.profile = profile;
    return p;
}

EndpointParams TwinConfig::gnb_params(const VulnerabilityProfile* profile) const {
    EndpointParams p = ue_params(profile);
    p.srb_id = srb_id;
    p.sr_config_index = sr_config_index;
    return p;
}

void Interceptor::before_encode(Message&, Direction, std::int64_t) {}

relay::ForwardDecision Interceptor::on_frame(const Frame&) { return relay::Pass{}; }

void Interceptor::mark_applied(const FuzzAction& action, std::int64_t time_ns) {
    if (applied_) return;
    applied_ = action;
    applied_time_ns_ = time_ns;
}

const std::vector<MsgType>& canonical_handshake() {
    static const std::vector<MsgType> seq = {
        MsgType::RRCSetupRequest,         MsgType::RRCSetup,
        MsgType::RRCSetupComplete,        MsgType::SecurityModeCommand,
        MsgType::SecurityModeComplete,    MsgType::UECapabilityEnquiry,
        MsgType::UECapabilityInformation, MsgType::RRCReconfiguration,
        MsgType::RRCReconfigurationComplete,
    };
    return seq;
}

namespace {

struct UeStart {};
struct UeTimer {
    std::uint64_t generation;
};
struct AtRelay {
    Frame frame;
};
struct Deliver {
    Frame frame;
};
using Payload = std::variant<UeStart, UeTimer, AtRelay, Deliver>;

struct Event {
    std::int64_t t;
    std::uint64_t seq;
    Payload payload;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
};

class Simulation {
public:
    Simulation(const TwinConfig& cfg, const VulnerabilityProfile& profile, Interceptor& icpt)
        : cfg_(cfg),
          icpt_(icpt),
          rng_(derive_seed(cfg.seed, 0x7417)),
          ue_(Role::Ue, cfg.ue_params(&profile), cfg.session_key),
          gnb_(Role::Gnb, cfg.gnb_params(&profile), cfg.session_key),
          relay_([&icpt](const Frame& f) { return icpt.on_frame(f); }) {
        auto hook = [this](Message& m, Direction d) { icpt_.before_encode(m, d, now_); };
        ue_.set_encode_hook(hook);
        gnb_.set_encode_hook(hook);
    }

    HandshakeResult run() {
        push(0, UeStart{});
        bool complete = false;
        while (!queue_.empty() && !complete && !ue_.failed()) {
            Event ev = queue_.top();
            if (ev.t > cfg_.connection_timeout_ns) break;
            queue_.pop();
            now_ = ev.t;
            complete = dispatch(ev.payload);
        }

        HandshakeResult res;
        auto& tr = res.trace;
        tr.steps = std::move(steps_);
        tr.fuzz_action = icpt_.applied();
        if (tr.fuzz_action) tr.fuzz_time_ns = icpt_.applied_time_ns();
        tr.service_type = gnb_.state().service_type;
        if (complete) {
            tr.outcome = Outcome::Success;
            tr.outcome_time_ns = now_;
        } else {
            tr.outcome = Outcome::Failed;
            tr.outcome_time_ns = ue_.failed() ? now_ : cfg_.connection_timeout_ns;
            if (gnb_.failed()) {
                tr.reason = gnb_.state().failure;
            } else if (ue_.failed()) {
                tr.reason = ue_.state().failure;
            } else {
                tr.reason = FailureReason::Timeout;
            }
        }
        if (!tr.steps.empty()) {
            tr.outcome_time_ns = std::max(tr.outcome_time_ns, tr.steps.back().time_ns);
        }
        if (tr.fuzz_action) tr.outcome_time_ns = std::max(tr.outcome_time_ns, tr.fuzz_time_ns);
        res.relay = relay_.report();
        res.ue = ue_.state();
        res.gnb = gnb_.state();
        return res;
    }

private:
    void push(std::int64_t t, Payload p) { queue_.push(Event{t, seq_++, std::move(p)}); }

    std::int64_t hop() {
        const auto j = cfg_.latency_jitter_ns > 0
                           ? static_cast<std::int64_t>(rng_.below(
                                 static_cast<std::uint64_t>(cfg_.latency_jitter_ns) + 1))
                           : 0;
        return cfg_.link_latency_ns + j;
    }

    void send(const std::vector<Frame>& frames) {
        for (const auto& f : frames) {
            auto& last = f.direction == Direction::Uplink ? last_to_relay_ul_ : last_to_relay_dl_;
            const auto t = std::max(now_ + cfg_.processing_delay_ns + hop(), last + 1);
            last = t;
            push(t, AtRelay{f});
        }
    }

    void arm_timer() {
        ++timer_generation_;
        if (awaiting_response(ue_.state())) {
            push(now_ + cfg_.retransmit_timeout_ns, UeTimer{timer_generation_});
        }
    }

    bool dispatch(Payload& p) {
        if (std::holds_alternative<UeStart>(p)) {
            send(ue_.start().frames);
            arm_timer();
        } else if (auto* timer = std::get_if<UeTimer>(&p)) {
            if (timer->generation != timer_generation_) return false;
            send(ue_.on_timer().frames);
            arm_timer();
        } else if (auto* at = std::get_if<AtRelay>(&p)) {
            Frame in = at->frame;
            stamp_ = std::max(now_, stamp_ + 1);
            in.timestamp_ns = stamp_;
            auto fwd = relay_.process(in);
            if (!fwd) return false;
            steps_.push_back(TraceStep{derive_state_id(fwd->raw), fwd->timestamp_ns, fwd->direction,
                                       fwd->raw});
            auto& last = fwd->direction == Direction::Uplink ? last_to_gnb_ : last_to_ue_;
            const auto t = std::max(now_ + hop(), last + 1);
            last = t;
            push(t, Deliver{*fwd});
        } else {
            const Frame& f = std::get<Deliver>(p).frame;
            if (f.direction == Direction::Uplink) {
                auto out = gnb_.on_frame(f);
                if (out.connection_complete) return true;
                send(out.frames);
            } else {
                const auto before = ue_.state();
                auto out = ue_.on_frame(f);
                send(out.frames);
                if (!(before == ue_.state())) arm_timer();
            }
        }
        return false;
    }

    const TwinConfig& cfg_;
    Interceptor& icpt_;
    Rng rng_;
    Endpoint ue_;
    Endpoint gnb_;
    relay::RelayCore relay_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t timer_generation_ = 0;
    std::int64_t now_ = 0;
    std::int64_t stamp_ = -1;
    std::int64_t last_to_relay_ul_ = 0, last_to_relay_dl_ = 0, last_to_gnb_ = 0, last_to_ue_ = 0;
    std::vector<TraceStep> steps_;
};

}  // namespace

HandshakeResult run_handshake(const TwinConfig& config, const VulnerabilityProfile& profile,
                              Interceptor& interceptor) {
    Simulation sim(config, profile, interceptor);
    return sim.run();
}

}  // namespace fuzztwin::twin
