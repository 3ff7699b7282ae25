#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "fuzztwin/common/trace.hpp"
#include "fuzztwin/twin/codec.hpp"
#include "fuzztwin/twin/message.hpp"
#include "fuzztwin/twin/profile.hpp"
#include "fuzztwin/twin/service_type.hpp"

namespace fuzztwin::twin {

enum class Role : std::uint8_t { Ue, Gnb };

// UE:  Idle -> SetupSent -> SetupComplete -> Secured -> CapabilityPending -> Connected
// gNB: Idle -> SetupSent -> SecurityPending -> CapabilityPending -> ReconfigPending -> Connected
enum class Phase : std::uint8_t {
    Idle,
    SetupSent,
    SetupComplete,
    SecurityPending,
    Secured,
    CapabilityPending,
    ReconfigPending,
    Connected,
    Failed,
};

std::string_view to_string(Role r) noexcept;
std::string_view to_string(Phase p) noexcept;

struct EndpointParams {
    std::uint16_t rnti = 0x4601;
    std::uint8_t ue_identity = 0;
    std::uint8_t establishment_cause = 0b0110;
    std::uint8_t srb_id = 1;
    std::uint8_t sr_config_index = 32;
    int max_retransmissions = 8;
    const VulnerabilityProfile* profile = nullptr;  // null means no seeded flaws
};

struct EndpointState {
    Role role = Role::Ue;
    Phase phase = Phase::Idle;
    SecurityContext security;
    std::uint16_t rnti = 0;
    std::optional<ServiceType> service_type;
    FailureReason failure = FailureReason::None;
    int retransmissions = 0;
    std::uint8_t next_transaction = 0;
    std::optional<Message> last_rx;  // last accepted message
    std::vector<Message> last_tx;    // messages emitted when it was accepted

    bool operator==(const EndpointState&) const = default;
};

struct Start {};
struct TimerExpired {};
struct IncomingFrame {
    DecodeResult decoded;
};
using Event = std::variant<Start, TimerExpired, IncomingFrame>;

struct StepResult {
    EndpointState state;
    std::vector<Message> out;
    bool accepted = false;  // the incoming message advanced the handshake
};

EndpointState initial_state(Role role, std::uint16_t rnti, std::uint64_t session_key);

/// Message type the endpoint waits for in its current phase.
std::optional<MsgType> expected_message(const EndpointState& state) noexcept;

/// True while a UE timer should be armed.
bool awaiting_response(const EndpointState& state) noexcept;

StepResult ue_step(const EndpointState& state, const Event& event, const EndpointParams& params);
StepResult gnb_step(const EndpointState& state, const Event& event, const EndpointParams& params);

/// Stateful wrapper around the step functions: owns the cipher counters,
/// caches the last transmitted bytes for retransmission and recognises
/// byte-identical duplicates before decryption.
class Endpoint {
public:
    struct Output {
        std::vector<Frame> frames;
        bool connection_complete = false;
    };
    using EncodeHook = std::function<void(Message&, Direction)>;

    Endpoint(Role role, EndpointParams params, std::uint64_t session_key);

    Output start();
    Output on_timer();
    Output on_frame(const Frame& frame);

    const EndpointState& state() const noexcept { return state_; }
    Role role() const noexcept { return state_.role; }
    bool failed() const noexcept { return state_.phase == Phase::Failed; }

    /// Called on every freshly built outgoing message before encoding.
    void set_encode_hook(EncodeHook hook) { hook_ = std::move(hook); }

private:
    Output apply(const StepResult& result, const std::vector<std::uint8_t>* rx_raw,
                 bool rx_ciphered);

    EndpointParams params_;
    EndpointState state_;
    EncodeHook hook_;
    std::vector<std::uint8_t> last_rx_raw_;
    std::vector<Message> last_tx_msgs_;
    std::vector<std::vector<std::uint8_t>> last_tx_raw_;
};

}  // namespace fuzztwin::twin
