#pragma once

#include <cstdint>
#include <optional>

#include "fuzztwin/common/trace.hpp"
#include "fuzztwin/relay/relay.hpp"
#include "fuzztwin/twin/endpoint.hpp"

namespace fuzztwin::twin {

struct TwinConfig {
    std::uint16_t rnti = 0x4601;
    std::uint64_t session_key = 0x5EC0DE5EC0DEULL;
    std::uint8_t ue_identity = 0;
    std::uint8_t establishment_cause = 0b0110;
    std::uint8_t srb_id = 1;
    std::uint8_t sr_config_index = 32;
    int max_retransmissions = 8;
    std::int64_t retransmit_timeout_ns = 250'000'000;
    std::int64_t connection_timeout_ns = 2'000'000'000;
    std::int64_t link_latency_ns = 4'000'000;
    std::int64_t latency_jitter_ns = 2'000'000;
    std::int64_t processing_delay_ns = 1'000'000;
    std::uint64_t seed = 1;

    EndpointParams ue_params(const VulnerabilityProfile* profile) const;
    EndpointParams gnb_params(const VulnerabilityProfile* profile) const;
};

/// Hook points a fuzz strategy can use on one connection attempt. The
/// default implementation is the identity.
class Interceptor {
public:
    virtual ~Interceptor() = default;

    /// Called with every freshly built message before it is encoded (and
    /// ciphered) by its sender.
    virtual void before_encode(Message& msg, Direction direction, std::int64_t now_ns);

    /// Called by the relay for every frame in transit.
    virtual relay::ForwardDecision on_frame(const Frame& frame);

    const std::optional<FuzzAction>& applied() const noexcept { return applied_; }
    std::int64_t applied_time_ns() const noexcept { return applied_time_ns_; }

protected:
    /// First call wins; later calls are ignored.
    void mark_applied(const FuzzAction& action, std::int64_t time_ns);

private:
    std::optional<FuzzAction> applied_;
    std::int64_t applied_time_ns_ = 0;
};

struct HandshakeResult {
    ConnectionTrace trace;
    relay::RelayReport relay;
    EndpointState ue;
    EndpointState gnb;
};

/// Runs one UE/relay/gNB connection attempt in virtual time. The outcome is
/// Success iff the gNB completes before the connection timeout; the attempt
/// otherwise ends when the UE gives up or the timeout fires.
HandshakeResult run_handshake(const TwinConfig& config, const VulnerabilityProfile& profile,
                              Interceptor& interceptor);

/// The nine message types of an unfuzzed handshake, in order.
const std::vector<MsgType>& canonical_handshake();

}  // namespace fuzztwin::twin
