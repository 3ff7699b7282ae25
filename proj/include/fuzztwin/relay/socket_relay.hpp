#pragma once

#include <atomic>
#include <chrono>
#include <functional>

#include "fuzztwin/relay/relay.hpp"

namespace fuzztwin::relay {

struct SocketRelayOptions {
    std::chrono::milliseconds connect_timeout{5000};
    /// Frame timestamps are nanoseconds since this point.
    std::chrono::steady_clock::time_point origin = std::chrono::steady_clock::now();
    /// Checked between frames; set to abandon both pumps.
    const std::atomic<bool>* stop = nullptr;
    /// Called once both listening sockets are bound.
    std::function<void()> on_listening;
};

/// Listens for the UE on ue_listen_port and the gNB on gnb_listen_port,
/// connects out to gnb_forward_port and ue_forward_port, and pumps frames
/// both ways through a RelayCore until both inbound legs close. A closed
/// inbound leg is propagated by half-closing the matching outbound leg.
/// Throws Error(PortBindFailure) or Error(PeerDisconnected).
RelayReport run_relay(const RelayConfig& config, FrameInterceptor interceptor, RecordSink sink = {},
                      const SocketRelayOptions& options = {});

}  // namespace fuzztwin::relay
