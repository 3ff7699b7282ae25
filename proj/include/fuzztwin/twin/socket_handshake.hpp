#pragma once

#include <chrono>

#include "fuzztwin/relay/relay.hpp"
#include "fuzztwin/twin/handshake.hpp"

namespace fuzztwin::twin {

/// The same attempt as run_handshake, over loopback TCP with real timers:
/// the UE, the relay and the gNB each run on their own thread and talk
/// through the four configured ports. Step times are nanoseconds since the
/// attempt started, as stamped by the relay.
/// Throws Error(PortBindFailure) or Error(PeerDisconnected).
HandshakeResult run_socket_handshake(const TwinConfig& config, const VulnerabilityProfile& profile,
                                     Interceptor& interceptor, const relay::RelayConfig& ports,
                                     std::chrono::milliseconds connect_timeout = std::chrono::milliseconds(5000));

/// Four distinct free loopback ports.
relay::RelayConfig ephemeral_relay_config();

}  // namespace fuzztwin::twin
