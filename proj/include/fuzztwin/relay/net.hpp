#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fuzztwin::relay {

/// Owning TCP socket descriptor.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) noexcept : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    /// Half-close: the peer reads end-of-stream after pending bytes.
    void shutdown_write() noexcept;
    void close() noexcept;

private:
    int fd_ = -1;
};

/// Throws Error(PortBindFailure).
Socket listen_tcp(const std::string& host, std::uint16_t port);
std::uint16_t local_port(const Socket& s);

/// Throws Error(PeerDisconnected) when nobody connects in time.
Socket accept_tcp(const Socket& listener, std::chrono::milliseconds timeout);

/// Retries until the deadline. Throws Error(PeerDisconnected).
Socket connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout);

/// Writes one length-prefixed PDU. Throws Error(PeerDisconnected).
void send_frame(const Socket& s, std::span<const std::uint8_t> pdu);

enum class RecvStatus : std::uint8_t { Frame, Closed, Timeout };

/// Reads one length-prefixed PDU. End of stream on a frame boundary is
/// Closed; inside a frame it throws Error(PeerDisconnected).
RecvStatus recv_frame(const Socket& s, std::vector<std::uint8_t>& pdu, std::chrono::milliseconds timeout);

/// Asks the kernel for an unused loopback port.
std::uint16_t ephemeral_port();

}  // namespace fuzztwin::relay
