#include "fuzztwin/relay/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/twin/codec.hpp"

namespace fuzztwin::relay {

namespace {

using Clock = std::chrono::steady_clock;

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &a.sin_addr) != 1) {
        throw Error(ErrorKind::InvalidArgument, "not an IPv4 address: " + host);
    }
    return a;
}

// 1 ready, 0 timeout.
int wait_readable(int fd, std::chrono::milliseconds timeout) {
    pollfd p{fd, POLLIN, 0};
    for (;;) {
        const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (r >= 0) return r;
        if (errno != EINTR) throw Error(ErrorKind::PeerDisconnected, std::string("poll: ") + std::strerror(errno));
    }
}

// Returns bytes read before end of stream.
std::size_t read_exact(int fd, std::uint8_t* out, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        const auto r = ::recv(fd, out + got, n - got, 0);
        if (r == 0) return got;
        if (r < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorKind::PeerDisconnected, std::string("recv: ") + std::strerror(errno));
        }
        got += static_cast<std::size_t>(r);
    }
    return got;
}

}  // namespace

Socket& Socket::operator=(Socket&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
}

Socket::~Socket() { close(); }

void Socket::shutdown_write() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

void Socket::close() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

Socket listen_tcp(const std::string& host, std::uint16_t port) {
    Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s.valid()) throw Error(ErrorKind::PortBindFailure, std::string("socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    const auto addr = make_addr(host, port);
    if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 || ::listen(s.fd(), 4) != 0) {
        throw Error(ErrorKind::PortBindFailure,
                    "cannot listen on " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
    }
    return s;
}

std::uint16_t local_port(const Socket& s) {
    sockaddr_in a{};
    socklen_t len = sizeof a;
    if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&a), &len) != 0) {
        throw Error(ErrorKind::Io, std::string("getsockname: ") + std::strerror(errno));
    }
    return ntohs(a.sin_port);
}

Socket accept_tcp(const Socket& listener, std::chrono::milliseconds timeout) {
    if (wait_readable(listener.fd(), timeout) == 0) {
        throw Error(ErrorKind::PeerDisconnected, "no peer connected within " + std::to_string(timeout.count()) + " ms");
    }
    Socket s(::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC));
    if (!s.valid()) throw Error(ErrorKind::PeerDisconnected, std::string("accept: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return s;
}

Socket connect_tcp(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
    const auto addr = make_addr(host, port);
    const auto deadline = Clock::now() + timeout;
    for (;;) {
        Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
        if (!s.valid()) throw Error(ErrorKind::PeerDisconnected, std::string("socket: ") + std::strerror(errno));
        if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
            const int one = 1;
            ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return s;
        }
        if (Clock::now() >= deadline) {
            throw Error(ErrorKind::PeerDisconnected,
                        "cannot reach " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
}

void send_frame(const Socket& s, std::span<const std::uint8_t> pdu) {
    const auto bytes = twin::length_prefixed(pdu);
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        const auto r = ::send(s.fd(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorKind::PeerDisconnected, std::string("send: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(r);
    }
}

RecvStatus recv_frame(const Socket& s, std::vector<std::uint8_t>& pdu, std::chrono::milliseconds timeout) {
    if (wait_readable(s.fd(), timeout) == 0) return RecvStatus::Timeout;
    std::uint8_t hdr[2];
    const auto h = read_exact(s.fd(), hdr, 2);
    if (h == 0) return RecvStatus::Closed;
    if (h < 2) throw Error(ErrorKind::PeerDisconnected, "stream ended inside a length prefix");
    const std::size_t n = (std::size_t{hdr[0]} << 8) | hdr[1];
    pdu.resize(n);
    if (read_exact(s.fd(), pdu.data(), n) < n) throw Error(ErrorKind::PeerDisconnected, "stream ended inside a frame");
    return RecvStatus::Frame;
}

std::uint16_t ephemeral_port() {
    const Socket s = listen_tcp("127.0.0.1", 0);
    return local_port(s);
}

}  // namespace fuzztwin::relay
