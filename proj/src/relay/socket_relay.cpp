#include "fuzztwin/relay/socket_relay.hpp"

#include <exception>
#include <mutex>
#include <thread>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/relay/net.hpp"

namespace fuzztwin::relay {

RelayReport run_relay(const RelayConfig& config, FrameInterceptor interceptor, RecordSink sink,
                      const SocketRelayOptions& options) {
    config.validate();
    Socket ue_listener = listen_tcp(config.host, config.ue_listen_port);
    Socket gnb_listener = listen_tcp(config.host, config.gnb_listen_port);
    if (options.on_listening) options.on_listening();

    Socket to_gnb = connect_tcp(config.host, config.gnb_forward_port, options.connect_timeout);
    Socket to_ue = connect_tcp(config.host, config.ue_forward_port, options.connect_timeout);
    Socket from_ue = accept_tcp(ue_listener, options.connect_timeout);
    Socket from_gnb = accept_tcp(gnb_listener, options.connect_timeout);

    RelayCore core(std::move(interceptor), std::move(sink));
    std::mutex clock_mu;
    std::int64_t last_stamp = -1;
    std::atomic<bool> abort{false};
    std::exception_ptr errors[2];

    auto pump = [&](int slot, const Socket& in, Socket& out, Direction dir) {
        try {
            std::vector<std::uint8_t> pdu;
            for (;;) {
                if (abort.load() || (options.stop && options.stop->load())) break;
                const auto st = recv_frame(in, pdu, std::chrono::milliseconds(50));
                if (st == RecvStatus::Timeout) continue;
                if (st == RecvStatus::Closed) break;
                std::optional<twin::Frame> fwd;
                {
                    // Stamp and record under one lock so the record order
                    // matches the timestamps across both pumps.
                    std::lock_guard lock(clock_mu);
                    const auto now = std::chrono::duration_cast<std::chrono::nanoseconds>(
                                         std::chrono::steady_clock::now() - options.origin)
                                         .count();
                    last_stamp = std::max<std::int64_t>(now, last_stamp + 1);
                    fwd = core.process(twin::Frame{pdu, dir, last_stamp});
                }
                if (fwd) send_frame(out, fwd->raw);
            }
        } catch (...) {
            errors[slot] = std::current_exception();
            abort = true;
        }
        out.shutdown_write();
    };

    std::thread uplink(pump, 0, std::cref(from_ue), std::ref(to_gnb), Direction::Uplink);
    pump(1, from_gnb, to_ue, Direction::Downlink);
    uplink.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return core.report();
}

}  // namespace fuzztwin::relay
