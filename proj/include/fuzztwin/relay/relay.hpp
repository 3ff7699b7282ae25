#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fuzztwin/twin/codec.hpp"

namespace fuzztwin::relay {

struct Pass {
    bool operator==(const Pass&) const = default;
};
struct Drop {
    bool operator==(const Drop&) const = default;
};
struct ReplaceFrame {
    twin::Frame frame;
    bool operator==(const ReplaceFrame&) const = default;
};
struct BitMask {
    std::size_t offset = 0;  // byte offset within the PDU
    std::uint8_t mask = 0;
    bool operator==(const BitMask&) const = default;
};
struct MutateBits {
    std::vector<BitMask> masks;
    bool operator==(const MutateBits&) const = default;
};

using ForwardDecision = std::variant<Pass, ReplaceFrame, MutateBits, Drop>;

std::string describe(const ForwardDecision& decision);

/// Applies a decision to one frame. MutateBits XORs in place and leaves the
/// checksum untouched. Returns nothing for Drop.
/// Throws Error(OffsetOutOfRange) for masks past the frame end and
/// Error(InvalidArgument) when a replacement changes direction.
std::optional<twin::Frame> apply_mutation(const twin::Frame& frame, const ForwardDecision& decision);

struct RelayRecord {
    twin::Frame original;
    ForwardDecision decision;
    std::optional<twin::Frame> forwarded;
};

struct RelayReport {
    std::vector<RelayRecord> records;
    std::size_t uplink_forwarded = 0;
    std::size_t downlink_forwarded = 0;
    std::size_t dropped = 0;
    std::size_t rewritten = 0;
};

using FrameInterceptor = std::function<ForwardDecision(const twin::Frame&)>;
using RecordSink = std::function<void(const RelayRecord&)>;

/// Transport-independent relay logic shared by the in-process driver and
/// the socket relay. Both pumps may call process() concurrently; the
/// interceptor and the sink are invoked under one lock.
class RelayCore {
public:
    explicit RelayCore(FrameInterceptor interceptor, RecordSink sink = {});

    std::optional<twin::Frame> process(const twin::Frame& frame);

    RelayReport report() const;

private:
    FrameInterceptor interceptor_;
    RecordSink sink_;
    mutable std::mutex mu_;
    RelayReport report_;
};

struct RelayConfig {
    std::string host = "127.0.0.1";
    std::uint16_t ue_listen_port = 2003;
    std::uint16_t gnb_forward_port = 2000;
    std::uint16_t gnb_listen_port = 2002;
    std::uint16_t ue_forward_port = 2001;

    /// Throws Error(InvalidArgument) when non-zero ports collide.
    void validate() const;
};

}  // namespace fuzztwin::relay
