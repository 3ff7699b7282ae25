#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/twin/message.hpp"

namespace fuzztwin::twin {

/// PDU layout: [0] msg_type, [1] channel, [2..3] rnti (BE), [4] transaction_id,
/// [5..n-3] body, [n-2..n-1] checksum (BE).
inline constexpr std::size_t kHeaderLength = 5;
inline constexpr std::size_t kChecksumLength = 2;
inline constexpr std::size_t kMinFrameLength = kHeaderLength + kChecksumLength;

struct Frame {
    std::vector<std::uint8_t> raw;  // PDU, without the stream length prefix
    Direction direction = Direction::Uplink;
    std::int64_t timestamp_ns = 0;

    bool operator==(const Frame&) const = default;
};

struct SecurityContext {
    std::uint64_t session_key = 0;
    bool activated = false;
    std::uint32_t ul_counter = 0;
    std::uint32_t dl_counter = 0;

    std::uint32_t counter(Direction d) const noexcept {
        return d == Direction::Uplink ? ul_counter : dl_counter;
    }
    void advance(Direction d);

    bool operator==(const SecurityContext&) const = default;
};

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final XOR.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) noexcept;

/// CRC-16/CCITT-FALSE of `body`, XOR-masked with the RNTI.
std::uint16_t compute_checksum(std::span<const std::uint8_t> body, std::uint16_t rnti) noexcept;

/// True when the body of `type` is ciphered under `ctx`. Messages of the
/// setup and security-mode exchange always travel in the clear.
bool is_ciphered(MsgType type, const SecurityContext& ctx) noexcept;

/// XORs `bytes` with the keystream for (session_key, direction, counter).
void apply_keystream(std::span<std::uint8_t> bytes, std::uint64_t session_key, Direction direction,
                     std::uint32_t counter) noexcept;

/// Throws Error(FieldOutOfRange) for values beyond their declared width and
/// Error(UnknownField) for identifiers the message type does not carry.
Frame encode_message(const Message& msg, const SecurityContext& ctx, Direction direction);

struct DecodeResult {
    std::optional<Message> message;
    std::optional<ErrorKind> error;  // IntegrityError or MalformedFrame
    std::string detail;

    bool ok() const noexcept { return message.has_value(); }
};

/// Verifies the trailing checksum against `rnti` before anything else.
DecodeResult decode_message(const Frame& frame, const SecurityContext& ctx, std::uint16_t rnti);

/// Recomputes the trailing checksum of `raw` in place.
void reseal(std::vector<std::uint8_t>& raw, std::uint16_t rnti);

// Stream framing: 2-byte big-endian length, then the PDU.
std::vector<std::uint8_t> length_prefixed(std::span<const std::uint8_t> pdu);

class StreamReassembler {
public:
    void feed(std::span<const std::uint8_t> bytes);
    std::optional<std::vector<std::uint8_t>> next();
    std::size_t buffered() const noexcept { return buffer_.size() - consumed_; }

private:
    std::vector<std::uint8_t> buffer_;
    std::size_t consumed_ = 0;
};

}  // namespace fuzztwin::twin
