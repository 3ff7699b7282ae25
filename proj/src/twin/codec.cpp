#include "fuzztwin/twin/codec.hpp"

#include <limits>

#include "fuzztwin/common/random.hpp"

namespace fuzztwin::twin {

void SecurityContext::advance(Direction d) {
    std::uint32_t& c = d == Direction::Uplink ? ul_counter : dl_counter;
    if (c == std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorKind::InvalidArgument, "security counter exhausted");
    }
    ++c;
}

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) noexcept {
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t byte : data) {
        crc ^= static_cast<std::uint16_t>(byte) << 8;
        for (int bit = 0; bit < 8; ++bit) {
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                 : static_cast<std::uint16_t>(crc << 1);
        }
    }
    return crc;
}

std::uint16_t compute_checksum(std::span<const std::uint8_t> body, std::uint16_t rnti) noexcept {
    return static_cast<std::uint16_t>(crc16_ccitt_false(body) ^ rnti);
}

bool is_ciphered(MsgType type, const SecurityContext& ctx) noexcept {
    if (!ctx.activated) return false;
    switch (type) {
        case MsgType::UECapabilityEnquiry:
        case MsgType::UECapabilityInformation:
        case MsgType::RRCReconfiguration:
        case MsgType::RRCReconfigurationComplete:
        case MsgType::ULInformationTransfer:
        case MsgType::ConnectionComplete: return true;
        default: return false;
    }
}

void apply_keystream(std::span<std::uint8_t> bytes, std::uint64_t session_key, Direction direction,
                     std::uint32_t counter) noexcept {
    const std::uint64_t stream =
        (static_cast<std::uint64_t>(direction == Direction::Uplink ? 0 : 1) << 32) | counter;
    const std::uint64_t base = derive_seed(session_key, stream);
    std::uint64_t block = 0;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (i % 8 == 0) block = splitmix64(base + 0x9E3779B97F4A7C15ULL * (i / 8));
        bytes[i] ^= static_cast<std::uint8_t>(block >> (8 * (i % 8)));
    }
}

Frame encode_message(const Message& msg, const SecurityContext& ctx, Direction direction) {
    if (msg.direction() != direction) {
        throw Error(ErrorKind::InvalidArgument,
                    std::string(to_string(msg.type)) + " cannot travel " +
                        std::string(to_string(direction)));
    }
    for (const auto& [name, value] : msg.fields) {
        if (find_field(msg.type, name) == nullptr) {
            throw Error(ErrorKind::UnknownField,
                        name + " is not a field of " + std::string(to_string(msg.type)));
        }
    }

    std::vector<std::uint8_t> raw;
    raw.reserve(kMinFrameLength + body_length(msg.type));
    raw.push_back(static_cast<std::uint8_t>(msg.type));
    raw.push_back(static_cast<std::uint8_t>(msg.channel()));
    raw.push_back(static_cast<std::uint8_t>(msg.rnti >> 8));
    raw.push_back(static_cast<std::uint8_t>(msg.rnti & 0xFF));
    raw.push_back(msg.transaction_id);
    raw.resize(kHeaderLength + body_length(msg.type), 0);

    for (const auto& layout : field_layouts(msg.type)) {
        auto it = msg.fields.find(layout.name);
        const std::uint32_t value = it == msg.fields.end() ? 0 : it->second;
        if (value > layout.max_value) {
            throw Error(ErrorKind::FieldOutOfRange, std::string(layout.name) + "=" +
                                                        std::to_string(value) + " exceeds " +
                                                        std::to_string(layout.max_value));
        }
        raw[kHeaderLength + layout.byte] |= static_cast<std::uint8_t>(value << layout.shift);
    }

    if (is_ciphered(msg.type, ctx)) {
        if (ctx.counter(direction) == std::numeric_limits<std::uint32_t>::max()) {
            throw Error(ErrorKind::InvalidArgument, "security counter exhausted");
        }
        apply_keystream(std::span(raw).subspan(kHeaderLength), ctx.session_key, direction,
                        ctx.counter(direction));
    }

    const std::uint16_t checksum = compute_checksum(raw, msg.rnti);
    raw.push_back(static_cast<std::uint8_t>(checksum >> 8));
    raw.push_back(static_cast<std::uint8_t>(checksum & 0xFF));
    return Frame{std::move(raw), direction, 0};
}

DecodeResult decode_message(const Frame& frame, const SecurityContext& ctx, std::uint16_t rnti) {
    DecodeResult result;
    const auto& raw = frame.raw;
    if (raw.size() < kMinFrameLength) {
        result.error = ErrorKind::MalformedFrame;
        result.detail = "truncated frame of " + std::to_string(raw.size()) + " bytes";
        return result;
    }
    const std::size_t prefix_len = raw.size() - kChecksumLength;
    const std::uint16_t carried =
        static_cast<std::uint16_t>((raw[prefix_len] << 8) | raw[prefix_len + 1]);
    if (carried != compute_checksum(std::span(raw).first(prefix_len), rnti)) {
        result.error = ErrorKind::IntegrityError;
        result.detail = "checksum mismatch";
        return result;
    }

    auto type = msg_type_from_code(raw[0]);
    auto channel = channel_from_code(raw[1]);
    if (!type || !channel || channel_of(*type) != *channel) {
        result.error = ErrorKind::MalformedFrame;
        result.detail = "unknown message type or channel";
        return result;
    }
    if (prefix_len - kHeaderLength != body_length(*type)) {
        result.error = ErrorKind::MalformedFrame;
        result.detail = "body length mismatch";
        return result;
    }

    std::vector<std::uint8_t> body(raw.begin() + kHeaderLength, raw.begin() + prefix_len);
    const Direction direction = direction_of(*channel);
    if (is_ciphered(*type, ctx)) {
        apply_keystream(body, ctx.session_key, direction, ctx.counter(direction));
    }

    Message msg;
    msg.type = *type;
    msg.rnti = static_cast<std::uint16_t>((raw[2] << 8) | raw[3]);
    msg.transaction_id = raw[4];
    std::vector<std::uint8_t> used(body.size(), 0);
    for (const auto& layout : field_layouts(*type)) {
        const std::uint32_t mask = (1u << layout.width) - 1u;
        const std::uint32_t value = (body[layout.byte] >> layout.shift) & mask;
        used[layout.byte] |= static_cast<std::uint8_t>(mask << layout.shift);
        if (value > layout.max_value) {
            result.error = ErrorKind::MalformedFrame;
            result.detail = std::string(layout.name) + " out of range";
            return result;
        }
        msg.fields.emplace(std::string(layout.name), value);
    }
    for (std::size_t i = 0; i < body.size(); ++i) {
        if ((body[i] & ~used[i]) != 0) {
            result.error = ErrorKind::MalformedFrame;
            result.detail = "reserved bits set";
            return result;
        }
    }
    result.message = std::move(msg);
    return result;
}

void reseal(std::vector<std::uint8_t>& raw, std::uint16_t rnti) {
    if (raw.size() < kMinFrameLength) {
        throw Error(ErrorKind::MalformedFrame, "cannot reseal a truncated frame");
    }
    const std::size_t prefix_len = raw.size() - kChecksumLength;
    const std::uint16_t checksum = compute_checksum(std::span(raw).first(prefix_len), rnti);
    raw[prefix_len] = static_cast<std::uint8_t>(checksum >> 8);
    raw[prefix_len + 1] = static_cast<std::uint8_t>(checksum & 0xFF);
}

std::vector<std::uint8_t> length_prefixed(std::span<const std::uint8_t> pdu) {
    if (pdu.size() > 0xFFFF) throw Error(ErrorKind::InvalidArgument, "PDU exceeds 65535 bytes");
    std::vector<std::uint8_t> out;
    out.reserve(pdu.size() + 2);
    out.push_back(static_cast<std::uint8_t>(pdu.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(pdu.size() & 0xFF));
    out.insert(out.end(), pdu.begin(), pdu.end());
    return out;
}

void StreamReassembler::feed(std::span<const std::uint8_t> bytes) {
    if (consumed_ > 0 && consumed_ == buffer_.size()) {
        buffer_.clear();
        consumed_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<std::vector<std::uint8_t>> StreamReassembler::next() {
    if (buffered() < 2) return std::nullopt;
    const std::size_t len =
        (static_cast<std::size_t>(buffer_[consumed_]) << 8) | buffer_[consumed_ + 1];
    if (buffered() < 2 + len) return std::nullopt;
    std::vector<std::uint8_t> pdu(buffer_.begin() + consumed_ + 2,
                                  buffer_.begin() + consumed_ + 2 + len);
    consumed_ += 2 + len;
    return pdu;
}

}  // namespace fuzztwin::twin
