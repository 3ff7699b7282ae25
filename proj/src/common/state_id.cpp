#include "fuzztwin/common/state_id.hpp"

#include <charconv>
#include <cstdio>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/twin/message.hpp"

namespace fuzztwin {

StateId derive_state_id(std::span<const std::uint8_t> pdu) {
    if (pdu.size() < 3) {
        throw Error(ErrorKind::MalformedFrame,
                    "state id needs 3 bytes, frame has " + std::to_string(pdu.size()));
    }
    return make_state_id(pdu[1], pdu[0], pdu[1], pdu[2]);
}

StateId make_state_id(std::uint8_t channel, std::uint8_t b0, std::uint8_t b1, std::uint8_t b2) noexcept {
    return StateId{(static_cast<std::uint32_t>(channel) << 24) |
                   (static_cast<std::uint32_t>(b0) << 16) | (static_cast<std::uint32_t>(b1) << 8) |
                   b2};
}

std::string to_string(StateId id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02x:%06x", id.channel_code(), id.value & 0xFFFFFFu);
    return buf;
}

std::optional<StateId> parse_state_id(std::string_view text) noexcept {
    if (text.size() != 9 || text[2] != ':') return std::nullopt;
    std::uint32_t channel = 0;
    std::uint32_t rest = 0;
    auto r1 = std::from_chars(text.data(), text.data() + 2, channel, 16);
    auto r2 = std::from_chars(text.data() + 3, text.data() + 9, rest, 16);
    if (r1.ec != std::errc{} || r1.ptr != text.data() + 2) return std::nullopt;
    if (r2.ec != std::errc{} || r2.ptr != text.data() + 9) return std::nullopt;
    return StateId{(channel << 24) | rest};
}

std::string describe_state(StateId id) {
    auto type = twin::msg_type_from_code(id.prefix_byte(0));
    if (!type) return {};
    return std::string(twin::to_string(*type));
}

}  // namespace fuzztwin
