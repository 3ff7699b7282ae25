#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace fuzztwin {

/// Derived state identifier: the channel code plus the first three PDU bytes,
/// packed as channel<<24 | b0<<16 | b1<<8 | b2. Needs no decryption.
struct StateId {
    std::uint32_t value = 0;

    std::uint8_t channel_code() const noexcept { return static_cast<std::uint8_t>(value >> 24); }
    std::uint8_t prefix_byte(int i) const noexcept {
        return static_cast<std::uint8_t>(value >> (16 - 8 * i));
    }

    auto operator<=>(const StateId&) const = default;
};

/// Throws Error(MalformedFrame) when fewer than three bytes are available.
StateId derive_state_id(std::span<const std::uint8_t> pdu);

StateId make_state_id(std::uint8_t channel, std::uint8_t b0, std::uint8_t b1, std::uint8_t b2) noexcept;

/// "cc:b0b1b2" in lowercase hex.
std::string to_string(StateId id);
std::optional<StateId> parse_state_id(std::string_view text) noexcept;

/// Message-type name when the prefix decodes as one, otherwise empty.
std::string describe_state(StateId id);

}  // namespace fuzztwin

template <>
struct std::hash<fuzztwin::StateId> {
    std::size_t operator()(const fuzztwin::StateId& id) const noexcept {
        return std::hash<std::uint32_t>{}(id.value);
    }
};
