#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace fuzztwin {

enum class Direction : std::uint8_t { Uplink = 0, Downlink = 1 };

std::string_view to_string(Direction d) noexcept;

namespace twin {

// Wire codes are part of the PDU format (byte 0).
enum class MsgType : std::uint8_t {
    RRCSetupRequest = 0x01,
    RRCSetup = 0x02,
    RRCSetupComplete = 0x03,
    SecurityModeCommand = 0x04,
    SecurityModeComplete = 0x05,
    UECapabilityEnquiry = 0x06,
    UECapabilityInformation = 0x07,
    RRCReconfiguration = 0x08,
    RRCReconfigurationComplete = 0x09,
    ULInformationTransfer = 0x0A,
    Paging = 0x0B,
    RRCReject = 0x0C,
    ConnectionComplete = 0x0D,
};

// Wire codes for byte 1.
enum class Channel : std::uint8_t {
    CCCH_UL = 0x01,
    CCCH_DL = 0x02,
    DCCH_UL = 0x03,
    DCCH_DL = 0x04,
    PDCCH = 0x05,
    PCCH = 0x06,
};

enum class PhysicalChannel : std::uint8_t { PUSCH = 0, PDSCH = 1, PDCCH = 2 };

inline constexpr MsgType kAllMsgTypes[] = {
    MsgType::RRCSetupRequest,         MsgType::RRCSetup,
    MsgType::RRCSetupComplete,        MsgType::SecurityModeCommand,
    MsgType::SecurityModeComplete,    MsgType::UECapabilityEnquiry,
    MsgType::UECapabilityInformation, MsgType::RRCReconfiguration,
    MsgType::RRCReconfigurationComplete, MsgType::ULInformationTransfer,
    MsgType::Paging,                  MsgType::RRCReject,
    MsgType::ConnectionComplete,
};

Channel channel_of(MsgType type) noexcept;
Direction direction_of(Channel channel) noexcept;
PhysicalChannel physical_channel_of(Channel channel) noexcept;

std::optional<MsgType> msg_type_from_code(std::uint8_t code) noexcept;
std::optional<Channel> channel_from_code(std::uint8_t code) noexcept;

std::string_view to_string(MsgType type) noexcept;
std::string_view to_string(Channel channel) noexcept;
std::string_view to_string(PhysicalChannel channel) noexcept;
std::optional<MsgType> msg_type_from_string(std::string_view name) noexcept;

/// Position of one identifier inside a message body.
struct FieldLayout {
    std::string_view name;
    MsgType type;
    std::uint8_t byte;   // offset within the body (PDU offset 5 + byte)
    std::uint8_t shift;  // bit position of the field's LSB within that byte
    std::uint8_t width;  // bits
    std::uint32_t max_value;
};

std::span<const FieldLayout> field_layouts() noexcept;
std::span<const FieldLayout> field_layouts(MsgType type) noexcept;
const FieldLayout* find_field(MsgType type, std::string_view name) noexcept;
std::size_t body_length(MsgType type) noexcept;

struct Message {
    MsgType type = MsgType::RRCSetupRequest;
    std::uint16_t rnti = 0;
    std::uint8_t transaction_id = 0;
    std::map<std::string, std::uint32_t, std::less<>> fields;

    Channel channel() const noexcept { return channel_of(type); }
    Direction direction() const noexcept { return direction_of(channel()); }
    std::uint32_t field(std::string_view name) const;

    bool operator==(const Message&) const = default;
};

/// Message of the given type with every declared field present and zero.
Message make_message(MsgType type, std::uint16_t rnti, std::uint8_t transaction_id = 0);

std::string describe(const Message& msg);

}  // namespace twin
}  // namespace fuzztwin
