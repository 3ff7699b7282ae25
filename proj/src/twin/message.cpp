#include "fuzztwin/twin/message.hpp"

#include <array>
#include <sstream>

#include "fuzztwin/common/error.hpp"

namespace fuzztwin {

std::string_view to_string(Direction d) noexcept {
    return d == Direction::Uplink ? "uplink" : "downlink";
}

namespace twin {

namespace {

constexpr std::array<FieldLayout, 5> kLayouts{{
    {"ue_identity", MsgType::RRCSetupRequest, 0, 0, 8, 255},
    {"establishment_cause", MsgType::RRCSetupRequest, 1, 1, 4, 15},
    {"spare", MsgType::RRCSetupRequest, 1, 0, 1, 1},
    {"srb_id", MsgType::RRCSetup, 0, 0, 8, 255},
    {"sr_config_index", MsgType::RRCReconfiguration, 0, 0, 8, 157},
}};

}  // namespace

Channel channel_of(MsgType type) noexcept {
    switch (type) {
        case MsgType::RRCSetupRequest: return Channel::CCCH_UL;
        case MsgType::RRCSetup: return Channel::CCCH_DL;
        case MsgType::RRCSetupComplete: return Channel::DCCH_UL;
        case MsgType::SecurityModeCommand: return Channel::DCCH_DL;
        case MsgType::SecurityModeComplete: return Channel::DCCH_UL;
        case MsgType::UECapabilityEnquiry: return Channel::DCCH_DL;
        case MsgType::UECapabilityInformation: return Channel::DCCH_UL;
        case MsgType::RRCReconfiguration: return Channel::PDCCH;
        case MsgType::RRCReconfigurationComplete: return Channel::DCCH_UL;
        case MsgType::ULInformationTransfer: return Channel::DCCH_UL;
        case MsgType::Paging: return Channel::PCCH;
        case MsgType::RRCReject: return Channel::CCCH_DL;
        case MsgType::ConnectionComplete: return Channel::DCCH_DL;
    }
    return Channel::DCCH_DL;
}

Direction direction_of(Channel channel) noexcept {
    return (channel == Channel::CCCH_UL || channel == Channel::DCCH_UL) ? Direction::Uplink
                                                                        : Direction::Downlink;
}

PhysicalChannel physical_channel_of(Channel channel) noexcept {
    switch (channel) {
        case Channel::CCCH_UL:
        case Channel::DCCH_UL: return PhysicalChannel::PUSCH;
        case Channel::PDCCH: return PhysicalChannel::PDCCH;
        default: return PhysicalChannel::PDSCH;
    }
}

std::optional<MsgType> msg_type_from_code(std::uint8_t code) noexcept {
    if (code >= 0x01 && code <= 0x0D) return static_cast<MsgType>(code);
    return std::nullopt;
}

std::optional<Channel> channel_from_code(std::uint8_t code) noexcept {
    if (code >= 0x01 && code <= 0x06) return static_cast<Channel>(code);
    return std::nullopt;
}

std::string_view to_string(MsgType type) noexcept {
    switch (type) {
        case MsgType::RRCSetupRequest: return "RRCSetupRequest";
        case MsgType::RRCSetup: return "RRCSetup";
        case MsgType::RRCSetupComplete: return "RRCSetupComplete";
        case MsgType::SecurityModeCommand: return "SecurityModeCommand";
        case MsgType::SecurityModeComplete: return "SecurityModeComplete";
        case MsgType::UECapabilityEnquiry: return "UECapabilityEnquiry";
        case MsgType::UECapabilityInformation: return "UECapabilityInformation";
        case MsgType::RRCReconfiguration: return "RRCReconfiguration";
        case MsgType::RRCReconfigurationComplete: return "RRCReconfigurationComplete";
        case MsgType::ULInformationTransfer: return "ULInformationTransfer";
        case MsgType::Paging: return "Paging";
        case MsgType::RRCReject: return "RRCReject";
        case MsgType::ConnectionComplete: return "ConnectionComplete";
    }
    return "Unknown";
}

std::string_view to_string(Channel channel) noexcept {
    switch (channel) {
        case Channel::CCCH_UL: return "CCCH_UL";
        case Channel::CCCH_DL: return "CCCH_DL";
        case Channel::DCCH_UL: return "DCCH_UL";
        case Channel::DCCH_DL: return "DCCH_DL";
        case Channel::PDCCH: return "PDCCH";
        case Channel::PCCH: return "PCCH";
    }
    return "Unknown";
}

std::string_view to_string(PhysicalChannel channel) noexcept {
    switch (channel) {
        case PhysicalChannel::PUSCH: return "PUSCH";
        case PhysicalChannel::PDSCH: return "PDSCH";
        case PhysicalChannel::PDCCH: return "PDCCH";
    }
    return "Unknown";
}

std::optional<MsgType> msg_type_from_string(std::string_view name) noexcept {
    for (MsgType t : kAllMsgTypes) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

std::span<const FieldLayout> field_layouts() noexcept { return kLayouts; }

std::span<const FieldLayout> field_layouts(MsgType type) noexcept {
    // Layouts are grouped by type in kLayouts.
    std::size_t first = kLayouts.size();
    std::size_t count = 0;
    for (std::size_t i = 0; i < kLayouts.size(); ++i) {
        if (kLayouts[i].type == type) {
            if (count == 0) first = i;
            ++count;
        }
    }
    if (count == 0) return {};
    return std::span<const FieldLayout>(kLayouts).subspan(first, count);
}

const FieldLayout* find_field(MsgType type, std::string_view name) noexcept {
    for (const auto& f : kLayouts) {
        if (f.type == type && f.name == name) return &f;
    }
    return nullptr;
}

std::size_t body_length(MsgType type) noexcept {
    switch (type) {
        case MsgType::RRCSetupRequest: return 2;
        case MsgType::RRCSetup:
        case MsgType::RRCReconfiguration: return 1;
        default: return 0;
    }
}

std::uint32_t Message::field(std::string_view name) const {
    auto it = fields.find(name);
    if (it == fields.end()) {
        throw Error(ErrorKind::UnknownField,
                    std::string(name) + " not present in " + std::string(to_string(type)));
    }
    return it->second;
}

Message make_message(MsgType type, std::uint16_t rnti, std::uint8_t transaction_id) {
    Message msg;
    msg.type = type;
    msg.rnti = rnti;
    msg.transaction_id = transaction_id;
    for (const auto& f : field_layouts(type)) msg.fields.emplace(std::string(f.name), 0u);
    return msg;
}

std::string describe(const Message& msg) {
    std::ostringstream os;
    os << to_string(msg.type) << "{rnti=0x" << std::hex << msg.rnti << std::dec
       << ",tid=" << static_cast<int>(msg.transaction_id);
    for (const auto& [name, value] : msg.fields) os << "," << name << "=" << value;
    os << "}";
    return os.str();
}

}  // namespace twin
}  // namespace fuzztwin
