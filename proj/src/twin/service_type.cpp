#include "fuzztwin/twin/service_type.hpp"

#include <array>
#include <string>

#include "fuzztwin/common/error.hpp"

namespace fuzztwin::twin {

namespace {
constexpr std::array<ServiceType, 8> kEvenCauses{
    ServiceType::Emergency,        ServiceType::HighPrioAccess,
    ServiceType::MtAccess,         ServiceType::MoSig,
    ServiceType::MoData,           ServiceType::DelayTolerantAccessV1020,
    ServiceType::MoVoiceCallV1280, ServiceType::Spare1,
};
}  // namespace

ServiceType establishment_cause_effect(std::uint8_t cause) {
    if (cause > 15) {
        throw Error(ErrorKind::FieldOutOfRange,
                    "establishment cause " + std::to_string(cause) + " exceeds 4 bits");
    }
    if (cause & 1u) return ServiceType::Nulltype;
    return kEvenCauses[cause >> 1];
}

std::string_view to_string(ServiceType s) noexcept {
    switch (s) {
        case ServiceType::Emergency: return "emergency";
        case ServiceType::Nulltype: return "nulltype";
        case ServiceType::HighPrioAccess: return "high_prio_access";
        case ServiceType::MtAccess: return "mt_access";
        case ServiceType::MoSig: return "mo_sig";
        case ServiceType::MoData: return "mo_data";
        case ServiceType::DelayTolerantAccessV1020: return "delay_tolerant_access_v1020";
        case ServiceType::MoVoiceCallV1280: return "mo_voice_call_v1280";
        case ServiceType::Spare1: return "spare1";
    }
    return "unknown";
}

std::optional<ServiceType> service_type_from_string(std::string_view name) noexcept {
    for (int i = 0; i <= static_cast<int>(ServiceType::Spare1); ++i) {
        auto s = static_cast<ServiceType>(i);
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

}  // namespace fuzztwin::twin
