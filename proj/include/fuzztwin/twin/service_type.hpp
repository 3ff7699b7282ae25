#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace fuzztwin::twin {

enum class ServiceType : std::uint8_t {
    Emergency,
    Nulltype,
    HighPrioAccess,
    MtAccess,
    MoSig,
    MoData,
    DelayTolerantAccessV1020,
    MoVoiceCallV1280,
    Spare1,
};

/// Service type requested by a 4-bit establishmentCause. Even codes map to
/// the named services in order; every odd code is nulltype.
ServiceType establishment_cause_effect(std::uint8_t cause);

std::string_view to_string(ServiceType s) noexcept;
std::optional<ServiceType> service_type_from_string(std::string_view name) noexcept;

}  // namespace fuzztwin::twin
