#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fuzztwin/common/state_id.hpp"
#include "fuzztwin/twin/message.hpp"
#include "fuzztwin/twin/service_type.hpp"

namespace fuzztwin {

enum class Outcome : std::uint8_t { Success = 0, Failed = 1 };

enum class FailureReason : std::uint8_t {
    None = 0,
    Timeout,
    IntegrityError,
    MalformedFrame,
    Reject,
    ProfileViolation,
    SecurityViolation,
    RetriesExhausted,
};

/// RRC: the mutated message is re-encoded with a fresh checksum.
/// MAC: raw on-wire bytes are changed and the checksum is left as it was.
enum class Layer : std::uint8_t { Rrc = 0, Mac = 1 };
enum class EncryptionPhase : std::uint8_t { BeforeEncryption = 0, AfterEncryption = 1 };

struct CommandReplace {
    StateId from;
    StateId to;
    bool operator==(const CommandReplace&) const = default;
};

struct BitFuzz {
    twin::MsgType msg_type = twin::MsgType::RRCSetupRequest;
    std::string field;
    std::uint32_t value = 0;
    bool operator==(const BitFuzz&) const = default;
};

struct FuzzAction {
    std::variant<CommandReplace, BitFuzz> kind;
    Layer layer = Layer::Rrc;
    EncryptionPhase phase = EncryptionPhase::BeforeEncryption;

    bool is_command() const noexcept { return std::holds_alternative<CommandReplace>(kind); }
    bool operator==(const FuzzAction&) const = default;
};

struct TraceStep {
    StateId state;
    std::int64_t time_ns = 0;
    Direction direction = Direction::Uplink;
    std::vector<std::uint8_t> raw;  // forwarded bytes; empty for synthetic traces

    bool operator==(const TraceStep&) const = default;
};

/// One connection attempt: the ordered states that crossed the relay, the
/// fuzz action applied (if any), and how the attempt ended.
struct ConnectionTrace {
    std::vector<TraceStep> steps;
    std::optional<FuzzAction> fuzz_action;
    Outcome outcome = Outcome::Success;
    FailureReason reason = FailureReason::None;
    std::optional<twin::ServiceType> service_type;
    std::int64_t fuzz_time_ns = 0;
    std::int64_t outcome_time_ns = 0;

    std::vector<StateId> states() const;
    bool operator==(const ConnectionTrace&) const = default;
};

/// Checks the trace invariants: strictly increasing step times, and
/// outcome_time >= fuzz_time when an action is present.
bool trace_is_valid(const ConnectionTrace& trace, std::string* why = nullptr);

std::string_view to_string(Outcome o) noexcept;
std::string_view to_string(FailureReason r) noexcept;
std::string_view to_string(Layer l) noexcept;
std::string_view to_string(EncryptionPhase p) noexcept;
std::optional<Outcome> outcome_from_string(std::string_view s) noexcept;
std::optional<FailureReason> failure_reason_from_string(std::string_view s) noexcept;
std::optional<Layer> layer_from_string(std::string_view s) noexcept;
std::optional<EncryptionPhase> phase_from_string(std::string_view s) noexcept;

std::string describe(const FuzzAction& action);

}  // namespace fuzztwin
