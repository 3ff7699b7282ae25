#include "fuzztwin/common/trace.hpp"

#include <sstream>

namespace fuzztwin {

std::vector<StateId> ConnectionTrace::states() const {
    std::vector<StateId> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.state);
    return out;
}

bool trace_is_valid(const ConnectionTrace& trace, std::string* why) {
    for (std::size_t i = 1; i < trace.steps.size(); ++i) {
        if (trace.steps[i].time_ns <= trace.steps[i - 1].time_ns) {
            if (why) *why = "step timestamps not strictly increasing at " + std::to_string(i);
            return false;
        }
    }
    if (trace.fuzz_action && trace.outcome_time_ns < trace.fuzz_time_ns) {
        if (why) *why = "outcome precedes fuzz time";
        return false;
    }
    return true;
}

std::string_view to_string(Outcome o) noexcept { return o == Outcome::Success ? "success" : "failed"; }

std::string_view to_string(FailureReason r) noexcept {
    switch (r) {
        case FailureReason::None: return "none";
        case FailureReason::Timeout: return "timeout";
        case FailureReason::IntegrityError: return "integrity_error";
        case FailureReason::MalformedFrame: return "malformed_frame";
        case FailureReason::Reject: return "reject";
        case FailureReason::ProfileViolation: return "profile_violation";
        case FailureReason::SecurityViolation: return "security_violation";
        case FailureReason::RetriesExhausted: return "retries_exhausted";
    }
    return "unknown";
}

std::string_view to_string(Layer l) noexcept { return l == Layer::Rrc ? "rrc" : "mac"; }

std::string_view to_string(EncryptionPhase p) noexcept {
    return p == EncryptionPhase::BeforeEncryption ? "before_encryption" : "after_encryption";
}

std::optional<Outcome> outcome_from_string(std::string_view s) noexcept {
    if (s == "success") return Outcome::Success;
    if (s == "failed") return Outcome::Failed;
    return std::nullopt;
}

std::optional<FailureReason> failure_reason_from_string(std::string_view s) noexcept {
    for (int i = 0; i <= static_cast<int>(FailureReason::RetriesExhausted); ++i) {
        auto r = static_cast<FailureReason>(i);
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

std::optional<Layer> layer_from_string(std::string_view s) noexcept {
    if (s == "rrc") return Layer::Rrc;
    if (s == "mac") return Layer::Mac;
    return std::nullopt;
}

std::optional<EncryptionPhase> phase_from_string(std::string_view s) noexcept {
    if (s == "before_encryption") return EncryptionPhase::BeforeEncryption;
    if (s == "after_encryption") return EncryptionPhase::AfterEncryption;
    return std::nullopt;
}

std::string describe(const FuzzAction& action) {
    std::ostringstream os;
    if (const auto* c = std::get_if<CommandReplace>(&action.kind)) {
        os << "replace " << to_string(c->from) << " -> " << to_string(c->to);
    } else {
        const auto& b = std::get<BitFuzz>(action.kind);
        os << "bitfuzz " << twin::to_string(b.msg_type) << "." << b.field << " := " << b.value;
    }
    os << " [" << to_string(action.layer) << ", " << to_string(action.phase) << "]";
    return os.str();
}

}  // namespace fuzztwin
