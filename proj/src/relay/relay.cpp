#include "fuzztwin/relay/relay.hpp"

#include <set>
#include <sstream>

#include "fuzztwin/common/error.hpp"

namespace fuzztwin::relay {

std::string describe(const ForwardDecision& decision) {
    std::ostringstream os;
    if (std::holds_alternative<Pass>(decision)) {
        os << "pass";
    } else if (std::holds_alternative<Drop>(decision)) {
        os << "drop";
    } else if (const auto* r = std::get_if<ReplaceFrame>(&decision)) {
        os << "replace(" << r->frame.raw.size() << " bytes)";
    } else {
        os << "mutate(";
        const auto& masks = std::get<MutateBits>(decision).masks;
        for (std::size_t i = 0; i < masks.size(); ++i) {
            if (i) os << ",";
            os << masks[i].offset << ":0x" << std::hex << static_cast<int>(masks[i].mask) << std::dec;
        }
        os << ")";
    }
    return os.str();
}

std::optional<twin::Frame> apply_mutation(const twin::Frame& frame, const ForwardDecision& decision) {
    if (std::holds_alternative<Drop>(decision)) return std::nullopt;
    if (std::holds_alternative<Pass>(decision)) return frame;
    if (const auto* r = std::get_if<ReplaceFrame>(&decision)) {
        if (r->frame.direction != frame.direction) {
            throw Error(ErrorKind::InvalidArgument, "replacement frame changes direction");
        }
        twin::Frame out = r->frame;
        out.timestamp_ns = frame.timestamp_ns;
        return out;
    }
    twin::Frame out = frame;
    for (const auto& m : std::get<MutateBits>(decision).masks) {
        if (m.offset >= out.raw.size()) {
            throw Error(ErrorKind::OffsetOutOfRange, "mask offset " + std::to_string(m.offset) +
                                                         " outside " + std::to_string(out.raw.size()) +
                                                         "-byte frame");
        }
        out.raw[m.offset] ^= m.mask;
    }
    return out;
}

RelayCore::RelayCore(FrameInterceptor interceptor, RecordSink sink)
    : interceptor_(std::move(interceptor)), sink_(std::move(sink)) {}

std::optional<twin::Frame> RelayCore::process(const twin::Frame& frame) {
    std::lock_guard lock(mu_);
    ForwardDecision decision = interceptor_ ? interceptor_(frame) : ForwardDecision{Pass{}};
    RelayRecord rec{frame, decision, apply_mutation(frame, decision)};
    if (!rec.forwarded) {
        ++report_.dropped;
    } else {
        if (rec.forwarded->direction == Direction::Uplink) {
            ++report_.uplink_forwarded;
        } else {
            ++report_.downlink_forwarded;
        }
        if (rec.forwarded->raw != frame.raw) ++report_.rewritten;
    }
    if (sink_) sink_(rec);
    auto forwarded = rec.forwarded;
    report_.records.push_back(std::move(rec));
    return forwarded;
}

RelayReport RelayCore::report() const {
    std::lock_guard lock(mu_);
    return report_;
}

void RelayConfig::validate() const {
    std::set<std::uint16_t> seen;
    for (auto p : {ue_listen_port, gnb_forward_port, gnb_listen_port, ue_forward_port}) {
        if (p != 0 && !seen.insert(p).second) {
            throw Error(ErrorKind::InvalidArgument, "relay ports must be distinct");
        }
    }
}

}  // namespace fuzztwin::relay
