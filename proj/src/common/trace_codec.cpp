#include "fuzztwin/common/trace_codec.hpp"

namespace fuzztwin {

namespace {

template <typename E>
E checked_enum(std::uint8_t v, std::uint8_t max, const char* what) {
    if (v > max) throw Error(ErrorKind::CorruptRecord, std::string("bad ") + what + " code");
    return static_cast<E>(v);
}

}  // namespace

void write_action(ByteWriter& w, const FuzzAction& action) {
    w.u8(action.is_command() ? 0 : 1);
    w.u8(static_cast<std::uint8_t>(action.layer));
    w.u8(static_cast<std::uint8_t>(action.phase));
    if (const auto* c = std::get_if<CommandReplace>(&action.kind)) {
        w.u32(c->from.value);
        w.u32(c->to.value);
    } else {
        const auto& b = std::get<BitFuzz>(action.kind);
        w.u8(static_cast<std::uint8_t>(b.msg_type));
        w.str(b.field);
        w.u32(b.value);
    }
}

FuzzAction read_action(ByteReader& r) {
    FuzzAction a;
    const auto kind = r.u8();
    a.layer = checked_enum<Layer>(r.u8(), 1, "layer");
    a.phase = checked_enum<EncryptionPhase>(r.u8(), 1, "phase");
    if (kind == 0) {
        CommandReplace c;
        c.from.value = r.u32();
        c.to.value = r.u32();
        a.kind = c;
    } else if (kind == 1) {
        BitFuzz b;
        const auto type = twin::msg_type_from_code(r.u8());
        if (!type) throw Error(ErrorKind::CorruptRecord, "bad message type code");
        b.msg_type = *type;
        b.field = r.str();
        b.value = r.u32();
        a.kind = b;
    } else {
        throw Error(ErrorKind::CorruptRecord, "bad action kind");
    }
    return a;
}

std::vector<std::uint8_t> serialize_trace(const ConnectionTrace& trace) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(trace.steps.size()));
    for (const auto& s : trace.steps) {
        w.u32(s.state.value);
        w.i64(s.time_ns);
        w.u8(static_cast<std::uint8_t>(s.direction));
        w.bytes(s.raw);
    }
    w.u8(trace.fuzz_action.has_value());
    if (trace.fuzz_action) write_action(w, *trace.fuzz_action);
    w.u8(static_cast<std::uint8_t>(trace.outcome));
    w.u8(static_cast<std::uint8_t>(trace.reason));
    w.u8(trace.service_type.has_value());
    w.u8(trace.service_type ? static_cast<std::uint8_t>(*trace.service_type) : 0);
    w.i64(trace.fuzz_time_ns);
    w.i64(trace.outcome_time_ns);
    return w.take();
}

ConnectionTrace deserialize_trace(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    ConnectionTrace t;
    const auto n = r.u32();
    if (n > r.remaining()) throw Error(ErrorKind::CorruptRecord, "step count exceeds record");
    t.steps.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        TraceStep s;
        s.state.value = r.u32();
        s.time_ns = r.i64();
        s.direction = checked_enum<Direction>(r.u8(), 1, "direction");
        s.raw = r.bytes();
        t.steps.push_back(std::move(s));
    }
    if (r.u8()) t.fuzz_action = read_action(r);
    t.outcome = checked_enum<Outcome>(r.u8(), 1, "outcome");
    t.reason = checked_enum<FailureReason>(r.u8(), static_cast<std::uint8_t>(FailureReason::RetriesExhausted),
                                           "reason");
    const bool has_service = r.u8() != 0;
    const auto service = r.u8();
    if (has_service) {
        t.service_type = checked_enum<twin::ServiceType>(
            service, static_cast<std::uint8_t>(twin::ServiceType::Spare1), "service type");
    }
    t.fuzz_time_ns = r.i64();
    t.outcome_time_ns = r.i64();
    if (!r.done()) throw Error(ErrorKind::CorruptRecord, "trailing bytes in trace record");
    return t;
}

std::uint64_t trace_id(const ConnectionTrace& trace) { return fnv1a64(serialize_trace(trace)); }

}  // namespace fuzztwin
