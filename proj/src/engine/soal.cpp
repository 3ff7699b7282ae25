#include "fuzztwin/engine/soal.hpp"

#include <algorithm>
#include <set>

#include "fuzztwin/common/error.hpp"

namespace fuzztwin::engine {

using twin::MsgType;

std::vector<FieldSpec> reference_field_domains() {
    std::vector<std::uint32_t> causes(16);
    for (std::uint32_t i = 0; i < 16; ++i) causes[i] = i;
    return {
        {MsgType::RRCSetupRequest, "ue_identity", {0b00, 0b01, 0b10}},
        {MsgType::RRCSetupRequest, "establishment_cause", causes},
        // <5, <15, <35, <75, <155, <157, =157
        {MsgType::RRCReconfiguration, "sr_config_index", {2, 10, 25, 55, 115, 156, 157}},
        {MsgType::RRCSetup, "srb_id", {0, 2}},
    };
}

std::vector<FieldSpec> reference_field_domains(MsgType type) {
    auto all = reference_field_domains();
    std::erase_if(all, [type](const FieldSpec& s) { return s.msg_type != type; });
    return all;
}

namespace {

const twin::FieldLayout& layout_of(MsgType type, std::string_view field) {
    const auto* f = twin::find_field(type, field);
    if (!f) {
        throw Error(ErrorKind::UnknownField, std::string(twin::to_string(type)) + " has no field '" +
                                                 std::string(field) + "'");
    }
    return *f;
}

void check_range(const twin::FieldLayout& f, std::uint32_t value) {
    if (value > f.max_value) {
        throw Error(ErrorKind::FieldOutOfRange, std::string(f.name) + "=" + std::to_string(value) +
                                                    " exceeds " + std::to_string(f.max_value));
    }
}

const BitFuzz& bit_fuzz(const FuzzAction& action) {
    const auto* b = std::get_if<BitFuzz>(&action.kind);
    if (!b) throw Error(ErrorKind::InvalidArgument, "action is not a bit-level fuzz");
    return *b;
}

}  // namespace

std::vector<FuzzAction> soal_enumerate(const std::vector<FieldSpec>& specs, bool before_encryption,
                                       bool after_encryption) {
    std::vector<FuzzAction> out;
    for (const auto& spec : specs) {
        const auto& layout = layout_of(spec.msg_type, spec.field);
        std::set<std::uint32_t> values(spec.values.begin(), spec.values.end());
        for (auto v : values) check_range(layout, v);
        if (before_encryption) {
            for (auto v : values) {
                out.push_back(FuzzAction{BitFuzz{spec.msg_type, spec.field, v}, Layer::Rrc,
                                         EncryptionPhase::BeforeEncryption});
            }
        }
        if (after_encryption) {
            for (auto v : values) {
                if (v == 0) continue;
                out.push_back(FuzzAction{BitFuzz{spec.msg_type, spec.field, v}, Layer::Mac,
                                         EncryptionPhase::AfterEncryption});
            }
        }
    }
    return out;
}

void overwrite_field(twin::Message& msg, std::string_view field, std::uint32_t value) {
    const auto& layout = layout_of(msg.type, field);
    check_range(layout, value);
    msg.fields[std::string(field)] = value;
}

twin::Frame soal_apply(const FuzzAction& action, const twin::Message& msg,
                       const twin::SecurityContext& ctx, Direction direction) {
    const auto& b = bit_fuzz(action);
    if (msg.type != b.msg_type) {
        throw Error(ErrorKind::InvalidArgument, "action targets " + std::string(twin::to_string(b.msg_type)));
    }
    twin::Message mutated = msg;
    overwrite_field(mutated, b.field, b.value);
    return twin::encode_message(mutated, ctx, direction);
}

relay::MutateBits soal_mask(const FuzzAction& action) {
    const auto& b = bit_fuzz(action);
    const auto& layout = layout_of(b.msg_type, b.field);
    check_range(layout, b.value);
    const auto mask = static_cast<std::uint8_t>(b.value << layout.shift);
    return relay::MutateBits{{relay::BitMask{twin::kHeaderLength + layout.byte, mask}}};
}

twin::Frame soal_apply(const FuzzAction& action, const twin::Frame& frame) {
    const auto& b = bit_fuzz(action);
    if (frame.raw.empty() || frame.raw[0] != static_cast<std::uint8_t>(b.msg_type)) {
        throw Error(ErrorKind::InvalidArgument, "frame does not carry " + std::string(twin::to_string(b.msg_type)));
    }
    return *relay::apply_mutation(frame, soal_mask(action));
}

BitFuzzInterceptor::BitFuzzInterceptor(FuzzAction action)
    : action_(std::move(action)), fuzz_(&bit_fuzz(action_)) {
    layout_of(fuzz_->msg_type, fuzz_->field);
}

void BitFuzzInterceptor::before_encode(twin::Message& msg, Direction, std::int64_t now_ns) {
    if (action_.phase != EncryptionPhase::BeforeEncryption || msg.type != fuzz_->msg_type) return;
    overwrite_field(msg, fuzz_->field, fuzz_->value);
    mark_applied(action_, now_ns);
}

relay::ForwardDecision BitFuzzInterceptor::on_frame(const twin::Frame& frame) {
    if (action_.phase != EncryptionPhase::AfterEncryption || applied()) return relay::Pass{};
    if (frame.raw.empty() || frame.raw[0] != static_cast<std::uint8_t>(fuzz_->msg_type)) {
        return relay::Pass{};
    }
    mark_applied(action_, frame.timestamp_ns);
    return soal_mask(action_);
}

}  // namespace fuzztwin::engine
