#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fuzztwin/common/trace.hpp"
#include "fuzztwin/relay/relay.hpp"
#include "fuzztwin/twin/codec.hpp"
#include "fuzztwin/twin/handshake.hpp"

namespace fuzztwin::engine {

struct FieldSpec {
    twin::MsgType msg_type = twin::MsgType::RRCSetupRequest;
    std::string field;
    std::vector<std::uint32_t> values;
};

/// Identifier domains of the reference bit-level experiment: ue_identity
/// {00,01,10}, every 4-bit establishment cause, one sr_config_index sample
/// from each of the ranges <5, <15, <35, <75, <155, <157 plus 157, and the
/// two rejected srb_id values.
std::vector<FieldSpec> reference_field_domains();

/// Same domains restricted to one message type.
std::vector<FieldSpec> reference_field_domains(twin::MsgType type);

/// One action per (field, value), fields in declaration order, values
/// deduplicated and sorted. After-encryption values are bit-flip masks, so
/// the zero mask (no change on the wire) is skipped in that phase.
/// Throws Error(UnknownField) or Error(FieldOutOfRange).
std::vector<FuzzAction> soal_enumerate(const std::vector<FieldSpec>& specs, bool before_encryption,
                                       bool after_encryption);

/// Overwrites one identifier, checking it exists and fits its width.
void overwrite_field(twin::Message& msg, std::string_view field, std::uint32_t value);

/// Before encryption: overwrite the field and re-encode with a fresh checksum.
twin::Frame soal_apply(const FuzzAction& action, const twin::Message& msg,
                       const twin::SecurityContext& ctx, Direction direction);

/// After encryption: XOR the value into the field's on-wire bits and keep
/// the stale checksum.
twin::Frame soal_apply(const FuzzAction& action, const twin::Frame& frame);

/// The decision soal_apply(action, frame) corresponds to.
relay::MutateBits soal_mask(const FuzzAction& action);

/// Applies one bit-level action to the first matching message of an attempt.
class BitFuzzInterceptor : public twin::Interceptor {
public:
    explicit BitFuzzInterceptor(FuzzAction action);

    void before_encode(twin::Message& msg, Direction direction, std::int64_t now_ns) override;
    relay::ForwardDecision on_frame(const twin::Frame& frame) override;

private:
    FuzzAction action_;
    const BitFuzz* fuzz_;
};

}  // namespace fuzztwin::engine
