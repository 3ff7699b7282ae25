#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fuzztwin/common/bytes.hpp"
#include "fuzztwin/common/trace.hpp"

namespace fuzztwin {

void write_action(ByteWriter& w, const FuzzAction& action);
FuzzAction read_action(ByteReader& r);

std::vector<std::uint8_t> serialize_trace(const ConnectionTrace& trace);
ConnectionTrace deserialize_trace(std::span<const std::uint8_t> bytes);

/// Content hash of the serialized trace; equal content gives equal ids.
std::uint64_t trace_id(const ConnectionTrace& trace);

}  // namespace fuzztwin
