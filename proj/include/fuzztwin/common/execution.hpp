#pragma once

#include <cstdint>

namespace fuzztwin {

/// Selects the OpenMP kernel or its serial reference.
enum class Execution : std::uint8_t { Serial, Parallel };

}  // namespace fuzztwin
