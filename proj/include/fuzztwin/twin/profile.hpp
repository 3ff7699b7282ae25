#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>

#include "fuzztwin/common/state_id.hpp"

namespace fuzztwin::twin {

enum class Clustering : std::uint8_t { RowClustered, ColumnClustered, Uniform };

std::string_view to_string(Clustering c) noexcept;
std::optional<Clustering> clustering_from_string(std::string_view s) noexcept;

/// Command-level pairs (expected state, replacement state) that force a
/// connection failure when the replacement arrives in place of the expected
/// message. Everything else in the legal-but-unexpected zone is ignored.
struct VulnerabilityProfile {
    std::set<std::pair<StateId, StateId>> vulnerable_pairs;
    Clustering clustering = Clustering::Uniform;

    bool contains(StateId expected, StateId received) const {
        return vulnerable_pairs.count({expected, received}) != 0;
    }
    std::size_t count() const noexcept { return vulnerable_pairs.size(); }

    bool operator==(const VulnerabilityProfile&) const = default;
};

/// Draws `count` distinct off-diagonal pairs over `states`.
/// RowClustered packs them into as few rows as possible, ColumnClustered
/// into as few columns, Uniform spreads them over the whole matrix.
VulnerabilityProfile generate_profile(std::span<const StateId> states, std::size_t count,
                                      Clustering clustering, std::uint64_t seed);

VulnerabilityProfile load_profile(const std::filesystem::path& path);
void save_profile(const VulnerabilityProfile& profile, const std::filesystem::path& path);

}  // namespace fuzztwin::twin
