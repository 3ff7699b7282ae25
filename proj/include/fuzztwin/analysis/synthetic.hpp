#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "fuzztwin/analysis/graph.hpp"

namespace fuzztwin::analysis {

/// Campaign-shaped labelled traces. Every trace walks a common handshake
/// path with random detours through the other states; failed traces (at
/// `injection_rate`) additionally carry one injected transaction that no
/// successful trace contains, early in the trace.
struct SyntheticConfig {
    std::size_t traces = 205;
    double failed_fraction = 129.0 / 205.0;
    std::size_t states = 39;
    std::size_t path_length = 12;       // states on the common path
    std::size_t injected_pairs = 7;
    double injection_rate = 1.0;
    std::size_t injection_window = 8;   // injected pair starts before this step
    double detour_rate = 0.25;          // chance of a detour state after each path state
    std::int64_t min_gap_ns = 5'000'000;
    std::int64_t max_gap_ns = 10'000'000;
    std::int64_t min_failure_delay_ns = 2'000'000'000;
    std::int64_t max_failure_delay_ns = 5'000'000'000;
    std::uint64_t seed = 1;
};

struct SyntheticDataset {
    std::vector<ConnectionTrace> traces;
    std::vector<StateId> states;
    std::set<Transaction> injected;
};

SyntheticDataset synthetic_dataset(const SyntheticConfig& config);

/// State ids used by the generator: valid channel codes, unique prefixes.
std::vector<StateId> synthetic_states(std::size_t n);

}  // namespace fuzztwin::analysis
