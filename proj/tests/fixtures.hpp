#pragma once

// Test data generators shared by unit and acceptance tests.

#include <cstdint>
#include <vector>

#include "fuzztwin/analysis/synthetic.hpp"
#include "fuzztwin/common/random.hpp"
#include "fuzztwin/common/trace.hpp"

namespace fixtures {

inline fuzztwin::ConnectionTrace trace_of(const std::vector<fuzztwin::StateId>& states, fuzztwin::Outcome outcome,
                                          std::int64_t t0 = 1000, std::int64_t gap = 1000) {
    fuzztwin::ConnectionTrace t;
    for (std::size_t i = 0; i < states.size(); ++i) {
        t.steps.push_back({states[i], t0 + static_cast<std::int64_t>(i) * gap, fuzztwin::Direction::Uplink, {}});
    }
    t.outcome = outcome;
    t.reason = outcome == fuzztwin::Outcome::Failed ? fuzztwin::FailureReason::Timeout
                                                    : fuzztwin::FailureReason::None;
    t.outcome_time_ns = t0 + static_cast<std::int64_t>(states.size()) * gap;
    return t;
}

// Unstructured random dataset: up to `max_traces` traces over a random-size
// state set, with lengths 0..15 and a random outcome mix. At least one
// trace is always failed so risk extraction is defined.
inline std::vector<fuzztwin::ConnectionTrace> random_dataset(std::uint64_t seed, std::size_t max_traces) {
    fuzztwin::Rng rng(seed);
    const auto states = fuzztwin::analysis::synthetic_states(2 + rng.below(30));
    const std::size_t n = 1 + rng.below(max_traces);
    const double fail_rate = rng.uniform(0.05, 0.95);
    std::vector<fuzztwin::ConnectionTrace> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<fuzztwin::StateId> seq(rng.below(16));
        for (auto& s : seq) s = states[rng.below(states.size())];
        const bool failed = i == 0 || rng.uniform() < fail_rate;
        out.push_back(trace_of(seq, failed ? fuzztwin::Outcome::Failed : fuzztwin::Outcome::Success,
                               1000 + static_cast<std::int64_t>(i)));
    }
    return out;
}

}  // namespace fixtures
