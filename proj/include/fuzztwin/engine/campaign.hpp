#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fuzztwin/common/trace.hpp"
#include "fuzztwin/engine/pool.hpp"
#include "fuzztwin/engine/soal.hpp"
#include "fuzztwin/engine/syal.hpp"
#include "fuzztwin/engine/target.hpp"

namespace fuzztwin::engine {

enum class Strategy : std::uint8_t { Lal, Syal, Soal, Random };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> strategy_from_string(std::string_view s) noexcept;

struct Finding {
    FuzzAction action;
    std::uint64_t trace_id = 0;  // 0 when the target produces no trace
    std::size_t case_index = 0;  // 1-based
    std::string note;
};

struct CampaignResult {
    Strategy strategy = Strategy::Lal;
    std::uint64_t seed = 0;
    std::size_t cases_run = 0;
    std::vector<Finding> vulnerabilities;
    std::vector<std::size_t> found_curve;  // cumulative findings after case i+1
    std::vector<ConnectionTrace> traces;   // kept when the target yields them
    std::optional<ProbabilityMatrix> matrix;

    /// 1-based case index at which `k` findings were reached.
    std::optional<std::size_t> cases_to_find(std::size_t k) const;
};

struct AttemptRecord {
    std::size_t case_index;  // 1-based
    const FuzzAction& action;
    const AttemptResult& result;
    bool vulnerable;
};

struct CampaignOptions {
    std::size_t budget = 0;  // 0: run until the case space is exhausted
    std::optional<std::size_t> stop_after_found;
    bool stop_when_all_known_found = false;
    bool keep_traces = true;
    std::function<void(const AttemptRecord&)> on_attempt;
    /// Checked before each case; a set flag ends the campaign after the
    /// case in flight.
    const std::atomic<bool>* cancel = nullptr;
};

/// Black-box: every unapplied same-channel replacement from the pool, in a
/// seeded order, one per attempt. Throws Error(EmptyPool).
CampaignResult lal_campaign(CandidatePool& pool, CommandTarget& target, const CampaignOptions& options,
                            std::uint64_t seed);

/// Grey-box probability-scheduled replacement. `prior` pairs receive one
/// failure update before the first case.
CampaignResult syal_campaign(CommandTarget& target, const SyalParams& params,
                             const CampaignOptions& options, std::uint64_t seed,
                             const std::vector<CommandReplace>& prior = {});

/// Uniform-random baseline over the same case space.
CampaignResult random_campaign(CommandTarget& target, const CampaignOptions& options, std::uint64_t seed);

struct SoalCase {
    FuzzAction action;
    ConnectionTrace trace;
    bool vulnerable = false;
    std::string note;  // e.g. "service mo_sig -> emergency", "failed: reject"
};

struct SoalResult {
    CampaignResult campaign;
    std::vector<SoalCase> cases;
    std::optional<twin::ServiceType> baseline_service;
};

/// White-box bit-level campaign: each action on a fresh connection. A case
/// is a vulnerability when the connection fails or the granted service
/// differs from the unfuzzed baseline.
SoalResult soal_campaign(const TwinCommandTarget& target, const std::vector<FuzzAction>& actions,
                         const CampaignOptions& options, std::uint64_t seed);

}  // namespace fuzztwin::engine
