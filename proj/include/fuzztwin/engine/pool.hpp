#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fuzztwin/common/state_id.hpp"
#include "fuzztwin/common/trace.hpp"
#include "fuzztwin/twin/codec.hpp"

namespace fuzztwin::engine {

twin::PhysicalChannel physical_channel_of(StateId id);

struct PoolEntry {
    StateId state;
    twin::Frame frame;  // first capture of this state
};

/// Opaque frames observed on the relay, grouped by physical channel.
/// Replacement candidates are only ever drawn from the target's channel.
class CandidatePool {
public:
    /// Records the frame if its state has not been seen before. Returns true
    /// when the pool grew.
    bool observe(const twin::Frame& frame);
    void observe(const ConnectionTrace& trace);

    bool empty() const noexcept { return index_.empty(); }
    std::size_t size() const noexcept { return index_.size(); }

    std::vector<twin::PhysicalChannel> channels() const;
    std::span<const PoolEntry> entries(twin::PhysicalChannel channel) const;
    const PoolEntry* find(StateId state) const;
    std::vector<StateId> states() const;

    /// Every ordered same-channel pair (a, a'), a != a', in observation order.
    std::vector<CommandReplace> all_pairs() const;
    std::vector<CommandReplace> unapplied_pairs() const;

    bool is_applied(const CommandReplace& pair) const;
    void mark_applied(const CommandReplace& pair);
    std::size_t applied_count() const noexcept { return applied_.size(); }

private:
    std::map<twin::PhysicalChannel, std::vector<PoolEntry>> by_channel_;
    std::map<StateId, std::pair<twin::PhysicalChannel, std::size_t>> index_;
    std::set<std::pair<StateId, StateId>> applied_;
};

/// Unapplied pairs in a seeded order. Throws Error(EmptyPool) when the pool
/// holds no observations.
std::vector<CommandReplace> lal_schedule(const CandidatePool& pool, std::uint64_t seed);

}  // namespace fuzztwin::engine
