#include "fuzztwin/engine/pool.hpp"

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"

namespace fuzztwin::engine {

twin::PhysicalChannel physical_channel_of(StateId id) {
    const auto ch = twin::channel_from_code(id.channel_code());
    if (!ch) {
        throw Error(ErrorKind::MalformedFrame, "state " + to_string(id) + " has no known channel");
    }
    return twin::physical_channel_of(*ch);
}

bool CandidatePool::observe(const twin::Frame& frame) {
    const StateId id = derive_state_id(frame.raw);
    if (index_.count(id)) return false;
    const auto phy = physical_channel_of(id);
    auto& list = by_channel_[phy];
    index_.emplace(id, std::make_pair(phy, list.size()));
    list.push_back(PoolEntry{id, frame});
    return true;
}

void CandidatePool::observe(const ConnectionTrace& trace) {
    for (const auto& step : trace.steps) {
        if (step.raw.size() >= twin::kMinFrameLength) {
            observe(twin::Frame{step.raw, step.direction, step.time_ns});
        }
    }
}

std::vector<twin::PhysicalChannel> CandidatePool::channels() const {
    std::vector<twin::PhysicalChannel> out;
    for (const auto& [ch, list] : by_channel_) out.push_back(ch);
    return out;
}

std::span<const PoolEntry> CandidatePool::entries(twin::PhysicalChannel channel) const {
    const auto it = by_channel_.find(channel);
    if (it == by_channel_.end()) return {};
    return it->second;
}

const PoolEntry* CandidatePool::find(StateId state) const {
    const auto it = index_.find(state);
    if (it == index_.end()) return nullptr;
    return &by_channel_.at(it->second.first)[it->second.second];
}

std::vector<StateId> CandidatePool::states() const {
    std::vector<StateId> out;
    for (const auto& [ch, list] : by_channel_)
        for (const auto& e : list) out.push_back(e.state);
    return out;
}

std::vector<CommandReplace> CandidatePool::all_pairs() const {
    std::vector<CommandReplace> out;
    for (const auto& [ch, list] : by_channel_)
        for (const auto& a : list)
            for (const auto& b : list)
                if (a.state != b.state) out.push_back({a.state, b.state});
    return out;
}

std::vector<CommandReplace> CandidatePool::unapplied_pairs() const {
    std::vector<CommandReplace> out;
    for (const auto& p : all_pairs())
        if (!is_applied(p)) out.push_back(p);
    return out;
}

bool CandidatePool::is_applied(const CommandReplace& pair) const {
    return applied_.count({pair.from, pair.to}) != 0;
}

void CandidatePool::mark_applied(const CommandReplace& pair) { applied_.insert({pair.from, pair.to}); }

std::vector<CommandReplace> lal_schedule(const CandidatePool& pool, std::uint64_t seed) {
    if (pool.empty()) throw Error(ErrorKind::EmptyPool, "candidate pool has no observations");
    auto pairs = pool.unapplied_pairs();
    Rng rng(seed);
    rng.shuffle(std::span(pairs));
    return pairs;
}

}  // namespace fuzztwin::engine
