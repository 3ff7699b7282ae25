#include "fuzztwin/analysis/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"

namespace fuzztwin::analysis {

std::vector<StateId> synthetic_states(std::size_t n) {
    if (n > 200) throw Error(ErrorKind::InvalidArgument, "at most 200 synthetic states");
    std::vector<StateId> out;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ch = static_cast<std::uint8_t>(1 + i % 6);
        out.push_back(make_state_id(ch, static_cast<std::uint8_t>(0x20 + i), ch, 0x46));
    }
    return out;
}

SyntheticDataset synthetic_dataset(const SyntheticConfig& cfg) {
    if (cfg.states < cfg.path_length + 2 || cfg.path_length < 2) {
        throw Error(ErrorKind::InvalidArgument, "need a path of >= 2 states and >= 2 detour states");
    }
    if (cfg.injection_window < 1 || cfg.min_gap_ns <= 0 || cfg.max_gap_ns < cfg.min_gap_ns) {
        throw Error(ErrorKind::InvalidArgument, "bad synthetic timing or window");
    }
    Rng rng(cfg.seed);
    SyntheticDataset ds;
    ds.states = synthetic_states(cfg.states);

    std::vector<std::size_t> order(cfg.states);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    const std::vector<std::size_t> path(order.begin(), order.begin() + static_cast<long>(cfg.path_length));
    const std::vector<std::size_t> detours(order.begin() + static_cast<long>(cfg.path_length), order.end());

    auto walk = [&]() {
        std::vector<std::size_t> seq;
        for (auto s : path) {
            seq.push_back(s);
            if (rng.uniform() < cfg.detour_rate) seq.push_back(detours[rng.below(detours.size())]);
        }
        return seq;
    };
    auto pairs_of = [](const std::vector<std::size_t>& seq) {
        std::set<std::pair<std::size_t, std::size_t>> p;
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) p.insert({seq[i], seq[i + 1]});
        return p;
    };

    const auto n_failed = static_cast<std::size_t>(
        std::llround(cfg.failed_fraction * static_cast<double>(cfg.traces)));
    std::vector<std::uint8_t> failed(cfg.traces, 0);
    std::fill(failed.begin(), failed.begin() + static_cast<long>(std::min(n_failed, cfg.traces)), 1);
    rng.shuffle(std::span(failed));

    // Successful walks first, so injected pairs can avoid everything they contain.
    std::vector<std::vector<std::size_t>> seqs(cfg.traces);
    std::set<std::pair<std::size_t, std::size_t>> success_pairs;
    for (std::size_t t = 0; t < cfg.traces; ++t) {
        seqs[t] = walk();
        if (!failed[t]) {
            const auto p = pairs_of(seqs[t]);
            success_pairs.insert(p.begin(), p.end());
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> injected;
    for (int guard = 0; injected.size() < cfg.injected_pairs; ++guard) {
        if (guard > 100000) throw Error(ErrorKind::InvalidArgument, "cannot find enough unseen pairs");
        const std::size_t u = detours[rng.below(detours.size())];
        const std::size_t v = rng.below(cfg.states);
        const std::pair<std::size_t, std::size_t> p{u, v};
        if (u == v || success_pairs.count(p) ||
            std::find(injected.begin(), injected.end(), p) != injected.end()) {
            continue;
        }
        injected.push_back(p);
    }
    for (const auto& [u, v] : injected) ds.injected.insert({ds.states[u], ds.states[v]});

    for (std::size_t t = 0; t < cfg.traces; ++t) {
        auto& seq = seqs[t];
        if (failed[t] && rng.uniform() < cfg.injection_rate) {
            const auto& [u, v] = injected[rng.below(injected.size())];
            const auto pos = rng.below(std::min(cfg.injection_window, seq.size()));
            seq.insert(seq.begin() + static_cast<long>(pos), {u, v});
        }
        ConnectionTrace tr;
        std::int64_t now = 0;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            now += cfg.min_gap_ns + static_cast<std::int64_t>(rng.below(
                                        static_cast<std::uint64_t>(cfg.max_gap_ns - cfg.min_gap_ns) + 1));
            tr.steps.push_back(TraceStep{ds.states[seq[i]], now,
                                         i % 2 ? Direction::Downlink : Direction::Uplink, {}});
        }
        tr.fuzz_action =
            FuzzAction{CommandReplace{ds.states[seq[0]], ds.states[detours[rng.below(detours.size())]]}};
        tr.fuzz_time_ns = tr.steps.front().time_ns;
        if (failed[t]) {
            tr.outcome = Outcome::Failed;
            tr.reason = FailureReason::Timeout;
            tr.outcome_time_ns =
                now + cfg.min_failure_delay_ns +
                static_cast<std::int64_t>(rng.below(
                    static_cast<std::uint64_t>(cfg.max_failure_delay_ns - cfg.min_failure_delay_ns) + 1));
        } else {
            tr.outcome = Outcome::Success;
            tr.outcome_time_ns = now + cfg.min_gap_ns;
        }
        ds.traces.push_back(std::move(tr));
    }
    return ds;
}

}  // namespace fuzztwin::analysis
