#include "fuzztwin/predict/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

#include "fuzztwin/common/error.hpp"

namespace fuzztwin::predict {

std::string Cutoff::describe() const {
    if (kind == Kind::Steps) return "steps:" + std::to_string(steps);
    char buf[48];
    std::snprintf(buf, sizeof buf, "duration:%g", seconds);
    return buf;
}

std::optional<Cutoff> cutoff_from_string(std::string_view text) {
    auto parse_steps = [](std::string_view s) -> std::optional<Cutoff> {
        std::size_t n = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
        return Cutoff::Steps(n);
    };
    auto parse_seconds = [](std::string_view s) -> std::optional<Cutoff> {
        if (s.empty()) return std::nullopt;
        const std::string str(s);
        char* end = nullptr;
        const double t = std::strtod(str.c_str(), &end);
        if (end != str.c_str() + str.size() || !(t >= 0)) return std::nullopt;
        return Cutoff::Duration(t);
    };
    if (text.starts_with("steps:")) return parse_steps(text.substr(6));
    if (text.starts_with("duration:")) return parse_seconds(text.substr(9));
    if (text.ends_with("s")) return parse_seconds(text.substr(0, text.size() - 1));
    return parse_steps(text);
}

Vocabulary::Vocabulary(std::vector<StateId> states) : states_(std::move(states)) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (!index_.emplace(states_[i].value, static_cast<std::uint32_t>(i + 1)).second) {
            throw Error(ErrorKind::InvalidArgument, "duplicate state in vocabulary: " + to_string(states_[i]));
        }
    }
}

Vocabulary Vocabulary::build(std::span<const ConnectionTrace> traces) {
    std::set<StateId> seen;
    for (const auto& t : traces)
        for (const auto& s : t.steps) seen.insert(s.state);
    return Vocabulary(std::vector<StateId>(seen.begin(), seen.end()));
}

std::uint32_t Vocabulary::index_of(StateId s) const noexcept {
    const auto it = index_.find(s.value);
    return it == index_.end() ? 0 : it->second;
}

SequenceSample make_sample(const ConnectionTrace& trace, const Vocabulary& vocab, const Cutoff& cutoff) {
    SequenceSample out;
    out.label = trace.outcome == Outcome::Failed ? 1 : 0;
    if (trace.steps.empty()) throw Error(ErrorKind::EmptySequence, "trace has no states");
    const std::int64_t origin = trace.steps.front().time_ns;
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& step = trace.steps[i];
        const double t = static_cast<double>(step.time_ns - origin) * 1e-9;
        if (cutoff.kind == Cutoff::Kind::Steps ? i >= cutoff.steps : !(t < cutoff.seconds)) break;
        out.states.push_back(vocab.index_of(step.state));
        out.timestamps.push_back(t);
    }
    if (out.states.empty()) {
        throw Error(ErrorKind::EmptySequence, "no states survive cutoff " + cutoff.describe());
    }
    out.detection_time = out.timestamps.back();
    out.outcome_time = static_cast<double>(trace.outcome_time_ns - origin) * 1e-9;
    return out;
}

SampleSet make_samples(std::span<const ConnectionTrace> traces, const Vocabulary& vocab, const Cutoff& cutoff) {
    SampleSet set;
    set.samples.reserve(traces.size());
    for (const auto& t : traces) {
        try {
            set.samples.push_back(make_sample(t, vocab, cutoff));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::EmptySequence) throw;
            ++set.skipped_empty;
        }
    }
    return set;
}

}  // namespace fuzztwin::predict
