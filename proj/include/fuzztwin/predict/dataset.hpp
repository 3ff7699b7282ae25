#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fuzztwin/common/trace.hpp"

namespace fuzztwin::predict {

/// Prefix length fed to the predictor: the first N states, or every state
/// whose trace-relative timestamp is below T seconds.
struct Cutoff {
    enum class Kind : std::uint8_t { Steps, Duration };
    Kind kind = Kind::Steps;
    std::size_t steps = 10;
    double seconds = 0.0;

    static Cutoff Steps(std::size_t n) { return {Kind::Steps, n, 0.0}; }
    static Cutoff Duration(double t) { return {Kind::Duration, 0, t}; }

    std::string describe() const;
    bool operator==(const Cutoff&) const = default;
};

/// Parses "steps:10" / "10" or "duration:0.08" / "0.08s".
std::optional<Cutoff> cutoff_from_string(std::string_view text);

/// State ids seen in training. Index 0 is reserved for states never seen.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<StateId> states);
    static Vocabulary build(std::span<const ConnectionTrace> traces);

    std::uint32_t index_of(StateId s) const noexcept;
    std::size_t size() const noexcept { return states_.size() + 1; }
    const std::vector<StateId>& states() const noexcept { return states_; }

private:
    std::vector<StateId> states_;
    std::unordered_map<std::uint32_t, std::uint32_t> index_;
};

struct SequenceSample {
    std::vector<std::uint32_t> states;
    std::vector<double> timestamps;  // seconds from the first step
    int label = 0;                   // 1 = failed
    double detection_time = 0.0;     // timestamp of the last state kept
    double outcome_time = 0.0;       // trace-relative
};

/// Throws Error(EmptySequence) when nothing survives the cutoff.
SequenceSample make_sample(const ConnectionTrace& trace, const Vocabulary& vocab, const Cutoff& cutoff);

struct SampleSet {
    std::vector<SequenceSample> samples;
    std::size_t skipped_empty = 0;
};

SampleSet make_samples(std::span<const ConnectionTrace> traces, const Vocabulary& vocab, const Cutoff& cutoff);

}  // namespace fuzztwin::predict
