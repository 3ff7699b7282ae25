#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fuzztwin/common/trace.hpp"
#include "fuzztwin/engine/pool.hpp"
#include "fuzztwin/twin/handshake.hpp"
#include "fuzztwin/twin/profile.hpp"

namespace fuzztwin::engine {

struct AttemptResult {
    Outcome outcome = Outcome::Success;
    bool applied = false;  // the replacement actually hit the wire
    std::optional<ConnectionTrace> trace;
};

/// Something a command-level campaign can run connection attempts against.
class CommandTarget {
public:
    virtual ~CommandTarget() = default;

    virtual std::vector<StateId> commands() const = 0;
    virtual bool allowed(StateId from, StateId to) const = 0;
    virtual AttemptResult attempt(const CommandReplace& pair, std::uint64_t attempt_seed) = 0;
    virtual Layer layer() const { return Layer::Rrc; }

    /// Number of seeded vulnerabilities when the target knows it; lets an
    /// evaluation run stop once all are found.
    virtual std::optional<std::size_t> known_vulnerabilities() const { return std::nullopt; }
};

/// Replaces the first frame of state `from` with the recorded `to` frame.
/// RRC layer forwards the recorded frame as-is (its own valid checksum);
/// MAC layer keeps the original frame's checksum bytes.
class CommandReplaceInterceptor : public twin::Interceptor {
public:
    CommandReplaceInterceptor(CommandReplace pair, twin::Frame replacement, Layer layer);

    relay::ForwardDecision on_frame(const twin::Frame& frame) override;

private:
    CommandReplace pair_;
    twin::Frame replacement_;
    Layer layer_;
};

struct TwinTargetOptions {
    twin::TwinConfig twin;
    Layer layer = Layer::Rrc;
    /// Physical channels whose commands are fuzzed; empty means all.
    std::vector<twin::PhysicalChannel> channels;
    /// Attempts draw their RNTI uniformly from [twin.rnti, twin.rnti + spread).
    std::uint16_t rnti_spread = 1;
    /// Run attempts over loopback TCP on these ports instead of in virtual time.
    std::optional<relay::RelayConfig> socket;
};

/// The byte-level twin driven through the relay.
class TwinCommandTarget : public CommandTarget {
public:
    TwinCommandTarget(TwinTargetOptions options, twin::VulnerabilityProfile profile);

    /// Clean observation run that fills the candidate pool.
    ConnectionTrace bootstrap();

    const CandidatePool& pool() const noexcept { return pool_; }
    CandidatePool& pool() noexcept { return pool_; }
    const twin::VulnerabilityProfile& profile() const noexcept { return profile_; }
    const TwinTargetOptions& options() const noexcept { return options_; }

    std::vector<StateId> commands() const override;
    bool allowed(StateId from, StateId to) const override;
    AttemptResult attempt(const CommandReplace& pair, std::uint64_t attempt_seed) override;
    Layer layer() const override { return options_.layer; }

    /// One attempt with an arbitrary interceptor and the target's settings.
    twin::HandshakeResult run(twin::Interceptor& interceptor, std::uint64_t attempt_seed) const;

private:
    bool channel_selected(twin::PhysicalChannel ch) const;

    TwinTargetOptions options_;
    twin::VulnerabilityProfile profile_;
    CandidatePool pool_;
};

/// Abstract command space: n downlink commands, a replacement fails iff the
/// pair is in the profile. Used for scaled scheduling experiments.
class CommandSpaceTarget : public CommandTarget {
public:
    CommandSpaceTarget(std::size_t n, twin::VulnerabilityProfile profile);

    static std::vector<StateId> make_commands(std::size_t n);

    std::vector<StateId> commands() const override { return commands_; }
    bool allowed(StateId from, StateId to) const override { return from != to; }
    AttemptResult attempt(const CommandReplace& pair, std::uint64_t attempt_seed) override;
    std::optional<std::size_t> known_vulnerabilities() const override { return profile_.count(); }

    const twin::VulnerabilityProfile& profile() const noexcept { return profile_; }

private:
    std::vector<StateId> commands_;
    twin::VulnerabilityProfile profile_;
};

}  // namespace fuzztwin::engine
