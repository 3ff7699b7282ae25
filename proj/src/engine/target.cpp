#include "fuzztwin/engine/target.hpp"

#include <algorithm>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"
#include "fuzztwin/twin/socket_handshake.hpp"

namespace fuzztwin::engine {

CommandReplaceInterceptor::CommandReplaceInterceptor(CommandReplace pair, twin::Frame replacement,
                                                     Layer layer)
    : pair_(pair), replacement_(std::move(replacement)), layer_(layer) {}

relay::ForwardDecision CommandReplaceInterceptor::on_frame(const twin::Frame& frame) {
    if (applied() || frame.raw.size() < twin::kMinFrameLength) return relay::Pass{};
    if (derive_state_id(frame.raw) != pair_.from) return relay::Pass{};
    twin::Frame out = replacement_;
    out.direction = frame.direction;
    if (layer_ == Layer::Mac) {
        std::copy(frame.raw.end() - twin::kChecksumLength, frame.raw.end(),
                  out.raw.end() - twin::kChecksumLength);
    }
    mark_applied(FuzzAction{pair_, layer_, EncryptionPhase::AfterEncryption}, frame.timestamp_ns);
    return relay::ReplaceFrame{std::move(out)};
}

TwinCommandTarget::TwinCommandTarget(TwinTargetOptions options, twin::VulnerabilityProfile profile)
    : options_(std::move(options)), profile_(std::move(profile)) {
    if (options_.rnti_spread == 0) options_.rnti_spread = 1;
}

twin::HandshakeResult TwinCommandTarget::run(twin::Interceptor& interceptor,
                                             std::uint64_t attempt_seed) const {
    twin::TwinConfig cfg = options_.twin;
    cfg.seed = attempt_seed;
    if (options_.rnti_spread > 1) {
        Rng rng(derive_seed(attempt_seed, 0x4e71));
        cfg.rnti = static_cast<std::uint16_t>(cfg.rnti + rng.below(options_.rnti_spread));
    }
    if (options_.socket) return twin::run_socket_handshake(cfg, profile_, interceptor, *options_.socket);
    return twin::run_handshake(cfg, profile_, interceptor);
}

ConnectionTrace TwinCommandTarget::bootstrap() {
    twin::Interceptor identity;
    twin::TwinConfig cfg = options_.twin;
    auto res = twin::run_handshake(cfg, profile_, identity);
    pool_.observe(res.trace);
    if (pool_.empty()) throw Error(ErrorKind::EmptyPool, "observation run produced no frames");
    return res.trace;
}

bool TwinCommandTarget::channel_selected(twin::PhysicalChannel ch) const {
    return options_.channels.empty() ||
           std::find(options_.channels.begin(), options_.channels.end(), ch) != options_.channels.end();
}

std::vector<StateId> TwinCommandTarget::commands() const {
    std::vector<StateId> out;
    for (auto s : pool_.states())
        if (channel_selected(physical_channel_of(s))) out.push_back(s);
    return out;
}

bool TwinCommandTarget::allowed(StateId from, StateId to) const {
    if (from == to) return false;
    const auto a = physical_channel_of(from);
    return a == physical_channel_of(to) && channel_selected(a);
}

AttemptResult TwinCommandTarget::attempt(const CommandReplace& pair, std::uint64_t attempt_seed) {
    const auto* entry = pool_.find(pair.to);
    if (!entry) throw Error(ErrorKind::EmptyPool, "no recorded frame for " + to_string(pair.to));
    CommandReplaceInterceptor icpt(pair, entry->frame, options_.layer);
    auto res = run(icpt, attempt_seed);
    AttemptResult out;
    out.applied = icpt.applied().has_value();
    out.outcome = res.trace.outcome;
    if (out.applied) pool_.mark_applied(pair);
    out.trace = std::move(res.trace);
    return out;
}

std::vector<StateId> CommandSpaceTarget::make_commands(std::size_t n) {
    std::vector<StateId> out;
    out.reserve(n);
    const auto ch = static_cast<std::uint8_t>(twin::Channel::DCCH_DL);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(make_state_id(ch, static_cast<std::uint8_t>(0x40 + (i >> 8)),
                                    static_cast<std::uint8_t>(i & 0xFF), 0x46));
    }
    return out;
}

CommandSpaceTarget::CommandSpaceTarget(std::size_t n, twin::VulnerabilityProfile profile)
    : commands_(make_commands(n)), profile_(std::move(profile)) {}

AttemptResult CommandSpaceTarget::attempt(const CommandReplace& pair, std::uint64_t) {
    AttemptResult out;
    out.applied = true;
    out.outcome = profile_.contains(pair.from, pair.to) ? Outcome::Failed : Outcome::Success;
    return out;
}

}  // namespace fuzztwin::engine
