#include "fuzztwin/engine/campaign.hpp"

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"
#include "fuzztwin/common/trace_codec.hpp"

namespace fuzztwin::engine {

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::Lal: return "lal";
        case Strategy::Syal: return "syal";
        case Strategy::Soal: return "soal";
        case Strategy::Random: return "random";
    }
    return "lal";
}

std::optional<Strategy> strategy_from_string(std::string_view s) noexcept {
    if (s == "lal") return Strategy::Lal;
    if (s == "syal") return Strategy::Syal;
    if (s == "soal") return Strategy::Soal;
    if (s == "random") return Strategy::Random;
    return std::nullopt;
}

std::optional<std::size_t> CampaignResult::cases_to_find(std::size_t k) const {
    if (k == 0) return 0;
    for (std::size_t i = 0; i < found_curve.size(); ++i)
        if (found_curve[i] >= k) return i + 1;
    return std::nullopt;
}

namespace {

// Shared bookkeeping for one case of a command-level campaign.
class Recorder {
public:
    Recorder(CampaignResult& result, const CampaignOptions& options, std::optional<std::size_t> known)
        : result_(result), options_(options), known_(known) {}

    bool record(const FuzzAction& action, AttemptResult& attempt) {
        const std::size_t index = ++result_.cases_run;
        const bool vulnerable = attempt.applied && attempt.outcome == Outcome::Failed;
        if (vulnerable) {
            Finding f;
            f.action = action;
            f.case_index = index;
            if (attempt.trace) {
                f.trace_id = trace_id(*attempt.trace);
                f.note = std::string("failed: ") + std::string(to_string(attempt.trace->reason));
            }
            result_.vulnerabilities.push_back(std::move(f));
        }
        result_.found_curve.push_back(result_.vulnerabilities.size());
        if (options_.on_attempt) options_.on_attempt(AttemptRecord{index, action, attempt, vulnerable});
        if (options_.keep_traces && attempt.trace) result_.traces.push_back(std::move(*attempt.trace));
        return !finished();
    }

    bool finished() const {
        const auto found = result_.vulnerabilities.size();
        if (options_.budget && result_.cases_run >= options_.budget) return true;
        if (options_.cancel && options_.cancel->load()) return true;
        if (options_.stop_after_found && found >= *options_.stop_after_found) return true;
        if (options_.stop_when_all_known_found && known_ && found >= *known_) return true;
        return false;
    }

private:
    CampaignResult& result_;
    const CampaignOptions& options_;
    std::optional<std::size_t> known_;
};

ProbabilityMatrix matrix_for(const CommandTarget& target, double p0) {
    return ProbabilityMatrix(target.commands(), p0,
                             [&target](StateId a, StateId b) { return target.allowed(a, b); });
}

}  // namespace

CampaignResult lal_campaign(CandidatePool& pool, CommandTarget& target, const CampaignOptions& options,
                            std::uint64_t seed) {
    CampaignResult result;
    result.strategy = Strategy::Lal;
    result.seed = seed;
    Recorder rec(result, options, target.known_vulnerabilities());
    const auto schedule = lal_schedule(pool, seed);
    for (std::size_t i = 0; i < schedule.size() && !rec.finished(); ++i) {
        const auto& pair = schedule[i];
        if (pool.is_applied(pair) || !target.allowed(pair.from, pair.to)) continue;
        auto attempt = target.attempt(pair, derive_seed(seed, i));
        pool.mark_applied(pair);
        const FuzzAction action{pair, target.layer(), EncryptionPhase::AfterEncryption};
        if (!rec.record(action, attempt)) break;
    }
    return result;
}

CampaignResult syal_campaign(CommandTarget& target, const SyalParams& params,
                             const CampaignOptions& options, std::uint64_t seed,
                             const std::vector<CommandReplace>& prior) {
    params.validate();
    CampaignResult result;
    result.strategy = Strategy::Syal;
    result.seed = seed;
    auto m = matrix_for(target, params.p0);
    for (const auto& pair : prior) {
        const auto a = m.index_of(pair.from), b = m.index_of(pair.to);
        if (!a || !b) throw Error(ErrorKind::InvalidArgument, "prior pair outside the command set");
        syal_update(m, *a, *b, Outcome::Failed, params);
    }
    Rng rng(seed);
    Recorder rec(result, options, target.known_vulnerabilities());
    std::size_t i = 0;
    while (m.exist_fuzzing() && !rec.finished()) {
        const auto [a, b] = syal_select_pair(m, rng);
        m.mark_tested(a, b);
        const CommandReplace pair{m.states()[a], m.states()[b]};
        auto attempt = target.attempt(pair, derive_seed(seed, i++));
        if (attempt.applied) syal_update(m, a, b, attempt.outcome, params);
        const FuzzAction action{pair, target.layer(), EncryptionPhase::AfterEncryption};
        if (!rec.record(action, attempt)) break;
    }
    result.matrix = std::move(m);
    return result;
}

CampaignResult random_campaign(CommandTarget& target, const CampaignOptions& options, std::uint64_t seed) {
    CampaignResult result;
    result.strategy = Strategy::Random;
    result.seed = seed;
    auto m = matrix_for(target, 1.0);
    Rng rng(seed);
    Recorder rec(result, options, target.known_vulnerabilities());
    std::size_t i = 0;
    while (m.exist_fuzzing() && !rec.finished()) {
        const auto [a, b] = uniform_select_pair(m, rng);
        m.mark_tested(a, b);
        const CommandReplace pair{m.states()[a], m.states()[b]};
        auto attempt = target.attempt(pair, derive_seed(seed, i++));
        const FuzzAction action{pair, target.layer(), EncryptionPhase::AfterEncryption};
        if (!rec.record(action, attempt)) break;
    }
    return result;
}

SoalResult soal_campaign(const TwinCommandTarget& target, const std::vector<FuzzAction>& actions,
                         const CampaignOptions& options, std::uint64_t seed) {
    SoalResult out;
    auto& result = out.campaign;
    result.strategy = Strategy::Soal;
    result.seed = seed;
    {
        twin::Interceptor identity;
        out.baseline_service = target.run(identity, derive_seed(seed, ~0ULL)).trace.service_type;
    }
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (options.budget && result.cases_run >= options.budget) break;
        if (options.cancel && options.cancel->load()) break;
        BitFuzzInterceptor icpt(actions[i]);
        auto res = target.run(icpt, derive_seed(seed, i));
        SoalCase c;
        c.action = actions[i];
        c.trace = std::move(res.trace);
        const bool applied = icpt.applied().has_value();
        if (c.trace.outcome == Outcome::Failed) {
            c.vulnerable = applied;
            c.note = std::string("failed: ") + std::string(to_string(c.trace.reason));
        } else if (c.trace.service_type != out.baseline_service) {
            c.vulnerable = applied;
            c.note = "service " +
                     std::string(out.baseline_service ? twin::to_string(*out.baseline_service) : "-") +
                     " -> " + std::string(c.trace.service_type ? twin::to_string(*c.trace.service_type) : "-");
        } else {
            c.note = "successful";
        }
        const std::size_t index = ++result.cases_run;
        if (c.vulnerable) {
            result.vulnerabilities.push_back(Finding{c.action, trace_id(c.trace), index, c.note});
        }
        result.found_curve.push_back(result.vulnerabilities.size());
        if (options.on_attempt) {
            AttemptResult ar{c.trace.outcome, applied, c.trace};
            options.on_attempt(AttemptRecord{index, c.action, ar, c.vulnerable});
        }
        if (options.keep_traces) result.traces.push_back(c.trace);
        out.cases.push_back(std::move(c));
        if (options.stop_after_found && result.vulnerabilities.size() >= *options.stop_after_found) break;
    }
    return out;
}

}  // namespace fuzztwin::engine
