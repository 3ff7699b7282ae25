#include "fuzztwin/engine/experiment.hpp"

#include <algorithm>
#include <numeric>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"
#include "fuzztwin/engine/campaign.hpp"

namespace fuzztwin::engine {

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorKind::EmptyInput, "median of nothing");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

twin::VulnerabilityProfile profile_for(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto commands = CommandSpaceTarget::make_commands(cfg.commands);
    return twin::generate_profile(commands, cfg.vulnerable_pairs, cfg.clustering,
                                  derive_seed(seed, 0x9f0f11e));
}

std::size_t cases_to(const CampaignResult& r, std::size_t k) {
    // Unreached targets count as the whole run.
    return r.cases_to_find(k).value_or(r.cases_run);
}

}  // namespace

SeedRun run_seed(const ExperimentConfig& cfg, std::size_t seed_index) {
    SeedRun run;
    run.seed = derive_seed(cfg.base_seed, seed_index);
    const auto profile = profile_for(cfg, run.seed);
    CommandSpaceTarget target(cfg.commands, profile);
    const std::size_t all = profile.count();
    const std::uint64_t strategy_seed = derive_seed(run.seed, 1);

    CampaignOptions to_all;
    to_all.stop_when_all_known_found = true;
    to_all.keep_traces = false;

    const auto rnd = random_campaign(target, to_all, strategy_seed);
    run.random_to_all = cases_to(rnd, all);
    run.random_curve = rnd.found_curve;

    const auto syal = syal_campaign(target, cfg.params, to_all, strategy_seed);
    run.syal_to_all = cases_to(syal, all);
    run.syal_curve = syal.found_curve;

    CampaignOptions to_k = to_all;
    to_k.stop_after_found = cfg.first_k;
    run.syal_to_first_k = cases_to(syal_campaign(target, cfg.params, to_k, strategy_seed), cfg.first_k);

    // Prior knowledge: a seeded choice of already-known vulnerable pairs.
    std::vector<CommandReplace> known;
    for (const auto& [a, b] : profile.vulnerable_pairs) known.push_back({a, b});
    Rng pick(derive_seed(run.seed, 2));
    pick.shuffle(std::span(known));
    known.resize(std::min(cfg.prior_pairs, known.size()));
    run.prior_to_first_k =
        cases_to(syal_campaign(target, cfg.params, to_k, strategy_seed, known), cfg.first_k);
    return run;
}

ExperimentReport run_comparison(const ExperimentConfig& config, Execution exec) {
    if (config.seeds == 0) throw Error(ErrorKind::InvalidArgument, "need at least one seed");
    config.params.validate();
    ExperimentReport rep;
    rep.config = config;
    rep.runs.resize(config.seeds);
    const auto n = static_cast<long>(config.seeds);
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < n; ++i) rep.runs[static_cast<std::size_t>(i)] = run_seed(config, static_cast<std::size_t>(i));
    } else {
        for (long i = 0; i < n; ++i) rep.runs[static_cast<std::size_t>(i)] = run_seed(config, static_cast<std::size_t>(i));
    }
    std::vector<double> r, s, s5, p5;
    for (const auto& run : rep.runs) {
        r.push_back(static_cast<double>(run.random_to_all));
        s.push_back(static_cast<double>(run.syal_to_all));
        s5.push_back(static_cast<double>(run.syal_to_first_k));
        p5.push_back(static_cast<double>(run.prior_to_first_k));
    }
    rep.median_random_to_all = median(r);
    rep.median_syal_to_all = median(s);
    rep.median_syal_to_first_k = median(s5);
    rep.median_prior_to_first_k = median(p5);
    return rep;
}

std::vector<double> mean_curve(const std::vector<std::vector<std::size_t>>& curves, std::size_t length) {
    std::vector<double> out(length, 0.0);
    if (curves.empty()) return out;
    for (std::size_t i = 0; i < length; ++i) {
        double sum = 0.0;
        for (const auto& c : curves) {
            if (c.empty()) continue;
            sum += static_cast<double>(i < c.size() ? c[i] : c.back());
        }
        out[i] = sum / static_cast<double>(curves.size());
    }
    return out;
}

std::vector<SweepRow> hyper_sweep(const ExperimentConfig& config, const std::vector<double>& alphas,
                                  const std::vector<double>& ratios, Execution exec) {
    std::vector<SweepRow> rows;
    for (double a : alphas)
        for (double r : ratios) rows.push_back(SweepRow{a, r});
    const std::size_t case_space = config.commands * (config.commands - 1);
    const auto total = static_cast<long>(rows.size() * config.seeds);
    std::vector<std::size_t> cases(static_cast<std::size_t>(total), 0);
    std::vector<std::uint8_t> finished(static_cast<std::size_t>(total), 0);

    auto one = [&](long k) {
        const auto cell = static_cast<std::size_t>(k) / config.seeds;
        const auto seed_index = static_cast<std::size_t>(k) % config.seeds;
        ExperimentConfig cfg = config;
        cfg.params.alpha = rows[cell].alpha;
        cfg.params.ratio = rows[cell].ratio;
        const auto seed = derive_seed(cfg.base_seed, seed_index);
        CommandSpaceTarget target(cfg.commands, profile_for(cfg, seed));
        CampaignOptions opt;
        opt.stop_when_all_known_found = true;
        opt.keep_traces = false;
        const auto res = syal_campaign(target, cfg.params, opt, derive_seed(seed, 1));
        cases[static_cast<std::size_t>(k)] = res.cases_run;
        finished[static_cast<std::size_t>(k)] =
            res.vulnerabilities.size() == target.profile().count() && res.cases_run <= case_space;
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long k = 0; k < total; ++k) one(k);
    } else {
        for (long k = 0; k < total; ++k) one(k);
    }

    for (std::size_t c = 0; c < rows.size(); ++c) {
        std::vector<double> v;
        for (std::size_t s = 0; s < config.seeds; ++s) {
            const auto k = c * config.seeds + s;
            v.push_back(static_cast<double>(cases[k]));
            rows[c].max_to_all = std::max(rows[c].max_to_all, cases[k]);
            rows[c].all_terminated = rows[c].all_terminated && finished[k];
        }
        rows[c].median_to_all = median(v);
        rows[c].mean_to_all = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        rows[c].case_space = case_space;
    }
    return rows;
}

}  // namespace fuzztwin::engine
