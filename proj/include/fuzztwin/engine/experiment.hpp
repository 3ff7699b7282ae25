#pragma once

#include <cstdint>
#include <vector>

#include "fuzztwin/common/execution.hpp"
#include "fuzztwin/engine/syal.hpp"
#include "fuzztwin/twin/profile.hpp"

namespace fuzztwin::engine {

/// Scaled strategy comparison on the abstract command space.
struct ExperimentConfig {
    std::size_t commands = 30;
    std::size_t vulnerable_pairs = 12;
    twin::Clustering clustering = twin::Clustering::RowClustered;
    std::size_t seeds = 20;
    std::uint64_t base_seed = 1;
    SyalParams params;
    std::size_t prior_pairs = 2;  // known vulnerabilities handed to the seeded variant
    std::size_t first_k = 5;      // target for the cases-to-first-k measurement
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::size_t random_to_all = 0;
    std::size_t syal_to_all = 0;
    std::size_t syal_to_first_k = 0;
    std::size_t prior_to_first_k = 0;
    std::vector<std::size_t> random_curve;
    std::vector<std::size_t> syal_curve;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<SeedRun> runs;
    double median_random_to_all = 0;
    double median_syal_to_all = 0;
    double median_syal_to_first_k = 0;
    double median_prior_to_first_k = 0;

    double efficiency_ratio() const { return median_syal_to_all / median_random_to_all; }
    double prior_reduction() const { return 1.0 - median_prior_to_first_k / median_syal_to_first_k; }
};

double median(std::vector<double> values);

/// One seed: profile, random run, SyAL run, and the first-k runs with and
/// without prior knowledge.
SeedRun run_seed(const ExperimentConfig& config, std::size_t seed_index);

ExperimentReport run_comparison(const ExperimentConfig& config, Execution exec = Execution::Parallel);

/// Mean of the curves at each case index up to `length`; a curve that ended
/// early contributes its final value.
std::vector<double> mean_curve(const std::vector<std::vector<std::size_t>>& curves, std::size_t length);

struct SweepRow {
    double alpha = 0;
    double ratio = 0;
    double median_to_all = 0;
    double mean_to_all = 0;
    std::size_t max_to_all = 0;
    std::size_t case_space = 0;
    bool all_terminated = true;
};

std::vector<SweepRow> hyper_sweep(const ExperimentConfig& config, const std::vector<double>& alphas,
                                  const std::vector<double>& ratios, Execution exec = Execution::Parallel);

}  // namespace fuzztwin::engine
