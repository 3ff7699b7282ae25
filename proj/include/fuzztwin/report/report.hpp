#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fuzztwin/analysis/graph.hpp"
#include "fuzztwin/engine/campaign.hpp"
#include "fuzztwin/predict/dataset.hpp"
#include "fuzztwin/store/store.hpp"

namespace fuzztwin::report {

std::string hex_id(std::uint64_t id);

std::string campaign_json(const engine::CampaignResult& result);
/// Human-readable; contains nothing that varies between identical runs.
std::string campaign_summary(const engine::CampaignResult& result);
std::string soal_json(const engine::SoalResult& result);

/// Analyzer output for `traces`; a well-formed empty report when there is
/// nothing to analyse.
std::string risk_json(std::span<const ConnectionTrace> traces, const analysis::EvalOptions& options);

/// Transaction graph with high-risk edges drawn red and marked `risk=high`.
std::string risk_dot(std::span<const ConnectionTrace> traces, std::size_t max_success_occurrences = 1);

/// Linear and exponential fits of the cumulative failure count over trace
/// order. Rows are omitted when a fit is impossible.
std::string curve_fit_csv(std::span<const std::size_t> found_curve);

std::vector<std::size_t> failure_curve(std::span<const ConnectionTrace> traces);

struct ReportOptions {
    std::set<std::string> formats = {"json", "dot", "csv"};
    std::optional<std::filesystem::path> model;
    predict::Cutoff cutoff = predict::Cutoff::Steps(10);
    analysis::EvalOptions eval;
};

/// Writes risk_report.json, transactions.dot, curve_fit.csv and, when a
/// model is given and present, predictor_report.json. Returns the paths.
std::vector<std::filesystem::path> write_reports(const store::CampaignStore& store,
                                                 const std::filesystem::path& dir, const ReportOptions& options);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fuzztwin::report
