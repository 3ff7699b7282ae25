#include "fuzztwin/report/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fuzztwin/analysis/curve_fit.hpp"
#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/trace_codec.hpp"
#include "fuzztwin/predict/model_io.hpp"
#include "fuzztwin/predict/train.hpp"

namespace fuzztwin::report {

namespace {

using nlohmann::json;

json finding_json(const engine::Finding& f) {
    return {{"case", f.case_index}, {"action", describe(f.action)}, {"trace_id", hex_id(f.trace_id)}, {"note", f.note}};
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<ConnectionTrace> stored_traces(const store::CampaignStore& s) {
    std::vector<ConnectionTrace> out;
    out.reserve(s.traces().size());
    for (const auto& t : s.traces()) out.push_back(t.trace);
    return out;
}

}  // namespace

std::string hex_id(std::uint64_t id) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id));
    return buf;
}

std::string campaign_json(const engine::CampaignResult& r) {
    json findings = json::array();
    for (const auto& f : r.vulnerabilities) findings.push_back(finding_json(f));
    json j{{"strategy", engine::to_string(r.strategy)},
           {"seed", r.seed},
           {"cases_run", r.cases_run},
           {"vulnerabilities_found", r.vulnerabilities.size()},
           {"vulnerabilities", findings},
           {"found_curve", r.found_curve}};
    const auto all = r.cases_to_find(r.vulnerabilities.size());
    j["cases_to_find_all"] = r.vulnerabilities.empty() || !all ? json(nullptr) : json(*all);
    return j.dump(2) + "\n";
}

std::string campaign_summary(const engine::CampaignResult& r) {
    std::ostringstream os;
    os << "strategy: " << engine::to_string(r.strategy) << "\n"
       << "seed: " << r.seed << "\n"
       << "cases run: " << r.cases_run << "\n"
       << "vulnerabilities: " << r.vulnerabilities.size() << "\n";
    for (const auto& f : r.vulnerabilities) {
        os << "  #" << f.case_index << " " << describe(f.action);
        if (!f.note.empty()) os << " (" << f.note << ")";
        os << "\n";
    }
    return os.str();
}

std::string soal_json(const engine::SoalResult& r) {
    json cases = json::array();
    for (const auto& c : r.cases) {
        cases.push_back({{"action", describe(c.action)},
                         {"outcome", to_string(c.trace.outcome)},
                         {"reason", to_string(c.trace.reason)},
                         {"service_type", c.trace.service_type ? json(twin::to_string(*c.trace.service_type))
                                                                : json(nullptr)},
                         {"vulnerable", c.vulnerable},
                         {"note", c.note}});
    }
    json j = json::parse(campaign_json(r.campaign));
    j["baseline_service"] = r.baseline_service ? json(twin::to_string(*r.baseline_service)) : json(nullptr);
    j["cases"] = cases;
    return j.dump(2) + "\n";
}

std::string risk_json(std::span<const ConnectionTrace> traces, const analysis::EvalOptions& options) {
    std::size_t failed = 0;
    for (const auto& t : traces) failed += t.outcome == Outcome::Failed;
    json j{{"traces", traces.size()}, {"failed_traces", failed}, {"mode", analysis::to_string(options.mode)}};
    json states = json::array(), transactions = json::array();
    if (failed > 0) {
        const auto r = analysis::evaluate(traces, options);
        for (auto s : r.high_risk_states) states.push_back(to_string(s));
        for (const auto& [a, b] : r.high_risk_transactions) transactions.push_back({to_string(a), to_string(b)});
        j["train_size"] = r.train_size;
        j["eval_size"] = r.eval_size;
        j["confusion"] = {{"tp", r.true_positive}, {"fp", r.false_positive}, {"tn", r.true_negative}, {"fn", r.false_negative}};
        j["rule_recall"] = r.rule_recall;
        j["rule_precision"] = r.rule_precision;
    } else {
        j["note"] = traces.empty() ? "empty store" : "no failed traces";
    }
    j["high_risk_states"] = states;
    j["high_risk_transactions"] = transactions;
    return j.dump(2) + "\n";
}

std::string risk_dot(std::span<const ConnectionTrace> traces, std::size_t max_success_occurrences) {
    std::ostringstream os;
    os << "digraph transactions {\n";
    if (!traces.empty()) {
        const auto g = analysis::build_graph(traces, Execution::Serial);
        const auto risky = analysis::high_risk_transactions(g, max_success_occurrences);
        for (auto v : g.vertices) os << "  \"" << to_string(v) << "\";\n";
        for (const auto& [edge, c] : g.edges) {
            os << "  \"" << to_string(edge.first) << "\" -> \"" << to_string(edge.second) << "\" [label=\"fail:"
               << c.failed << " succ:" << c.success << "\"";
            if (risky.contains(edge)) os << ", color=red, risk=high";
            os << "];\n";
        }
    }
    os << "}\n";
    return os.str();
}

std::vector<std::size_t> failure_curve(std::span<const ConnectionTrace> traces) {
    std::vector<std::size_t> out;
    std::size_t found = 0;
    for (const auto& t : traces) {
        found += t.outcome == Outcome::Failed;
        out.push_back(found);
    }
    return out;
}

std::string curve_fit_csv(std::span<const std::size_t> curve) {
    std::string out = "model,a,b,r_squared,points\n";
    std::vector<double> x, y, xp, yp;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        x.push_back(static_cast<double>(i + 1));
        y.push_back(static_cast<double>(curve[i]));
        if (curve[i] > 0) {
            xp.push_back(x.back());
            yp.push_back(y.back());
        }
    }
    auto row = [&](std::span<const double> xs, std::span<const double> ys, analysis::CurveModel m) {
        try {
            const auto f = analysis::fit_curve(xs, ys, m);
            out += std::string(analysis::to_string(m)) + "," + num(f.a) + "," + num(f.b) + "," + num(f.r_squared) +
                   "," + std::to_string(xs.size()) + "\n";
        } catch (const Error&) {
        }
    };
    row(x, y, analysis::CurveModel::Linear);
    row(xp, yp, analysis::CurveModel::Exponential);
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

std::vector<std::filesystem::path> write_reports(const store::CampaignStore& store, const std::filesystem::path& dir,
                                                 const ReportOptions& options) {
    std::filesystem::create_directories(dir);
    const auto traces = stored_traces(store);
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        written.push_back(dir / name);
    };
    if (options.formats.contains("json")) emit("risk_report.json", risk_json(traces, options.eval));
    if (options.formats.contains("dot")) {
        emit("transactions.dot", risk_dot(traces, options.eval.max_success_occurrences));
    }
    if (options.formats.contains("csv")) emit("curve_fit.csv", curve_fit_csv(failure_curve(traces)));
    if (options.model && std::filesystem::exists(*options.model) && options.formats.contains("json")) {
        const auto [model, vocab] = predict::load_model(*options.model);
        json j{{"model", options.model->filename().string()}, {"cutoff", options.cutoff.describe()}};
        std::vector<double> scores;
        std::vector<int> labels;
        std::size_t correct = 0;
        for (const auto& t : traces) {
            try {
                const double p = predict::predict_failure(model, vocab, t, options.cutoff);
                scores.push_back(p);
                labels.push_back(t.outcome == Outcome::Failed ? 1 : 0);
                correct += (p >= 0.5) == (labels.back() == 1);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::EmptySequence) throw;
            }
        }
        j["scored"] = scores.size();
        j["accuracy"] = scores.empty() ? json(nullptr) : json(static_cast<double>(correct) / static_cast<double>(scores.size()));
        try {
            j["auc"] = predict::roc_and_auc(scores, labels).auc;
        } catch (const Error&) {
            j["auc"] = nullptr;
        }
        emit("predictor_report.json", j.dump(2) + "\n");
    }
    return written;
}

}  // namespace fuzztwin::report
