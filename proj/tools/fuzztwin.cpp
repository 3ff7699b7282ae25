#include <algorithm>
#include <atomic>
#include <cctype>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/trace_codec.hpp"
#include "fuzztwin/engine/campaign.hpp"
#include "fuzztwin/engine/experiment.hpp"
#include "fuzztwin/engine/soal.hpp"
#include "fuzztwin/predict/model_io.hpp"
#include "fuzztwin/predict/train.hpp"
#include "fuzztwin/report/report.hpp"
#include "fuzztwin/store/store.hpp"
#include "fuzztwin/twin/handshake.hpp"
#include "fuzztwin/twin/profile.hpp"
#include "fuzztwin/twin/socket_handshake.hpp"

namespace fs = std::filesystem;
using namespace fuzztwin;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPortBind = 3;
constexpr int kExitStore = 4;
constexpr int kExitInterrupted = 130;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// Accepts RRCSetupRequest, rrc_setup_request and rrcsetuprequest.
std::optional<twin::MsgType> parse_msg_type(const std::string& name) {
    std::string key;
    for (char c : name)
        if (c != '_' && c != '-') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto t : twin::kAllMsgTypes)
        if (lower(std::string(twin::to_string(t))) == key) return t;
    return std::nullopt;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---- shared flag groups -------------------------------------------------

struct TwinFlags {
    int ue_identity = 0;
    int cause = 6;
    int srb_id = 1;
    int sr_config = 32;
    int max_retx = 8;
    double rto_ms = 250;
    double timeout_ms = 2000;
    bool socket = false;
    relay::RelayConfig ports;
};

void add_twin_flags(CLI::App* app, TwinFlags& f) {
    app->add_option("--ue-identity", f.ue_identity, "ue-Identity sent in RRCSetupRequest")->check(CLI::Range(0, 255));
    app->add_option("--cause", f.cause, "establishmentCause (4 bits)")->check(CLI::Range(0, 15));
    app->add_option("--srb-id", f.srb_id, "srb identity granted in RRCSetup")->check(CLI::Range(0, 255));
    app->add_option("--sr-config", f.sr_config, "sr-ConfigIndex in RRCReconfiguration")->check(CLI::Range(0, 157));
    app->add_option("--max-retx", f.max_retx, "UE retransmissions before giving up")->check(CLI::Range(0, 1000));
    app->add_option("--rto-ms", f.rto_ms, "UE retransmission timeout")->check(CLI::PositiveNumber);
    app->add_option("--timeout-ms", f.timeout_ms, "connection timeout")->check(CLI::PositiveNumber);
    app->add_flag("--socket", f.socket, "run attempts over loopback TCP through the relay ports");
    app->add_option("--ue-listen", f.ports.ue_listen_port, "relay port the UE sends to");
    app->add_option("--gnb-forward", f.ports.gnb_forward_port, "gNB port the relay forwards uplink to");
    app->add_option("--gnb-listen", f.ports.gnb_listen_port, "relay port the gNB sends to");
    app->add_option("--ue-forward", f.ports.ue_forward_port, "UE port the relay forwards downlink to");
}

twin::TwinConfig make_twin(const TwinFlags& f, std::uint64_t seed) {
    twin::TwinConfig c;
    c.ue_identity = static_cast<std::uint8_t>(f.ue_identity);
    c.establishment_cause = static_cast<std::uint8_t>(f.cause);
    c.srb_id = static_cast<std::uint8_t>(f.srb_id);
    c.sr_config_index = static_cast<std::uint8_t>(f.sr_config);
    c.max_retransmissions = f.max_retx;
    c.retransmit_timeout_ns = static_cast<std::int64_t>(f.rto_ms * 1e6);
    c.connection_timeout_ns = static_cast<std::int64_t>(f.timeout_ms * 1e6);
    c.seed = seed;
    if (f.socket) f.ports.validate();
    return c;
}

store::CampaignStore open_read_only(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorKind::Io, "store not found: " + path.string());
    return store::CampaignStore::open(path, {.read_only = true, .create = false, .sync = false});
}

std::vector<ConnectionTrace> traces_of(const store::CampaignStore& s) {
    std::vector<ConnectionTrace> out;
    for (const auto& t : s.traces()) out.push_back(t.trace);
    return out;
}

void require_parent(const fs::path& p, const char* what) {
    const auto parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
    if (!fs::is_directory(parent)) throw ConfigError(std::string(what) + " directory does not exist: " + parent.string());
}

predict::Cutoff parse_cutoff(const std::string& s) {
    const auto c = predict::cutoff_from_string(s);
    if (!c) throw ConfigError("bad cutoff '" + s + "' (use steps:N or duration:T)");
    return *c;
}

std::uint64_t parse_trace_id(const std::string& s) {
    std::size_t used = 0;
    std::uint64_t id = 0;
    try {
        id = std::stoull(s, &used, 16);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError("bad trace id '" + s + "' (16 hex digits)");
    return id;
}

void print_trace(const ConnectionTrace& t) {
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& s = t.steps[i];
        std::printf("%3zu  %10.3f ms  %-8s %s\n", i + 1, static_cast<double>(s.time_ns) / 1e6,
                    std::string(to_string(s.direction)).c_str(), to_string(s.state).c_str());
    }
    std::printf("outcome: %s", std::string(to_string(t.outcome)).c_str());
    if (t.outcome == Outcome::Failed) std::printf(" (%s)", std::string(to_string(t.reason)).c_str());
    std::printf(" at %.3f ms", static_cast<double>(t.outcome_time_ns) / 1e6);
    if (t.service_type) std::printf(", service %s", std::string(twin::to_string(*t.service_type)).c_str());
    if (t.fuzz_action) std::printf(", fuzz %s", describe(*t.fuzz_action).c_str());
    std::printf("\n");
}

// ---- twin-run ------------------------------------------------------------

struct DropDownlink : twin::Interceptor {
    relay::ForwardDecision on_frame(const twin::Frame& f) override {
        if (f.direction == Direction::Downlink) return relay::Drop{};
        return relay::Pass{};
    }
};

struct TwinRunArgs {
    TwinFlags twin;
    std::uint64_t seed = 1;
    bool drop_downlink = false;
    std::string store;
    std::string profile;
};

twin::VulnerabilityProfile load_profile_opt(const std::string& path) {
    if (path.empty()) return {};
    if (!fs::exists(path)) throw ConfigError("profile not found: " + path);
    return twin::load_profile(path);
}

int cmd_twin_run(const TwinRunArgs& a) {
    const auto cfg = make_twin(a.twin, a.seed);
    const auto profile = load_profile_opt(a.profile);
    if (!a.store.empty()) require_parent(a.store, "store");
    std::unique_ptr<twin::Interceptor> icpt =
        a.drop_downlink ? std::make_unique<DropDownlink>() : std::make_unique<twin::Interceptor>();
    const auto res = a.twin.socket ? twin::run_socket_handshake(cfg, profile, *icpt, a.twin.ports)
                                   : twin::run_handshake(cfg, profile, *icpt);
    print_trace(res.trace);
    if (!a.store.empty()) {
        auto st = store::CampaignStore::open(a.store);
        std::printf("trace %s\n", report::hex_id(st.record_trace(res.trace)).c_str());
    }
    return 0;
}

// ---- campaign ------------------------------------------------------------

struct CampaignArgs {
    std::string knowledge = "black_box";
    std::string strategy;
    double alpha = 0.5;
    double ratio = 0.1;
    double p0 = 0.1;
    std::string scope = "row_column";
    std::size_t budget = 0;
    std::uint64_t seed = 1;
    std::string store;
    std::string out;
    std::string profile;
    std::size_t vulnerable_pairs = 0;
    std::string clustering = "row_clustered";
    std::string layer = "rrc";
    std::string channels;
    std::string target = "all";
    std::string phase = "before";
    int rnti_spread = 1;
    TwinFlags twin;
};

engine::Strategy choose_strategy(const CampaignArgs& a) {
    if (!a.strategy.empty()) {
        const auto s = engine::strategy_from_string(a.strategy);
        if (!s) throw ConfigError("unknown strategy '" + a.strategy + "'");
        return *s;
    }
    if (a.knowledge == "black_box") return engine::Strategy::Lal;
    if (a.knowledge == "grey_box") return engine::Strategy::Syal;
    if (a.knowledge == "white_box") return engine::Strategy::Soal;
    throw ConfigError("unknown knowledge level '" + a.knowledge + "'");
}

std::vector<twin::PhysicalChannel> parse_channels(const std::string& s) {
    std::vector<twin::PhysicalChannel> out;
    for (const auto& item : split_list(s)) {
        const auto k = lower(item);
        if (k == "pusch") out.push_back(twin::PhysicalChannel::PUSCH);
        else if (k == "pdsch") out.push_back(twin::PhysicalChannel::PDSCH);
        else if (k == "pdcch") out.push_back(twin::PhysicalChannel::PDCCH);
        else throw ConfigError("unknown physical channel '" + item + "'");
    }
    return out;
}

int cmd_campaign(const CampaignArgs& a) {
    // Everything that can be checked is checked before the first attempt.
    const auto strategy = choose_strategy(a);
    const auto layer = layer_from_string(a.layer);
    if (!layer) throw ConfigError("unknown layer '" + a.layer + "'");
    const auto scope = engine::update_scope_from_string(a.scope);
    if (!scope) throw ConfigError("unknown update scope '" + a.scope + "'");
    const auto clustering = twin::clustering_from_string(a.clustering);
    if (!clustering) throw ConfigError("unknown clustering '" + a.clustering + "'");
    if (a.phase != "before" && a.phase != "after" && a.phase != "both") {
        throw ConfigError("phase must be before, after or both");
    }
    engine::SyalParams params;
    params.alpha = a.alpha;
    params.ratio = a.ratio;
    params.p0 = a.p0;
    params.scope = *scope;
    params.validate();
    std::vector<engine::FieldSpec> specs;
    if (strategy == engine::Strategy::Soal) {
        if (a.target == "all") {
            specs = engine::reference_field_domains();
        } else {
            const auto type = parse_msg_type(a.target);
            if (!type) throw ConfigError("unknown message type '" + a.target + "'");
            specs = engine::reference_field_domains(*type);
            if (specs.empty()) throw ConfigError("no fuzzable fields on '" + a.target + "'");
        }
    }
    require_parent(a.store, "store");
    const fs::path out_dir = a.out.empty() ? fs::path(a.store).parent_path() / (fs::path(a.store).stem().string() + "_campaign")
                                           : fs::path(a.out);
    auto base_profile = load_profile_opt(a.profile);

    engine::TwinTargetOptions topts;
    topts.twin = make_twin(a.twin, a.seed);
    topts.layer = *layer;
    topts.channels = parse_channels(a.channels);
    topts.rnti_spread = static_cast<std::uint16_t>(std::max(1, a.rnti_spread));
    if (a.twin.socket) topts.socket = a.twin.ports;

    auto store = store::CampaignStore::open(a.store);
    engine::TwinCommandTarget target(topts, base_profile);
    store.record_trace(target.bootstrap());
    if (a.vulnerable_pairs > 0 && a.profile.empty()) {
        const auto cmds = target.commands();
        engine::TwinCommandTarget seeded(
            topts, twin::generate_profile(cmds, a.vulnerable_pairs, *clustering, derive_seed(a.seed, 0x9f0f11e)));
        seeded.bootstrap();
        target = std::move(seeded);
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    engine::CampaignOptions copts;
    copts.budget = a.budget;
    copts.keep_traces = false;
    copts.cancel = &g_stop;
    copts.on_attempt = [&](const engine::AttemptRecord& r) {
        if (r.result.trace) store.record_trace(*r.result.trace);
    };

    engine::CampaignResult result;
    std::optional<engine::SoalResult> soal;
    switch (strategy) {
        case engine::Strategy::Lal:
            result = engine::lal_campaign(target.pool(), target, copts, a.seed);
            break;
        case engine::Strategy::Syal:
            result = engine::syal_campaign(target, params, copts, a.seed);
            break;
        case engine::Strategy::Random:
            result = engine::random_campaign(target, copts, a.seed);
            break;
        case engine::Strategy::Soal: {
            const bool before = a.phase != "after", after = a.phase != "before";
            soal = engine::soal_campaign(target, engine::soal_enumerate(specs, before, after), copts, a.seed);
            result = soal->campaign;
            break;
        }
    }
    if (result.matrix) {
        const auto& m = *result.matrix;
        for (std::size_t i = 0; i < m.size(); ++i) {
            for (std::size_t j = 0; j < m.size(); ++j) {
                if (!m.tested(i, j)) continue;
                store::ProbabilityRow row{m.states()[i], m.states()[j], m.p(i, j), std::nullopt};
                bool failed = false;
                for (const auto& f : result.vulnerabilities) {
                    const auto* cr = std::get_if<CommandReplace>(&f.action.kind);
                    failed |= cr && cr->from == row.from && cr->to == row.to;
                }
                row.completion_rate = failed ? 0.0 : 1.0;
                store.set_probability(row);
            }
        }
    }

    fs::create_directories(out_dir);
    report::write_text(out_dir / "campaign_result.json", soal ? report::soal_json(*soal) : report::campaign_json(result));
    const auto summary = report::campaign_summary(result);
    report::write_text(out_dir / "summary.txt", summary);
    std::fputs(summary.c_str(), stdout);
    if (g_stop) {
        std::fprintf(stderr, "interrupted after %zu cases; store flushed\n", result.cases_run);
        return kExitInterrupted;
    }
    return 0;
}

// ---- analyze / report / export -----------------------------------------

struct AnalyzeArgs {
    std::string store;
    std::string mode = "resubstitution";
    double train_fraction = 0.5;
    std::size_t tolerance = 1;
    std::uint64_t seed = 1;
    std::string out;
};

analysis::EvalOptions eval_options(const AnalyzeArgs& a) {
    analysis::EvalOptions o;
    if (a.mode == "resubstitution") o.mode = analysis::EvalMode::Resubstitution;
    else if (a.mode == "split") o.mode = analysis::EvalMode::Split;
    else throw ConfigError("mode must be resubstitution or split");
    if (!(a.train_fraction > 0 && a.train_fraction < 1)) throw ConfigError("train-fraction must be in (0, 1)");
    o.train_fraction = a.train_fraction;
    o.max_success_occurrences = a.tolerance;
    o.seed = a.seed;
    return o;
}

int cmd_analyze(const AnalyzeArgs& a) {
    const auto opts = eval_options(a);
    const auto st = open_read_only(a.store);
    const auto traces = traces_of(st);
    const auto text = report::risk_json(traces, opts);
    if (a.out.empty()) {
        std::fputs(text.c_str(), stdout);
        return 0;
    }
    fs::create_directories(a.out);
    report::write_text(fs::path(a.out) / "risk_report.json", text);
    report::write_text(fs::path(a.out) / "transactions.dot", report::risk_dot(traces, opts.max_success_occurrences));
    std::printf("wrote %s\n", a.out.c_str());
    return 0;
}

struct ReportArgs {
    AnalyzeArgs analyze;
    std::string formats = "json,dot,csv";
    std::string model;
    std::string cutoff = "steps:10";
};

int cmd_report(const ReportArgs& a) {
    report::ReportOptions o;
    o.eval = eval_options(a.analyze);
    o.cutoff = parse_cutoff(a.cutoff);
    o.formats.clear();
    for (const auto& f : split_list(a.formats)) {
        if (f != "json" && f != "dot" && f != "csv") throw ConfigError("unknown report format '" + f + "'");
        o.formats.insert(f);
    }
    const fs::path store_path(a.analyze.store);
    o.model = a.model.empty() ? fs::path(store_path.string() + ".model") : fs::path(a.model);
    const auto st = open_read_only(store_path);
    const fs::path dir = a.analyze.out.empty()
                             ? store_path.parent_path() / (store_path.stem().string() + "_report")
                             : fs::path(a.analyze.out);
    for (const auto& p : report::write_reports(st, dir, o)) std::printf("wrote %s\n", p.string().c_str());
    return 0;
}

struct ExportArgs {
    std::string store;
    std::string format = "csv";
    std::string out;
};

int cmd_export(const ExportArgs& a) {
    const auto fmt = store::export_format_from_string(a.format);
    if (!fmt) throw ConfigError("format must be csv, json or dot");
    if (!a.out.empty()) require_parent(a.out, "output");
    const auto st = open_read_only(a.store);
    const auto text = st.export_as(*fmt);
    if (a.out.empty()) std::fputs(text.c_str(), stdout);
    else report::write_text(a.out, text);
    return 0;
}

// ---- predictor -------------------------------------------------------------

struct TrainArgs {
    std::string store;
    std::string model;
    std::string report;
    std::string cutoff = "steps:10";
    std::string sweep;
    predict::TrainConfig cfg;
    std::string optimizer = "adam";
};

int cmd_train(TrainArgs a) {
    const auto cutoff = parse_cutoff(a.cutoff);
    const auto opt = predict::optimizer_from_string(a.optimizer);
    if (!opt) throw ConfigError("optimizer must be sgd or adam");
    a.cfg.optimizer = *opt;
    a.cfg.validate();
    std::vector<predict::Cutoff> sweep;
    for (const auto& s : split_list(a.sweep)) sweep.push_back(parse_cutoff(s));
    const fs::path model = a.model.empty() ? fs::path(a.store + ".model") : fs::path(a.model);
    require_parent(model, "model");
    const fs::path rep = a.report.empty() ? fs::path(model.string() + ".report.json") : fs::path(a.report);

    const auto st = open_read_only(a.store);
    const auto traces = traces_of(st);
    if (traces.empty()) throw Error(ErrorKind::EmptyStore, "store has no traces");
    const auto result = predict::lstm_train(traces, cutoff, a.cfg, Execution::Parallel);
    predict::save_model(model, result.model, result.vocab);
    report::write_text(rep, predict::report_to_json(result.report, cutoff, a.cfg));
    std::printf("model %s\nreport %s\naccuracy %.4f auc %.4f mean lead time %.3f s\n", model.string().c_str(),
                rep.string().c_str(), result.report.accuracy, result.report.auc, result.report.mean_lead_time);
    if (!sweep.empty()) {
        const auto s = predict::cutoff_sweep(traces, sweep, a.cfg, Execution::Parallel);
        const fs::path sp = model.string() + ".sweep.json";
        report::write_text(sp, predict::sweep_to_json(s));
        std::printf("sweep %s\n", sp.string().c_str());
    }
    return 0;
}

struct PredictArgs {
    std::string model;
    std::string store;
    std::string trace_id;
    std::string cutoff = "steps:10";
    bool live = false;
    std::uint64_t seed = 1;
    bool drop_downlink = false;
    std::string profile;
    TwinFlags twin;
};

int cmd_predict(const PredictArgs& a) {
    const auto cutoff = parse_cutoff(a.cutoff);
    if (!fs::exists(a.model)) throw ConfigError("model not found: " + a.model);
    if (a.live == !a.trace_id.empty()) throw ConfigError("give exactly one of --live or --trace-id");
    ConnectionTrace trace;
    if (a.live) {
        const auto profile = load_profile_opt(a.profile);
        std::unique_ptr<twin::Interceptor> icpt =
            a.drop_downlink ? std::make_unique<DropDownlink>() : std::make_unique<twin::Interceptor>();
        const auto cfg = make_twin(a.twin, a.seed);
        trace = (a.twin.socket ? twin::run_socket_handshake(cfg, profile, *icpt, a.twin.ports)
                               : twin::run_handshake(cfg, profile, *icpt))
                    .trace;
    } else {
        const auto id = parse_trace_id(a.trace_id);
        if (a.store.empty()) throw ConfigError("--trace-id needs --store");
        const auto st = open_read_only(a.store);
        const auto* t = st.find(id);
        if (!t) throw ConfigError("trace " + a.trace_id + " not in store");
        trace = t->trace;
    }
    const auto [model, vocab] = predict::load_model(a.model);
    const auto sample = predict::make_sample(trace, vocab, cutoff);
    const double p = predict::lstm_forward(model, sample.states);
    std::printf("failure probability %.6f -> %s\n", p, p >= 0.5 ? "failed" : "success");
    std::printf("prefix %zu states, detected at %.3f ms; actual %s at %.3f ms\n", sample.states.size(),
                sample.detection_time * 1e3, std::string(to_string(trace.outcome)).c_str(), sample.outcome_time * 1e3);
    return 0;
}

// ---- replay ----------------------------------------------------------------

struct ReplayArgs {
    std::string store;
    std::string trace_id;
    std::uint64_t seed = 1;
    std::string profile;
    std::string layer = "rrc";
    TwinFlags twin;
};

int cmd_replay(const ReplayArgs& a) {
    const auto id = parse_trace_id(a.trace_id);
    const auto layer = layer_from_string(a.layer);
    if (!layer) throw ConfigError("unknown layer '" + a.layer + "'");
    engine::TwinTargetOptions topts;
    topts.twin = make_twin(a.twin, a.seed);
    topts.layer = *layer;
    if (a.twin.socket) topts.socket = a.twin.ports;
    const auto profile = load_profile_opt(a.profile);
    const auto st = open_read_only(a.store);
    const auto* stored = st.find(id);
    if (!stored) throw ConfigError("trace " + a.trace_id + " not in store");
    const auto& orig = stored->trace;

    engine::TwinCommandTarget target(topts, profile);
    target.bootstrap();
    ConnectionTrace again;
    if (!orig.fuzz_action) {
        twin::Interceptor identity;
        again = target.run(identity, a.seed).trace;
    } else if (const auto* cr = std::get_if<CommandReplace>(&orig.fuzz_action->kind)) {
        auto r = target.attempt(*cr, a.seed);
        if (!r.trace) throw Error(ErrorKind::InvalidArgument, "replacement state not observable on this twin");
        again = std::move(*r.trace);
    } else {
        engine::BitFuzzInterceptor icpt(*orig.fuzz_action);
        again = target.run(icpt, a.seed).trace;
    }
    print_trace(again);
    const bool same_outcome = again.outcome == orig.outcome && again.reason == orig.reason;
    const bool same_states = again.states() == orig.states();
    std::printf("outcome %s, state sequence %s\n", same_outcome ? "reproduced" : "differs",
                same_states ? "identical" : "differs");
    return same_outcome ? 0 : kExitFailure;
}

// ---- experiment ------------------------------------------------------------

struct ExperimentArgs {
    engine::ExperimentConfig cfg;
    std::string clustering = "row_clustered";
    std::string scope = "row_column";
    bool sweep = false;
    bool serial = false;
    std::string out;
};

int cmd_experiment(ExperimentArgs a) {
    const auto clustering = twin::clustering_from_string(a.clustering);
    if (!clustering) throw ConfigError("unknown clustering '" + a.clustering + "'");
    const auto scope = engine::update_scope_from_string(a.scope);
    if (!scope) throw ConfigError("unknown update scope '" + a.scope + "'");
    a.cfg.clustering = *clustering;
    a.cfg.params.scope = *scope;
    a.cfg.params.validate();
    const auto exec = a.serial ? Execution::Serial : Execution::Parallel;
    const auto rep = engine::run_comparison(a.cfg, exec);
    json runs = json::array();
    for (const auto& r : rep.runs) {
        runs.push_back({{"seed", r.seed}, {"random_to_all", r.random_to_all}, {"syal_to_all", r.syal_to_all},
                        {"syal_to_first_k", r.syal_to_first_k}, {"prior_to_first_k", r.prior_to_first_k}});
    }
    json j{{"commands", a.cfg.commands},
           {"vulnerable_pairs", a.cfg.vulnerable_pairs},
           {"clustering", twin::to_string(a.cfg.clustering)},
           {"seeds", a.cfg.seeds},
           {"alpha", a.cfg.params.alpha},
           {"ratio", a.cfg.params.ratio},
           {"p0", a.cfg.params.p0},
           {"median_random_to_all", rep.median_random_to_all},
           {"median_syal_to_all", rep.median_syal_to_all},
           {"efficiency_ratio", rep.efficiency_ratio()},
           {"median_syal_to_first_k", rep.median_syal_to_first_k},
           {"median_prior_to_first_k", rep.median_prior_to_first_k},
           {"prior_reduction", rep.prior_reduction()},
           {"runs", runs}};
    std::printf("random median %.1f, syal median %.1f, ratio %.3f; first-%zu %.1f -> %.1f with prior (%.0f%% fewer)\n",
                rep.median_random_to_all, rep.median_syal_to_all, rep.efficiency_ratio(), a.cfg.first_k,
                rep.median_syal_to_first_k, rep.median_prior_to_first_k, 100 * rep.prior_reduction());
    std::string sweep_csv;
    if (a.sweep) {
        sweep_csv = "alpha,ratio,median_to_all,mean_to_all,max_to_all,case_space,all_terminated\n";
        const auto rows = engine::hyper_sweep(a.cfg, {0.1, 0.5, 1, 2}, {0.1, 0.5, 0.9}, exec);
        for (const auto& r : rows) {
            char line[160];
            std::snprintf(line, sizeof line, "%g,%g,%g,%g,%zu,%zu,%s\n", r.alpha, r.ratio, r.median_to_all,
                          r.mean_to_all, r.max_to_all, r.case_space, r.all_terminated ? "true" : "false");
            sweep_csv += line;
        }
        std::fputs(sweep_csv.c_str(), stdout);
    }
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        report::write_text(fs::path(a.out) / "experiment.json", j.dump(2) + "\n");
        std::vector<std::vector<std::size_t>> rc, sc;
        std::size_t len = 0;
        for (const auto& r : rep.runs) {
            rc.push_back(r.random_curve);
            sc.push_back(r.syal_curve);
            len = std::max({len, r.random_curve.size(), r.syal_curve.size()});
        }
        const auto mr = engine::mean_curve(rc, len), ms = engine::mean_curve(sc, len);
        std::string curves = "case,random_mean_found,syal_mean_found\n";
        for (std::size_t i = 0; i < len; ++i) {
            char line[96];
            std::snprintf(line, sizeof line, "%zu,%.6g,%.6g\n", i + 1, mr[i], ms[i]);
            curves += line;
        }
        report::write_text(fs::path(a.out) / "curves.csv", curves);
        if (a.sweep) report::write_text(fs::path(a.out) / "sweep.csv", sweep_csv);
    }
    return 0;
}

// ---- wiring ----------------------------------------------------------------

std::string env_name(const std::string& long_name) {
    std::string out = "FUZZTWIN_";
    for (char c : long_name) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

// Every long option gets a FUZZTWIN_<NAME> environment twin.
void add_env_twins(CLI::App* app) {
    for (auto* opt : app->get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help" || names.front() == "help-all" || names.front() == "config") continue;
        opt->envname(env_name(names.front()));
    }
    for (auto* sub : app->get_subcommands({})) add_env_twins(sub);
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::PortBindFailure: return kExitPortBind;
        case ErrorKind::CorruptRecord:
        case ErrorKind::UnsupportedFormat:
        case ErrorKind::Io: return kExitStore;
        case ErrorKind::InvalidArgument:
        case ErrorKind::FieldOutOfRange:
        case ErrorKind::UnknownField: return kExitConfig;
        default: return kExitFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuzztwin: stateful fuzzing of a simulated RRC handshake through a relay"};
    app.set_config("--config", "", "config file of key = value lines, one [section] per subcommand");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");

    TwinRunArgs tr;
    auto* twin_run = app.add_subcommand("twin-run", "run one handshake through the relay and print its trace");
    add_twin_flags(twin_run, tr.twin);
    twin_run->add_option("--seed", tr.seed, "seed for link jitter");
    twin_run->add_flag("--drop-downlink", tr.drop_downlink, "relay drops every downlink frame");
    twin_run->add_option("--store", tr.store, "append the trace to this campaign store");
    twin_run->add_option("--profile", tr.profile, "vulnerability profile JSON");

    CampaignArgs ca;
    auto* campaign = app.add_subcommand("campaign", "run a fuzzing campaign and record it");
    campaign->add_option("--knowledge", ca.knowledge, "black_box (lal), grey_box (syal) or white_box (soal)")
        ->check(CLI::IsMember({"black_box", "grey_box", "white_box"}));
    campaign->add_option("--strategy", ca.strategy, "override: lal, syal, soal or random");
    campaign->add_option("--alpha", ca.alpha, "SyAL failure gain");
    campaign->add_option("--ratio", ca.ratio, "SyAL success damping");
    campaign->add_option("--p0", ca.p0, "SyAL initial priority");
    campaign->add_option("--scope", ca.scope, "SyAL update scope: row_column or entry");
    campaign->add_option("--budget", ca.budget, "maximum cases, 0 for the whole case space");
    campaign->add_option("--seed", ca.seed, "campaign seed");
    campaign->add_option("--store", ca.store, "campaign store file")->required();
    campaign->add_option("--out", ca.out, "directory for campaign_result.json and summary.txt");
    campaign->add_option("--profile", ca.profile, "vulnerability profile JSON");
    campaign->add_option("--vulnerable-pairs", ca.vulnerable_pairs, "generate a profile with this many pairs");
    campaign->add_option("--clustering", ca.clustering, "generated profile shape");
    campaign->add_option("--layer", ca.layer, "command replacement layer: rrc or mac");
    campaign->add_option("--channels", ca.channels, "physical channels to fuzz, e.g. pdsch,pdcch");
    campaign->add_option("--target", ca.target, "white box: message type to fuzz, or all");
    campaign->add_option("--phase", ca.phase, "white box: before, after or both");
    campaign->add_option("--rnti-spread", ca.rnti_spread, "draw each attempt's RNTI from this many values");
    add_twin_flags(campaign, ca.twin);

    AnalyzeArgs an;
    auto add_analyze = [](CLI::App* sub, AnalyzeArgs& a) {
        sub->add_option("--store", a.store, "campaign store file")->required();
        sub->add_option("--mode", a.mode, "resubstitution or split");
        sub->add_option("--train-fraction", a.train_fraction, "split mode training share");
        sub->add_option("--tolerance", a.tolerance, "successful occurrences a high-risk edge may have");
        sub->add_option("--seed", a.seed, "split seed");
        sub->add_option("--out", a.out, "output directory");
    };
    auto* analyze = app.add_subcommand("analyze", "extract high-risk states and transactions");
    add_analyze(analyze, an);

    ReportArgs rp;
    auto* rep = app.add_subcommand("report", "write analyzer, graph, curve-fit and predictor reports");
    add_analyze(rep, rp.analyze);
    rep->add_option("--formats", rp.formats, "comma list of json, dot, csv");
    rep->add_option("--model", rp.model, "predictor model (default <store>.model)");
    rep->add_option("--cutoff", rp.cutoff, "predictor cutoff");

    ExportArgs ex;
    auto* exp = app.add_subcommand("export", "export the store as csv, json or dot");
    exp->add_option("--store", ex.store, "campaign store file")->required();
    exp->add_option("--format", ex.format, "csv, json or dot");
    exp->add_option("--out", ex.out, "output file (default stdout)");

    TrainArgs ta;
    auto* train = app.add_subcommand("train-predictor", "train the LSTM failure predictor on stored traces");
    train->add_option("--store", ta.store, "campaign store file")->required();
    train->add_option("--model", ta.model, "model output (default <store>.model)");
    train->add_option("--report", ta.report, "EvalReport JSON output");
    train->add_option("--cutoff", ta.cutoff, "steps:N or duration:SECONDS");
    train->add_option("--sweep", ta.sweep, "comma list of cutoffs to sweep as well");
    train->add_option("--lr", ta.cfg.learning_rate, "learning rate");
    train->add_option("--optimizer", ta.optimizer, "adam or sgd");
    train->add_option("--epochs", ta.cfg.epochs, "epochs");
    train->add_option("--batches", ta.cfg.batches_per_epoch, "batches per epoch");
    train->add_option("--test-fraction", ta.cfg.test_fraction, "held-out share");
    train->add_option("--runs", ta.cfg.runs, "runs to average");
    train->add_option("--seed", ta.cfg.seed, "training seed");

    PredictArgs pa;
    auto* pred = app.add_subcommand("predict", "score a stored or live trace prefix");
    pred->add_option("--model", pa.model, "model file")->required();
    pred->add_option("--store", pa.store, "campaign store file");
    pred->add_option("--trace-id", pa.trace_id, "stored trace id (16 hex digits)");
    pred->add_flag("--live", pa.live, "run a fresh handshake and score it");
    pred->add_option("--cutoff", pa.cutoff, "steps:N or duration:SECONDS");
    pred->add_option("--seed", pa.seed, "seed for the live run");
    pred->add_flag("--drop-downlink", pa.drop_downlink, "live run: relay drops every downlink frame");
    pred->add_option("--profile", pa.profile, "live run: vulnerability profile JSON");
    add_twin_flags(pred, pa.twin);

    ReplayArgs ra;
    auto* replay = app.add_subcommand("replay", "re-run a stored trace's fuzz action and compare");
    replay->add_option("--store", ra.store, "campaign store file")->required();
    replay->add_option("--trace-id", ra.trace_id, "stored trace id (16 hex digits)")->required();
    replay->add_option("--seed", ra.seed, "attempt seed");
    replay->add_option("--profile", ra.profile, "vulnerability profile JSON");
    replay->add_option("--layer", ra.layer, "rrc or mac");
    add_twin_flags(replay, ra.twin);

    ExperimentArgs ea;
    auto* experiment = app.add_subcommand("experiment", "scaled SyAL vs random comparison on a command space");
    experiment->add_option("--commands", ea.cfg.commands, "commands in the space");
    experiment->add_option("--pairs", ea.cfg.vulnerable_pairs, "vulnerable pairs");
    experiment->add_option("--clustering", ea.clustering, "row_clustered, column_clustered or uniform");
    experiment->add_option("--seeds", ea.cfg.seeds, "seeds");
    experiment->add_option("--seed", ea.cfg.base_seed, "base seed");
    experiment->add_option("--alpha", ea.cfg.params.alpha, "SyAL failure gain");
    experiment->add_option("--ratio", ea.cfg.params.ratio, "SyAL success damping");
    experiment->add_option("--p0", ea.cfg.params.p0, "SyAL initial priority");
    experiment->add_option("--scope", ea.scope, "row_column or entry");
    experiment->add_option("--prior-pairs", ea.cfg.prior_pairs, "known pairs for the seeded variant");
    experiment->add_option("--first-k", ea.cfg.first_k, "k for cases-to-first-k");
    experiment->add_flag("--sweep", ea.sweep, "also run the alpha x ratio sweep");
    experiment->add_flag("--serial", ea.serial, "run seeds on one thread");
    experiment->add_option("--out", ea.out, "output directory");

    add_env_twins(&app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*twin_run) return cmd_twin_run(tr);
        if (*campaign) return cmd_campaign(ca);
        if (*analyze) return cmd_analyze(an);
        if (*rep) return cmd_report(rp);
        if (*exp) return cmd_export(ex);
        if (*train) return cmd_train(ta);
        if (*pred) return cmd_predict(pa);
        if (*replay) return cmd_replay(ra);
        if (*experiment) return cmd_experiment(ea);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitFailure;
}
