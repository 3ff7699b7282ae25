#include <cstdio>
#include <json.hpp>
#include <set>
#include <sstream>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/trace_codec.hpp"
#include "fuzztwin/store/store.hpp"

namespace fuzztwin::store {

namespace {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 16);
    if (used != s.size()) throw Error(ErrorKind::InvalidArgument, "bad hex id '" + s + "'");
    return v;
}

std::string hex_bytes(const std::vector<std::uint8_t>& b) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (auto x : b) {
        out.push_back(digits[x >> 4]);
        out.push_back(digits[x & 0xF]);
    }
    return out;
}

std::vector<std::uint8_t> parse_hex_bytes(const std::string& s) {
    if (s.size() % 2) throw Error(ErrorKind::InvalidArgument, "odd-length hex string");
    std::vector<std::uint8_t> out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(std::stoul(s.substr(2 * i, 2), nullptr, 16));
    }
    return out;
}

StateId parse_id(const std::string& s) {
    auto id = parse_state_id(s);
    if (!id) throw Error(ErrorKind::InvalidArgument, "bad state id '" + s + "'");
    return *id;
}

json action_json(const FuzzAction& a) {
    json j;
    j["layer"] = to_string(a.layer);
    j["phase"] = to_string(a.phase);
    if (const auto* c = std::get_if<CommandReplace>(&a.kind)) {
        j["kind"] = "command";
        j["from"] = to_string(c->from);
        j["to"] = to_string(c->to);
    } else {
        const auto& b = std::get<BitFuzz>(a.kind);
        j["kind"] = "bit";
        j["msg_type"] = twin::to_string(b.msg_type);
        j["field"] = b.field;
        j["value"] = b.value;
    }
    return j;
}

template <typename T>
T require(std::optional<T> v, const char* what) {
    if (!v) throw Error(ErrorKind::InvalidArgument, std::string("bad ") + what);
    return *v;
}

FuzzAction action_from_json(const json& j) {
    FuzzAction a;
    a.layer = require(layer_from_string(j.at("layer").get<std::string>()), "layer");
    a.phase = require(phase_from_string(j.at("phase").get<std::string>()), "phase");
    if (j.at("kind") == "command") {
        a.kind = CommandReplace{parse_id(j.at("from")), parse_id(j.at("to"))};
    } else {
        a.kind = BitFuzz{require(twin::msg_type_from_string(j.at("msg_type").get<std::string>()), "msg_type"),
                         j.at("field").get<std::string>(), j.at("value").get<std::uint32_t>()};
    }
    return a;
}

json trace_json(const StoredTrace& t) {
    json j;
    j["trace_id"] = hex64(t.trace_id);
    json steps = json::array();
    for (const auto& s : t.trace.steps) {
        steps.push_back({{"state", to_string(s.state)},
                         {"time_ns", s.time_ns},
                         {"direction", to_string(s.direction)},
                         {"raw", hex_bytes(s.raw)}});
    }
    j["steps"] = std::move(steps);
    j["fuzz_action"] = t.trace.fuzz_action ? action_json(*t.trace.fuzz_action) : json(nullptr);
    j["outcome"] = to_string(t.trace.outcome);
    j["reason"] = to_string(t.trace.reason);
    j["service_type"] = t.trace.service_type ? json(twin::to_string(*t.trace.service_type)) : json(nullptr);
    j["fuzz_time_ns"] = t.trace.fuzz_time_ns;
    j["outcome_time_ns"] = t.trace.outcome_time_ns;
    return j;
}

ConnectionTrace trace_from_json(const json& j) {
    ConnectionTrace t;
    for (const auto& s : j.at("steps")) {
        TraceStep step;
        step.state = parse_id(s.at("state"));
        step.time_ns = s.at("time_ns").get<std::int64_t>();
        step.direction = s.at("direction") == "uplink" ? Direction::Uplink : Direction::Downlink;
        step.raw = parse_hex_bytes(s.at("raw"));
        t.steps.push_back(std::move(step));
    }
    if (!j.at("fuzz_action").is_null()) t.fuzz_action = action_from_json(j["fuzz_action"]);
    t.outcome = require(outcome_from_string(j.at("outcome").get<std::string>()), "outcome");
    t.reason = require(failure_reason_from_string(j.at("reason").get<std::string>()), "reason");
    if (!j.at("service_type").is_null()) {
        t.service_type =
            require(twin::service_type_from_string(j["service_type"].get<std::string>()), "service_type");
    }
    t.fuzz_time_ns = j.at("fuzz_time_ns").get<std::int64_t>();
    t.outcome_time_ns = j.at("outcome_time_ns").get<std::int64_t>();
    return t;
}

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string CampaignStore::export_as(ExportFormat format) const {
    switch (format) {
        case ExportFormat::Csv: return export_csv();
        case ExportFormat::Json: return export_json();
        case ExportFormat::Dot: return export_dot();
    }
    throw Error(ErrorKind::UnsupportedFormat, "unknown export format");
}

std::string CampaignStore::export_csv() const {
    std::ostringstream os;
    os << "trace_id,outcome,fuzz_kind,fuzz_from,fuzz_to,fuzz_time_ns,outcome_time_ns,num_states,state_sequence\n";
    for (const auto& t : traces_) {
        const auto& tr = t.trace;
        std::string kind = "none", from, to;
        if (tr.fuzz_action) {
            if (const auto* c = std::get_if<CommandReplace>(&tr.fuzz_action->kind)) {
                kind = "command";
                from = to_string(c->from);
                to = to_string(c->to);
            } else {
                const auto& b = std::get<BitFuzz>(tr.fuzz_action->kind);
                kind = "bit";
                from = std::string(twin::to_string(b.msg_type));
                to = b.field + "=" + std::to_string(b.value);
            }
        }
        os << hex64(t.trace_id) << ',' << to_string(tr.outcome) << ',' << kind << ',' << from << ',' << to
           << ',' << tr.fuzz_time_ns << ',' << tr.outcome_time_ns << ',' << tr.steps.size() << ',';
        for (std::size_t i = 0; i < tr.steps.size(); ++i) os << (i ? " " : "") << to_string(tr.steps[i].state);
        os << '\n';
    }
    return os.str();
}

std::string CampaignStore::export_json() const {
    json doc;
    doc["version"] = kLogVersion;
    doc["states"] = json::array();
    for (const auto& [id, s] : states_) {
        doc["states"].push_back({{"state_id", to_string(id)},
                                 {"channel", s.channel},
                                 {"first_bytes", hex_bytes({s.first_bytes[0], s.first_bytes[1], s.first_bytes[2]})},
                                 {"description", s.description}});
    }
    doc["actions"] = json::array();
    for (const auto& a : actions_) {
        doc["actions"].push_back({{"action_id", a.action_id},
                                  {"state_id", to_string(a.state_id)},
                                  {"raw_bytes", hex_bytes(a.raw_bytes)},
                                  {"channel", a.channel},
                                  {"physical_channel", twin::to_string(a.physical_channel)},
                                  {"message_time_ns", a.message_time_ns},
                                  {"trace_id", hex64(a.trace_id)}});
    }
    doc["traces"] = json::array();
    for (const auto& t : traces_) doc["traces"].push_back(trace_json(t));
    doc["probabilities"] = json::array();
    for (const auto& [key, p] : probabilities_) {
        doc["probabilities"].push_back({{"from", to_string(p.from)},
                                        {"to", to_string(p.to)},
                                        {"probability", p.probability},
                                        {"completion_rate", p.completion_rate ? json(*p.completion_rate) : json(nullptr)}});
    }
    return doc.dump(1) + "\n";
}

std::string CampaignStore::export_dot() const {
    std::map<std::pair<StateId, StateId>, std::pair<std::size_t, std::size_t>> edges;  // fail, succ
    std::set<StateId> vertices;
    for (const auto& t : traces_) {
        const auto& steps = t.trace.steps;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            vertices.insert(steps[i].state);
            if (i + 1 == steps.size()) continue;
            auto& e = edges[{steps[i].state, steps[i + 1].state}];
            (t.trace.outcome == Outcome::Failed ? e.first : e.second)++;
        }
    }
    std::ostringstream os;
    os << "digraph transactions {\n";
    for (auto v : vertices) {
        const auto label = to_string(v) + (describe_state(v).empty() ? "" : "\\n" + describe_state(v));
        os << "  " << dot_quote(to_string(v)) << " [label=" << dot_quote(label) << "];\n";
    }
    for (const auto& [k, c] : edges) {
        os << "  " << dot_quote(to_string(k.first)) << " -> " << dot_quote(to_string(k.second))
           << " [label=\"fail:" << c.first << " succ:" << c.second << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

CampaignStore CampaignStore::import_json(std::string_view text, const std::optional<std::filesystem::path>& path) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("import: ") + e.what());
    }
    if (doc.value("version", 0u) != kLogVersion) throw Error(ErrorKind::UnsupportedFormat, "import: bad version");
    CampaignStore s = path ? open(*path) : CampaignStore();
    if (!s.empty()) throw Error(ErrorKind::InvalidArgument, "import target store is not empty");
    try {
        std::map<StateId, StateRow> states;
        for (const auto& j : doc.at("states")) {
            StateRow r;
            r.state_id = parse_id(j.at("state_id"));
            r.channel = j.at("channel").get<std::uint8_t>();
            const auto fb = parse_hex_bytes(j.at("first_bytes"));
            if (fb.size() != 3) throw Error(ErrorKind::InvalidArgument, "first_bytes must be 3 bytes");
            std::copy(fb.begin(), fb.end(), r.first_bytes);
            r.description = j.at("description").get<std::string>();
            states.emplace(r.state_id, std::move(r));
        }
        std::map<std::uint64_t, std::vector<ActionRow>> actions;
        for (const auto& j : doc.at("actions")) {
            ActionRow a;
            a.action_id = j.at("action_id").get<std::uint64_t>();
            a.state_id = parse_id(j.at("state_id"));
            a.raw_bytes = parse_hex_bytes(j.at("raw_bytes"));
            a.channel = j.at("channel").get<std::uint8_t>();
            const auto phy = j.at("physical_channel").get<std::string>();
            a.physical_channel = phy == "PUSCH"   ? twin::PhysicalChannel::PUSCH
                                 : phy == "PDSCH" ? twin::PhysicalChannel::PDSCH
                                                  : twin::PhysicalChannel::PDCCH;
            a.message_time_ns = j.at("message_time_ns").get<std::int64_t>();
            a.trace_id = parse_hex64(j.at("trace_id"));
            actions[a.trace_id].push_back(std::move(a));
        }
        std::set<StateId> seen;
        for (const auto& j : doc.at("traces")) {
            Commit c;
            c.trace.trace_id = parse_hex64(j.at("trace_id"));
            c.trace.trace = trace_from_json(j);
            if (trace_id(c.trace.trace) != c.trace.trace_id) {
                throw Error(ErrorKind::InvalidArgument, "trace id does not match its content");
            }
            c.actions = std::move(actions[c.trace.trace_id]);
            for (const auto& a : c.actions) {
                if (!seen.insert(a.state_id).second) continue;
                const auto it = states.find(a.state_id);
                if (it == states.end()) throw Error(ErrorKind::InvalidArgument, "action references unknown state");
                c.states.push_back(it->second);
            }
            s.commit(c);
        }
        for (const auto& j : doc.at("probabilities")) {
            ProbabilityRow p;
            p.from = parse_id(j.at("from"));
            p.to = parse_id(j.at("to"));
            p.probability = j.at("probability").get<double>();
            if (!j.at("completion_rate").is_null()) p.completion_rate = j["completion_rate"].get<double>();
            s.set_probability(p);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("import: ") + e.what());
    }
    return s;
}

}  // namespace fuzztwin::store
