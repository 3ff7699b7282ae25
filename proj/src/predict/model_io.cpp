#include "fuzztwin/predict/model_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "fuzztwin/common/bytes.hpp"
#include "fuzztwin/common/error.hpp"

namespace fuzztwin::predict {

namespace {

using nlohmann::json;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

json roc_json(const std::vector<RocPoint>& roc) {
    json a = json::array();
    for (const auto& p : roc) a.push_back({p.fpr, p.tpr});
    return a;
}

}  // namespace

std::filesystem::path vocab_path(const std::filesystem::path& model_path) {
    return model_path.string() + ".vocab.json";
}

void save_model(const std::filesystem::path& path, const LstmModel& m, const Vocabulary& vocab) {
    if (vocab.size() != m.vocab_size) throw Error(ErrorKind::InvalidArgument, "vocabulary size mismatch");
    ByteWriter w;
    w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kModelMagic), sizeof kModelMagic));
    w.u32(static_cast<std::uint32_t>(m.vocab_size));
    w.u32(static_cast<std::uint32_t>(m.embed_dim));
    w.u32(static_cast<std::uint32_t>(m.hidden_dim));
    for (const auto* v : {&m.embedding, &m.W, &m.b, &m.w_out})
        for (double x : *v) w.f64(x);
    w.f64(m.b_out);
    write_file(path, w.take());

    json states = json::array();
    for (auto s : vocab.states()) states.push_back(to_string(s));
    const std::string text = json{{"unknown_index", 0}, {"states", states}}.dump(2) + "\n";
    write_file(vocab_path(path), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::pair<LstmModel, Vocabulary> load_model(const std::filesystem::path& path) {
    const auto data = read_file(path);
    if (data.size() < sizeof kModelMagic || std::memcmp(data.data(), kModelMagic, 6) != 0) {
        throw Error(ErrorKind::CorruptRecord, "not a model file: " + path.string());
    }
    if (std::memcmp(data.data(), kModelMagic, sizeof kModelMagic) != 0) {
        throw Error(ErrorKind::UnsupportedFormat, "unsupported model version in " + path.string());
    }
    const std::span<const std::uint8_t> all(data);
    ByteReader r(all.subspan(sizeof kModelMagic));
    const std::size_t vocab = r.u32(), embed = r.u32(), hidden = r.u32();
    const std::uint64_t expected = (static_cast<std::uint64_t>(vocab) * embed + 4ull * hidden * (embed + hidden) +
                                    4ull * hidden + hidden + 1) * 8;
    if (vocab == 0 || embed == 0 || hidden == 0 || r.remaining() != expected) {
        throw Error(ErrorKind::CorruptRecord, "model dimensions do not match payload");
    }
    LstmModel m = LstmModel::zeros(vocab, embed, hidden);
    for (auto* v : {&m.embedding, &m.W, &m.b, &m.w_out})
        for (double& x : *v) x = r.f64();
    m.b_out = r.f64();

    const auto text = read_file(vocab_path(path));
    std::vector<StateId> states;
    try {
        const json j = json::parse(text.begin(), text.end());
        for (const auto& s : j.at("states")) {
            const auto id = parse_state_id(s.get<std::string>());
            if (!id) throw Error(ErrorKind::CorruptRecord, "bad state id in vocabulary");
            states.push_back(*id);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::CorruptRecord, std::string("vocabulary: ") + e.what());
    }
    Vocabulary v(std::move(states));
    if (v.size() != vocab) throw Error(ErrorKind::CorruptRecord, "vocabulary size does not match model");
    return {std::move(m), std::move(v)};
}

std::string report_to_json(const EvalReport& r, const Cutoff& cutoff, const TrainConfig& c) {
    json j{{"cutoff", cutoff.describe()},
           {"accuracy", r.accuracy},
           {"precision", r.precision},
           {"recall", r.recall},
           {"auc", r.auc},
           {"roc", roc_json(r.roc)},
           {"mean_detection_time_s", r.mean_detection_time},
           {"mean_lead_time_s", r.mean_lead_time},
           {"early_detection_fraction", r.early_detection_fraction},
           {"train_size", r.train_size},
           {"test_size", r.test_size},
           {"runs", r.runs},
           {"epoch_loss", r.epoch_loss},
           {"config",
            {{"learning_rate", c.learning_rate},
             {"optimizer", to_string(c.optimizer)},
             {"epochs", c.epochs},
             {"batches_per_epoch", c.batches_per_epoch},
             {"test_fraction", c.test_fraction},
             {"seed", c.seed},
             {"embed_dim", c.embed_dim},
             {"hidden_dim", c.hidden_dim}}}};
    return j.dump(2) + "\n";
}

std::string sweep_to_json(const SweepReport& r) {
    json rows = json::array();
    for (const auto& e : r.entries) {
        rows.push_back({{"cutoff", e.cutoff.describe()},
                        {"skipped", e.skipped},
                        {"samples", e.samples},
                        {"empty_samples", e.empty_samples},
                        {"accuracy", e.accuracy},
                        {"auc", e.auc},
                        {"mean_detection_time_s", e.mean_detection_time},
                        {"mean_lead_time_s", e.mean_lead_time}});
    }
    json j{{"entries", rows}, {"accuracy_monotone", r.accuracy_monotone}};
    j["sharp_rise"] = r.sharp_rise ? json(r.entries[*r.sharp_rise].cutoff.describe()) : json(nullptr);
    return j.dump(2) + "\n";
}

}  // namespace fuzztwin::predict
