#include "fuzztwin/predict/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"

namespace fuzztwin::predict {

void TrainConfig::validate() const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "test_fraction must be in (0, 1)");
    }
    if (epochs == 0 || batches_per_epoch == 0 || runs == 0 || embed_dim == 0 || hidden_dim == 0) {
        throw Error(ErrorKind::InvalidArgument, "counts must be positive");
    }
    if (!(learning_rate > 0.0) || !(clip_norm > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "learning_rate and clip_norm must be positive");
    }
}

std::string_view to_string(Optimizer o) noexcept { return o == Optimizer::Sgd ? "sgd" : "adam"; }

std::optional<Optimizer> optimizer_from_string(std::string_view s) noexcept {
    if (s == "sgd") return Optimizer::Sgd;
    if (s == "adam") return Optimizer::Adam;
    return std::nullopt;
}

RocResult roc_and_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error(ErrorKind::InvalidArgument, "scores/labels size mismatch");
    const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw Error(ErrorKind::SingleClass, "ROC needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    RocResult out;
    out.roc.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    double area = 0.0;
    for (std::size_t k = 0; k < order.size();) {
        const double s = scores[order[k]];
        for (; k < order.size() && scores[order[k]] == s; ++k) (labels[order[k]] == 1 ? tp : fp)++;
        const RocPoint p{static_cast<double>(fp) / static_cast<double>(neg),
                         static_cast<double>(tp) / static_cast<double>(pos)};
        const auto& q = out.roc.back();
        area += (p.fpr - q.fpr) * (p.tpr + q.tpr) / 2.0;
        out.roc.push_back(p);
    }
    out.auc = area;
    return out;
}

namespace {

struct Split {
    std::vector<std::size_t> train, test;
};

// Stratified so both classes reach the test set.
Split split(std::span<const SequenceSample> samples, double test_fraction, std::uint64_t seed) {
    Rng rng(seed);
    Split out;
    for (int label : {0, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (samples[i].label == label) idx.push_back(i);
        rng.shuffle(std::span(idx));
        auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
        n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
        out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<long>(n_test));
        out.train.insert(out.train.end(), idx.begin() + static_cast<long>(n_test), idx.end());
    }
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.train.begin(), out.train.end());
    return out;
}

// Moment estimates for Adam, flat over the parameter order of LstmModel.
struct AdamState {
    std::vector<double> m, v;
    std::size_t t = 0;
};

void descend(LstmModel& model, LstmGrad& g, const TrainConfig& cfg, AdamState& adam) {
    const double norm = g.norm();
    if (norm > cfg.clip_norm) g.scale(cfg.clip_norm / norm);
    const double lr = cfg.learning_rate;
    if (cfg.optimizer == Optimizer::Sgd) {
        for (std::size_t k = 0; k < model.embedding.size(); ++k) model.embedding[k] -= lr * g.embedding[k];
        for (std::size_t k = 0; k < model.W.size(); ++k) model.W[k] -= lr * g.W[k];
        for (std::size_t k = 0; k < model.b.size(); ++k) model.b[k] -= lr * g.b[k];
        for (std::size_t k = 0; k < model.w_out.size(); ++k) model.w_out[k] -= lr * g.w_out[k];
        model.b_out -= lr * g.b_out;
        return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (adam.m.empty()) {
        adam.m.assign(model.parameter_count(), 0.0);
        adam.v.assign(model.parameter_count(), 0.0);
    }
    ++adam.t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam.t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam.t));
    std::size_t k = 0;
    auto step = [&](double& p, double grad) {
        adam.m[k] = beta1 * adam.m[k] + (1.0 - beta1) * grad;
        adam.v[k] = beta2 * adam.v[k] + (1.0 - beta2) * grad * grad;
        p -= lr * (adam.m[k] / c1) / (std::sqrt(adam.v[k] / c2) + eps);
        ++k;
    };
    for (std::size_t i = 0; i < model.embedding.size(); ++i) step(model.embedding[i], g.embedding[i]);
    for (std::size_t i = 0; i < model.W.size(); ++i) step(model.W[i], g.W[i]);
    for (std::size_t i = 0; i < model.b.size(); ++i) step(model.b[i], g.b[i]);
    for (std::size_t i = 0; i < model.w_out.size(); ++i) step(model.w_out[i], g.w_out[i]);
    step(model.b_out, g.b_out);
}

double mean_loss(const LstmModel& m, std::span<const SequenceSample> samples, std::span<const std::size_t> idx) {
    double sum = 0.0;
    for (auto i : idx) sum += lstm_loss(m, samples[i].states, samples[i].label);
    return sum / static_cast<double>(idx.size());
}

struct RunResult {
    LstmModel model;
    EvalReport report;
};

RunResult train_once(std::span<const SequenceSample> samples, std::size_t vocab_size, const TrainConfig& cfg,
                     std::uint64_t seed) {
    const Split sp = split(samples, cfg.test_fraction, derive_seed(seed, 1));
    RunResult r{LstmModel::random(vocab_size, derive_seed(seed, 2), cfg.embed_dim, cfg.hidden_dim), {}};
    LstmModel& m = r.model;
    LstmGrad grad(m);
    AdamState adam;
    Rng order_rng(derive_seed(seed, 3));
    std::vector<std::size_t> order = sp.train;
    const std::size_t batch = (order.size() + cfg.batches_per_epoch - 1) / cfg.batches_per_epoch;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(std::span(order));
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            grad.clear();
            for (std::size_t k = start; k < end; ++k) {
                lstm_loss_and_grad(m, samples[order[k]].states, samples[order[k]].label, grad);
            }
            grad.scale(1.0 / static_cast<double>(end - start));
            descend(m, grad, cfg, adam);
        }
        r.report.epoch_loss.push_back(mean_loss(m, samples, sp.train));
    }

    auto& rep = r.report;
    rep.train_size = sp.train.size();
    rep.test_size = sp.test.size();
    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0, failed = 0, early = 0;
    double detect = 0.0, lead = 0.0;
    for (auto i : sp.test) {
        const auto& s = samples[i];
        const double p = lstm_forward(m, s.states);
        scores.push_back(p);
        labels.push_back(s.label);
        const bool hit = p >= cfg.threshold;
        detect += s.detection_time;
        if (s.label == 1) {
            ++failed;
            lead += s.outcome_time - s.detection_time;
            if (hit) {
                ++tp;
                if (s.detection_time < s.outcome_time) ++early;
            } else {
                ++fn;
            }
        } else {
            (hit ? fp : tn)++;
        }
    }
    const auto n = static_cast<double>(sp.test.size());
    rep.accuracy = static_cast<double>(tp + tn) / n;
    rep.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    rep.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    auto roc = roc_and_auc(scores, labels);
    rep.roc = std::move(roc.roc);
    rep.auc = roc.auc;
    rep.mean_detection_time = detect / n;
    rep.mean_lead_time = failed ? lead / static_cast<double>(failed) : 0.0;
    rep.early_detection_fraction = tp ? static_cast<double>(early) / static_cast<double>(tp) : 0.0;
    rep.true_positives = tp;
    rep.runs = 1;
    return r;
}

}  // namespace

TrainResult lstm_train(std::span<const SequenceSample> samples, const Vocabulary& vocab, const TrainConfig& config,
                       Execution exec) {
    config.validate();
    std::size_t failed = 0;
    for (const auto& s : samples) failed += s.label == 1;
    if (failed == 0 || failed == samples.size()) throw Error(ErrorKind::SingleClass, "dataset has one class");
    if (samples.size() < 20) throw Error(ErrorKind::InvalidArgument, "dataset needs at least 20 samples");
    if (failed < 2 || samples.size() - failed < 2) {
        throw Error(ErrorKind::SingleClass, "each class needs two samples to split");
    }

    std::vector<RunResult> runs(config.runs);
    const auto n = static_cast<long>(config.runs);
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
    for (long r = 0; r < n; ++r) {
        const std::uint64_t seed = r == 0 ? config.seed : derive_seed(config.seed, 100 + static_cast<std::uint64_t>(r));
        runs[static_cast<std::size_t>(r)] = train_once(samples, vocab.size(), config, seed);
    }

    TrainResult out{std::move(runs[0].model), vocab, runs[0].report};
    if (config.runs > 1) {
        auto& rep = out.report;
        auto avg = [&](double EvalReport::*field) {
            double sum = 0.0;
            for (const auto& r : runs) sum += r.report.*field;
            rep.*field = sum / static_cast<double>(runs.size());
        };
        for (auto f : {&EvalReport::accuracy, &EvalReport::precision, &EvalReport::recall, &EvalReport::auc,
                       &EvalReport::mean_detection_time, &EvalReport::mean_lead_time,
                       &EvalReport::early_detection_fraction}) {
            avg(f);
        }
        rep.runs = runs.size();
    }
    return out;
}

TrainResult lstm_train(std::span<const ConnectionTrace> traces, const Cutoff& cutoff, const TrainConfig& config,
                       Execution exec) {
    const Vocabulary vocab = Vocabulary::build(traces);
    const SampleSet set = make_samples(traces, vocab, cutoff);
    if (set.samples.empty()) {
        throw Error(ErrorKind::EmptySequence, "no samples survive cutoff " + cutoff.describe());
    }
    return lstm_train(set.samples, vocab, config, exec);
}

double predict_failure(const LstmModel& model, const Vocabulary& vocab, const ConnectionTrace& trace,
                       const Cutoff& cutoff) {
    const auto sample = make_sample(trace, vocab, cutoff);
    return lstm_forward(model, sample.states);
}

SweepReport cutoff_sweep(std::span<const ConnectionTrace> traces, std::span<const Cutoff> cutoffs,
                         const TrainConfig& config, Execution exec) {
    if (cutoffs.empty()) throw Error(ErrorKind::InvalidArgument, "no cutoffs given");
    config.validate();
    const Vocabulary vocab = Vocabulary::build(traces);
    SweepReport out;
    out.entries.resize(cutoffs.size());
    const auto n = static_cast<long>(cutoffs.size());
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
    for (long k = 0; k < n; ++k) {
        auto& e = out.entries[static_cast<std::size_t>(k)];
        e.cutoff = cutoffs[static_cast<std::size_t>(k)];
        const SampleSet set = make_samples(traces, vocab, e.cutoff);
        e.samples = set.samples.size();
        e.empty_samples = set.skipped_empty;
        if (set.samples.empty()) {
            e.skipped = true;
            continue;
        }
        TrainResult r;
        try {
            r = lstm_train(set.samples, vocab, config, Execution::Serial);
        } catch (const Error&) {
            e.skipped = true;
            continue;
        }
        e.accuracy = r.report.accuracy;
        e.auc = r.report.auc;
        e.mean_detection_time = r.report.mean_detection_time;
        e.mean_lead_time = r.report.mean_lead_time;
    }

    std::optional<std::size_t> prev;
    double best_gain = -1.0;
    out.accuracy_monotone = true;
    for (std::size_t k = 0; k < out.entries.size(); ++k) {
        if (out.entries[k].skipped) continue;
        if (prev) {
            const double gain = out.entries[k].accuracy - out.entries[*prev].accuracy;
            if (gain < 0) out.accuracy_monotone = false;
            if (gain > best_gain) {
                best_gain = gain;
                out.sharp_rise = k;
            }
        }
        prev = k;
    }
    return out;
}

}  // namespace fuzztwin::predict
