#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fuzztwin/common/execution.hpp"
#include "fuzztwin/predict/dataset.hpp"
#include "fuzztwin/predict/lstm.hpp"

namespace fuzztwin::predict {

/// Sgd is plain gradient descent. Adam uses the usual moment constants
/// (0.9, 0.999, 1e-8).
enum class Optimizer : std::uint8_t { Sgd, Adam };

std::string_view to_string(Optimizer o) noexcept;
std::optional<Optimizer> optimizer_from_string(std::string_view s) noexcept;

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t epochs = 30;
    std::size_t batches_per_epoch = 10;
    double test_fraction = 0.2;
    std::size_t runs = 1;
    std::uint64_t seed = 1;
    std::size_t embed_dim = 16;
    std::size_t hidden_dim = 32;
    double clip_norm = 5.0;
    double threshold = 0.5;
    Optimizer optimizer = Optimizer::Adam;

    /// Throws Error(InvalidArgument).
    void validate() const;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    bool operator==(const RocPoint&) const = default;
};

struct RocResult {
    std::vector<RocPoint> roc;
    double auc = 0.0;
};

/// Threshold sweep over the distinct scores, highest first, with the
/// trapezoid area. Throws Error(SingleClass).
RocResult roc_and_auc(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::vector<RocPoint> roc;
    double auc = 0.0;
    double mean_detection_time = 0.0;  // seconds, over test samples
    double mean_lead_time = 0.0;       // seconds, over failed test samples
    /// Share of correctly predicted failed test traces whose detection
    /// precedes the outcome strictly.
    double early_detection_fraction = 0.0;
    std::size_t true_positives = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t runs = 0;
    std::vector<double> epoch_loss;  // mean training loss after each epoch (first run)
};

struct TrainResult {
    LstmModel model;
    Vocabulary vocab;
    EvalReport report;
};

/// Throws Error(SingleClass) and Error(InvalidArgument) for fewer than 20 samples.
TrainResult lstm_train(std::span<const SequenceSample> samples, const Vocabulary& vocab, const TrainConfig& config,
                       Execution exec = Execution::Serial);

TrainResult lstm_train(std::span<const ConnectionTrace> traces, const Cutoff& cutoff, const TrainConfig& config,
                       Execution exec = Execution::Serial);

/// Score a trace prefix; states outside the vocabulary map to the unknown slot.
double predict_failure(const LstmModel& model, const Vocabulary& vocab, const ConnectionTrace& trace,
                       const Cutoff& cutoff);

struct SweepEntry {
    Cutoff cutoff;
    bool skipped = false;  // nothing trainable survived the cutoff
    std::size_t samples = 0;
    std::size_t empty_samples = 0;  // traces with no state before the cutoff
    double accuracy = 0.0;
    double auc = 0.0;
    double mean_detection_time = 0.0;
    double mean_lead_time = 0.0;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    /// Cutoff index with the largest accuracy gain over its predecessor.
    std::optional<std::size_t> sharp_rise;
    bool accuracy_monotone = false;
};

/// Trains one model per cutoff with the same seed. Throws Error(InvalidArgument) if empty.
SweepReport cutoff_sweep(std::span<const ConnectionTrace> traces, std::span<const Cutoff> cutoffs,
                         const TrainConfig& config, Execution exec = Execution::Parallel);

}  // namespace fuzztwin::predict
