#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include "fuzztwin/predict/dataset.hpp"
#include "fuzztwin/predict/lstm.hpp"
#include "fuzztwin/predict/train.hpp"

namespace fuzztwin::predict {

inline constexpr char kModelMagic[8] = {'F', 'Z', 'L', 'S', 'T', 'M', '1', '\0'};

/// Model file: magic, u32 vocab/embed/hidden (little endian), then the
/// row-major f64 arrays embedding, W, b, w_out and the scalar b_out. The
/// vocabulary goes to `<path>.vocab.json`.
void save_model(const std::filesystem::path& path, const LstmModel& model, const Vocabulary& vocab);

/// Throws Error(CorruptRecord), Error(UnsupportedFormat) or Error(Io).
std::pair<LstmModel, Vocabulary> load_model(const std::filesystem::path& path);

std::filesystem::path vocab_path(const std::filesystem::path& model_path);

std::string report_to_json(const EvalReport& report, const Cutoff& cutoff, const TrainConfig& config);
std::string sweep_to_json(const SweepReport& report);

}  // namespace fuzztwin::predict
