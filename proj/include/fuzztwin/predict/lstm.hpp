#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fuzztwin::predict {

/// Single-layer LSTM over embedded state indices with a sigmoid readout on
/// the last hidden state. Gate blocks in W and b are ordered i, f, g, o;
/// W is row-major 4H x (embed + hidden), input part first.
struct LstmModel {
    std::size_t vocab_size = 0;
    std::size_t embed_dim = 16;
    std::size_t hidden_dim = 32;
    std::vector<double> embedding;  // vocab x embed
    std::vector<double> W;
    std::vector<double> b;
    std::vector<double> w_out;      // hidden
    double b_out = 0.0;

    static LstmModel zeros(std::size_t vocab, std::size_t embed = 16, std::size_t hidden = 32);
    /// Uniform(+-1/sqrt(hidden)) weights, N(0,1) embeddings, forget bias 1.
    static LstmModel random(std::size_t vocab, std::uint64_t seed, std::size_t embed = 16,
                            std::size_t hidden = 32);

    std::size_t input_dim() const noexcept { return embed_dim + hidden_dim; }
    std::size_t parameter_count() const noexcept;
    /// Flat view over every parameter, in the order embedding, W, b, w_out, b_out.
    double& parameter(std::size_t k);
    double parameter(std::size_t k) const;

    bool operator==(const LstmModel&) const = default;
};

/// Gradient with the same shapes as the model.
struct LstmGrad {
    std::vector<double> embedding, W, b, w_out;
    double b_out = 0.0;

    explicit LstmGrad(const LstmModel& m);
    void clear();
    void scale(double s);
    double norm() const;
    double flat(std::size_t k) const;
};

/// Throws Error(EmptySequence) and Error(IndexOutOfVocab).
double lstm_forward(const LstmModel& model, std::span<const std::uint32_t> sequence);

/// Backward pass variants; the faulty one drops the forget-gate term and
/// exists to show the gradient check catches such mistakes.
enum class BackwardFault : std::uint8_t { None, DropForgetGate };

/// Binary cross-entropy of one sample; adds its gradient into `grad`.
double lstm_loss_and_grad(const LstmModel& model, std::span<const std::uint32_t> sequence, int label,
                          LstmGrad& grad, BackwardFault fault = BackwardFault::None);

double lstm_loss(const LstmModel& model, std::span<const std::uint32_t> sequence, int label);

/// Max over parameters of |analytic - numeric| / max(|analytic| + |numeric|, floor)
/// with central differences. The floor keeps parameters whose true
/// gradient is ~0 from reporting pure roundoff.
double gradient_check(const LstmModel& model, std::span<const std::uint32_t> sequence, int label,
                      double epsilon, BackwardFault fault = BackwardFault::None);

/// Same comparison for an arbitrary scalar function.
double gradient_check(const std::function<double(std::span<const double>)>& f,
                      std::span<const double> analytic_gradient, std::vector<double> x, double epsilon);

inline constexpr double kGradientCheckFloor = 1e-7;

}  // namespace fuzztwin::predict
