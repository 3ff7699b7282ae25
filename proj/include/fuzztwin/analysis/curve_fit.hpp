#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace fuzztwin::analysis {

enum class CurveModel : std::uint8_t { Linear, Exponential };
std::string_view to_string(CurveModel m) noexcept;

/// Linear: y = a*x + b (a slope, b intercept).
/// Exponential: y = a*exp(b*x) (a scale, b rate), fitted on ln y.
/// r_squared is 1 - SS_res/SS_tot in the original y space for both.
struct CurveFit {
    CurveModel model = CurveModel::Linear;
    double a = 0;
    double b = 0;
    double r_squared = 0;

    double operator()(double x) const;
};

/// Throws Error(InvalidArgument) for fewer than 3 points or mismatched
/// lengths, Error(DegenerateInput) for constant x, and
/// Error(NonPositiveValues) when an exponential fit meets y <= 0.
CurveFit fit_curve(std::span<const double> x, std::span<const double> y, CurveModel model);

double r_squared(std::span<const double> y, std::span<const double> predicted);

}  // namespace fuzztwin::analysis
