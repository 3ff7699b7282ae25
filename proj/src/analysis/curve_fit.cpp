#include "fuzztwin/analysis/curve_fit.hpp"

#include <cmath>
#include <vector>

#include "fuzztwin/common/error.hpp"

namespace fuzztwin::analysis {

std::string_view to_string(CurveModel m) noexcept {
    return m == CurveModel::Linear ? "linear" : "exponential";
}

double CurveFit::operator()(double x) const {
    return model == CurveModel::Linear ? a * x + b : a * std::exp(b * x);
}

namespace {

struct Line {
    double slope;
    double intercept;
};

// Centred least squares; keeps precision when x is far from zero.
Line ols(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorKind::DegenerateInput, "all x values are equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace

double r_squared(std::span<const double> y, std::span<const double> predicted) {
    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss_tot = 0, ss_res = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_tot += (y[i] - mean) * (y[i] - mean);
        ss_res += (y[i] - predicted[i]) * (y[i] - predicted[i]);
    }
    if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
    return 1.0 - ss_res / ss_tot;
}

CurveFit fit_curve(std::span<const double> x, std::span<const double> y, CurveModel model) {
    if (x.size() != y.size()) throw Error(ErrorKind::InvalidArgument, "x and y differ in length");
    if (x.size() < 3) throw Error(ErrorKind::InvalidArgument, "need at least 3 points");
    CurveFit fit;
    fit.model = model;
    if (model == CurveModel::Linear) {
        const auto line = ols(x, y);
        fit.a = line.slope;
        fit.b = line.intercept;
    } else {
        std::vector<double> ln(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!(y[i] > 0.0)) throw Error(ErrorKind::NonPositiveValues, "exponential fit needs y > 0");
            ln[i] = std::log(y[i]);
        }
        const auto line = ols(x, ln);
        fit.a = std::exp(line.intercept);
        fit.b = line.slope;
    }
    std::vector<double> pred(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) pred[i] = fit(x[i]);
    fit.r_squared = r_squared(y, pred);
    return fit;
}

}  // namespace fuzztwin::analysis
