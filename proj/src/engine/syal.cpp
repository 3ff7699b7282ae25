#include "fuzztwin/engine/syal.hpp"

#include <algorithm>

#include "fuzztwin/common/error.hpp"

namespace fuzztwin::engine {

std::string_view to_string(UpdateScope s) noexcept {
    return s == UpdateScope::Entry ? "entry" : "row_column";
}

std::optional<UpdateScope> update_scope_from_string(std::string_view s) noexcept {
    if (s == "entry") return UpdateScope::Entry;
    if (s == "row_column") return UpdateScope::RowColumn;
    return std::nullopt;
}

void SyalParams::validate() const {
    if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw Error(ErrorKind::InvalidArgument, "ratio must be in (0, 1]");
    if (!(p_min > 0.0 && p_min <= p0 && p0 <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "need 0 < p_min <= p0 <= 1");
    }
}

ProbabilityMatrix::ProbabilityMatrix(std::vector<StateId> states, double p0, AllowedFn allowed)
    : states_(std::move(states)),
      p_(states_.size() * states_.size(), p0),
      tested_(states_.size() * states_.size(), 0),
      allowed_(states_.size() * states_.size(), 0) {
    for (std::size_t a = 0; a < n(); ++a) {
        for (std::size_t b = 0; b < n(); ++b) {
            const bool ok = a != b && (!allowed || allowed(states_[a], states_[b]));
            allowed_[a * n() + b] = ok;
            allowed_count_ += ok;
        }
    }
    untested_ = allowed_count_;
}

std::optional<std::size_t> ProbabilityMatrix::index_of(StateId id) const {
    const auto it = std::find(states_.begin(), states_.end(), id);
    if (it == states_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - states_.begin());
}

void ProbabilityMatrix::mark_tested(std::size_t a, std::size_t b) {
    auto& t = tested_[a * n() + b];
    if (!t && allowed(a, b)) --untested_;
    t = 1;
}

double syal_update_value(double p, Outcome outcome, double alpha, double ratio, double p_min) {
    // alpha * ratio >= 1 makes the success factor non-positive; the clamp
    // then pins the entry at p_min.
    const double f = outcome == Outcome::Failed ? 1.0 + alpha : 1.0 - alpha * ratio;
    return std::clamp(p * f, p_min, 1.0);
}

void syal_update(ProbabilityMatrix& m, std::size_t a, std::size_t a2, Outcome outcome,
                 const SyalParams& params) {
    const auto scale = [&](std::size_t i, std::size_t j) {
        m.p(i, j) = syal_update_value(m.p(i, j), outcome, params.alpha, params.ratio, params.p_min);
    };
    if (params.scope == UpdateScope::Entry) {
        scale(a, a2);
        return;
    }
    for (std::size_t j = 0; j < m.size(); ++j) scale(a, j);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (i != a) scale(i, a2);
}

std::size_t syal_select(const ProbabilityMatrix& m, std::size_t a, Rng& rng) {
    double total = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (m.selectable(a, j)) total += m.p(a, j);
    if (total <= 0.0) throw Error(ErrorKind::RowExhausted, "row has no untested replacement");
    double u = rng.uniform() * total;
    std::size_t last = 0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        if (!m.selectable(a, j)) continue;
        last = j;
        u -= m.p(a, j);
        if (u < 0.0) return j;
    }
    return last;  // rounding
}

std::pair<std::size_t, std::size_t> syal_select_pair(const ProbabilityMatrix& m, Rng& rng) {
    double total = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a)
        for (std::size_t b = 0; b < m.size(); ++b)
            if (m.selectable(a, b)) total += m.p(a, b);
    if (total <= 0.0) throw Error(ErrorKind::RowExhausted, "no untested pair left");
    double u = rng.uniform() * total;
    std::pair<std::size_t, std::size_t> last{0, 0};
    for (std::size_t a = 0; a < m.size(); ++a) {
        for (std::size_t b = 0; b < m.size(); ++b) {
            if (!m.selectable(a, b)) continue;
            last = {a, b};
            u -= m.p(a, b);
            if (u < 0.0) return last;
        }
    }
    return last;
}

std::pair<std::size_t, std::size_t> uniform_select_pair(const ProbabilityMatrix& m, Rng& rng) {
    if (m.untested_count() == 0) throw Error(ErrorKind::RowExhausted, "no untested pair left");
    auto k = rng.below(m.untested_count());
    for (std::size_t a = 0; a < m.size(); ++a) {
        for (std::size_t b = 0; b < m.size(); ++b) {
            if (!m.selectable(a, b)) continue;
            if (k-- == 0) return {a, b};
        }
    }
    throw Error(ErrorKind::RowExhausted, "untested count out of sync");
}

}  // namespace fuzztwin::engine
