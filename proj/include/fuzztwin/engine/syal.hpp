#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "fuzztwin/common/random.hpp"
#include "fuzztwin/common/state_id.hpp"
#include "fuzztwin/common/trace.hpp"

namespace fuzztwin::engine {

enum class UpdateScope : std::uint8_t { Entry, RowColumn };

std::string_view to_string(UpdateScope s) noexcept;
std::optional<UpdateScope> update_scope_from_string(std::string_view s) noexcept;

struct SyalParams {
    double alpha = 0.5;
    double ratio = 0.1;
    double p0 = 0.1;
    double p_min = 0.01;
    UpdateScope scope = UpdateScope::RowColumn;

    /// Throws Error(InvalidArgument) outside alpha > 0, 0 < ratio <= 1,
    /// 0 < p_min <= p0 <= 1.
    void validate() const;
};

/// n x n replacement priorities. Row a is the command being replaced,
/// column a' the replacement. Pairs that are not allowed (the diagonal,
/// cross-channel pairs) are never selected.
class ProbabilityMatrix {
public:
    using AllowedFn = std::function<bool(StateId, StateId)>;

    ProbabilityMatrix() = default;
    ProbabilityMatrix(std::vector<StateId> states, double p0, AllowedFn allowed = {});

    std::size_t size() const noexcept { return states_.size(); }
    const std::vector<StateId>& states() const noexcept { return states_; }
    std::optional<std::size_t> index_of(StateId id) const;

    double p(std::size_t a, std::size_t b) const { return p_[a * n() + b]; }
    double& p(std::size_t a, std::size_t b) { return p_[a * n() + b]; }
    bool tested(std::size_t a, std::size_t b) const { return tested_[a * n() + b] != 0; }
    bool allowed(std::size_t a, std::size_t b) const { return allowed_[a * n() + b] != 0; }
    bool selectable(std::size_t a, std::size_t b) const { return allowed(a, b) && !tested(a, b); }

    void mark_tested(std::size_t a, std::size_t b);
    std::size_t untested_count() const noexcept { return untested_; }
    std::size_t allowed_count() const noexcept { return allowed_count_; }
    bool exist_fuzzing() const noexcept { return untested_ > 0; }

    bool operator==(const ProbabilityMatrix&) const = default;

private:
    std::size_t n() const noexcept { return states_.size(); }

    std::vector<StateId> states_;
    std::vector<double> p_;
    std::vector<std::uint8_t> tested_;
    std::vector<std::uint8_t> allowed_;
    std::size_t untested_ = 0;
    std::size_t allowed_count_ = 0;
};

/// One entry under the update rule, clamped to [p_min, 1].
double syal_update_value(double p, Outcome outcome, double alpha, double ratio, double p_min);

/// Failure multiplies row a and column a' by (1+alpha), success by
/// (1-alpha*ratio); the (a, a') entry is scaled once. Entries outside the
/// row and column are untouched.
void syal_update(ProbabilityMatrix& m, std::size_t a, std::size_t a2, Outcome outcome,
                 const SyalParams& params);

/// Weighted draw of a' within row a over untested allowed entries.
/// Throws Error(RowExhausted) when the row has nothing left.
std::size_t syal_select(const ProbabilityMatrix& m, std::size_t a, Rng& rng);

/// Weighted draw over every untested allowed pair. Throws
/// Error(RowExhausted) when the matrix is exhausted.
std::pair<std::size_t, std::size_t> syal_select_pair(const ProbabilityMatrix& m, Rng& rng);

/// Uniform draw over every untested allowed pair.
std::pair<std::size_t, std::size_t> uniform_select_pair(const ProbabilityMatrix& m, Rng& rng);

}  // namespace fuzztwin::engine
