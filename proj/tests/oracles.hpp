#pragma once

// Independent reference implementations used only by tests. None of them
// share code with the library they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fuzztwin/common/trace.hpp"
#include "fuzztwin/predict/lstm.hpp"

namespace oracle {

// CRC-16/CCITT-FALSE by polynomial long division over the bit stream:
// shift every message bit in MSB first, augmented with 16 zero bits, with
// the 0xFFFF init folded in as an inverted first 16 bits.
inline std::uint16_t crc16_long_division(std::span<const std::uint8_t> data) {
    std::vector<int> bits;
    for (std::uint8_t b : data) {
        for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
    }
    for (int i = 0; i < 16 && i < static_cast<int>(bits.size()); ++i) bits[i] ^= 1;
    const bool short_input = bits.size() < 16;
    for (int i = 0; i < 16; ++i) bits.push_back(0);
    if (short_input) {
        // Init bits that fall past the message land in the augmentation.
        for (std::size_t i = data.size() * 8; i < 16; ++i) bits[i] ^= 1;
    }
    std::uint32_t reg = 0;
    for (int bit : bits) {
        reg = (reg << 1) | static_cast<std::uint32_t>(bit);
        if (reg & 0x10000u) reg ^= 0x11021u;
    }
    return static_cast<std::uint16_t>(reg);
}

struct Recount {
    std::set<fuzztwin::StateId> vertices;
    std::map<std::pair<fuzztwin::StateId, fuzztwin::StateId>, std::pair<std::size_t, std::size_t>> edges;
    std::map<fuzztwin::StateId, std::pair<std::size_t, std::size_t>> states;  // (success, failed)
    std::size_t success = 0;
    std::size_t failed = 0;
};

inline Recount recount(const std::vector<fuzztwin::ConnectionTrace>& traces) {
    Recount r;
    for (const auto& t : traces) {
        const bool failed = t.outcome == fuzztwin::Outcome::Failed;
        (failed ? r.failed : r.success) += 1;
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
            const auto s = t.steps[i].state;
            r.vertices.insert(s);
            auto& sc = r.states[s];
            (failed ? sc.second : sc.first) += 1;
            if (i + 1 < t.steps.size()) {
                auto& ec = r.edges[{s, t.steps[i + 1].state}];
                (failed ? ec.second : ec.first) += 1;
            }
        }
    }
    return r;
}

inline std::set<fuzztwin::StateId> high_risk_states(const Recount& r) {
    double total = 0;
    for (const auto& [s, c] : r.states) total += static_cast<double>(c.second);
    const double mean = r.states.empty() ? 0.0 : total / static_cast<double>(r.states.size());
    std::set<fuzztwin::StateId> out;
    for (const auto& [s, c] : r.states) {
        if (static_cast<double>(c.second) > mean) out.insert(s);
    }
    return out;
}

inline std::set<std::pair<fuzztwin::StateId, fuzztwin::StateId>> high_risk_transactions(
    const Recount& r, std::size_t max_success) {
    std::set<std::pair<fuzztwin::StateId, fuzztwin::StateId>> out;
    for (const auto& [e, c] : r.edges) {
        if (c.second >= 1 && c.first <= max_success) out.insert(e);
    }
    return out;
}

// Fraction of failed traces containing at least one of `rule`'s edges.
inline double rule_recall(const std::vector<fuzztwin::ConnectionTrace>& traces,
                          const std::set<std::pair<fuzztwin::StateId, fuzztwin::StateId>>& rule) {
    std::size_t tp = 0;
    std::size_t fn = 0;
    for (const auto& t : traces) {
        if (t.outcome != fuzztwin::Outcome::Failed) continue;
        bool hit = false;
        for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) {
            if (rule.count({t.steps[i].state, t.steps[i + 1].state})) hit = true;
        }
        (hit ? tp : fn) += 1;
    }
    return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

// Probability that a random positive outscores a random negative, ties half.
inline double auc_by_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0;
    double pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1;
            if (scores[i] > scores[j]) wins += 1;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Straight-line LSTM forward written from the cell equations with explicit
// per-gate weight lookups.
inline double lstm_forward(const fuzztwin::predict::LstmModel& m, const std::vector<std::uint32_t>& seq) {
    const std::size_t E = m.embed_dim;
    const std::size_t H = m.hidden_dim;
    const std::size_t cols = E + H;
    std::vector<double> h(H, 0.0);
    std::vector<double> c(H, 0.0);
    auto w = [&](std::size_t gate, std::size_t unit, std::size_t col) {
        return m.W[(gate * H + unit) * cols + col];
    };
    for (std::uint32_t token : seq) {
        const double* x = &m.embedding[token * E];
        std::vector<double> h_next(H);
        std::vector<double> c_next(H);
        for (std::size_t u = 0; u < H; ++u) {
            double pre[4];
            for (std::size_t g = 0; g < 4; ++g) {
                double s = m.b[g * H + u];
                for (std::size_t k = 0; k < E; ++k) s += w(g, u, k) * x[k];
                for (std::size_t k = 0; k < H; ++k) s += w(g, u, E + k) * h[k];
                pre[g] = s;
            }
            const double i_gate = sigmoid(pre[0]);
            const double f_gate = sigmoid(pre[1]);
            const double g_cand = std::tanh(pre[2]);
            const double o_gate = sigmoid(pre[3]);
            c_next[u] = f_gate * c[u] + i_gate * g_cand;
            h_next[u] = o_gate * std::tanh(c_next[u]);
        }
        h = h_next;
        c = c_next;
    }
    double z = m.b_out;
    for (std::size_t u = 0; u < H; ++u) z += m.w_out[u] * h[u];
    return sigmoid(z);
}

}  // namespace oracle
