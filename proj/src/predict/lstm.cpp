#include "fuzztwin/predict/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "fuzztwin/common/error.hpp"
#include "fuzztwin/common/random.hpp"

namespace fuzztwin::predict {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct StepCache {
    std::vector<double> z, i, f, g, o, c, tc, h;
};

struct ForwardPass {
    std::vector<StepCache> steps;
    double logit = 0.0;
};

void validate(const LstmModel& m, std::span<const std::uint32_t> seq) {
    if (seq.empty()) throw Error(ErrorKind::EmptySequence, "empty state sequence");
    for (auto s : seq) {
        if (s >= m.vocab_size) {
            throw Error(ErrorKind::IndexOutOfVocab,
                        "state index " + std::to_string(s) + " >= vocab " + std::to_string(m.vocab_size));
        }
    }
}

ForwardPass run_forward(const LstmModel& m, std::span<const std::uint32_t> seq, bool keep) {
    const std::size_t H = m.hidden_dim, E = m.embed_dim, D = m.input_dim();
    ForwardPass fp;
    std::vector<double> h(H, 0.0), c(H, 0.0), a(4 * H);
    StepCache s;
    for (auto x : seq) {
        s.z.assign(D, 0.0);
        std::copy_n(m.embedding.begin() + static_cast<long>(x * E), E, s.z.begin());
        std::copy(h.begin(), h.end(), s.z.begin() + static_cast<long>(E));
        for (std::size_t r = 0; r < 4 * H; ++r) {
            const double* w = m.W.data() + r * D;
            double acc = m.b[r];
            for (std::size_t k = 0; k < D; ++k) acc += w[k] * s.z[k];
            a[r] = acc;
        }
        s.i.resize(H); s.f.resize(H); s.g.resize(H); s.o.resize(H);
        s.c.resize(H); s.tc.resize(H); s.h.resize(H);
        for (std::size_t j = 0; j < H; ++j) {
            s.i[j] = sigmoid(a[j]);
            s.f[j] = sigmoid(a[H + j]);
            s.g[j] = std::tanh(a[2 * H + j]);
            s.o[j] = sigmoid(a[3 * H + j]);
            s.c[j] = s.f[j] * c[j] + s.i[j] * s.g[j];
            s.tc[j] = std::tanh(s.c[j]);
            s.h[j] = s.o[j] * s.tc[j];
        }
        c = s.c;
        h = s.h;
        if (keep) fp.steps.push_back(s);
    }
    double logit = m.b_out;
    for (std::size_t j = 0; j < H; ++j) logit += m.w_out[j] * h[j];
    fp.logit = logit;
    if (!keep) fp.steps.push_back(std::move(s));
    return fp;
}

}  // namespace

LstmModel LstmModel::zeros(std::size_t vocab, std::size_t embed, std::size_t hidden) {
    if (vocab == 0 || embed == 0 || hidden == 0) {
        throw Error(ErrorKind::InvalidArgument, "model dimensions must be positive");
    }
    LstmModel m;
    m.vocab_size = vocab;
    m.embed_dim = embed;
    m.hidden_dim = hidden;
    m.embedding.assign(vocab * embed, 0.0);
    m.W.assign(4 * hidden * (embed + hidden), 0.0);
    m.b.assign(4 * hidden, 0.0);
    m.w_out.assign(hidden, 0.0);
    return m;
}

LstmModel LstmModel::random(std::size_t vocab, std::uint64_t seed, std::size_t embed, std::size_t hidden) {
    LstmModel m = zeros(vocab, embed, hidden);
    Rng rng(seed);
    const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto& v : m.embedding) v = rng.normal();
    for (auto& v : m.W) v = rng.uniform(-k, k);
    for (auto& v : m.b) v = rng.uniform(-k, k);
    for (std::size_t j = 0; j < hidden; ++j) m.b[hidden + j] = 1.0;
    for (auto& v : m.w_out) v = rng.uniform(-k, k);
    m.b_out = 0.0;
    return m;
}

std::size_t LstmModel::parameter_count() const noexcept {
    return embedding.size() + W.size() + b.size() + w_out.size() + 1;
}

double& LstmModel::parameter(std::size_t k) {
    if (k < embedding.size()) return embedding[k];
    k -= embedding.size();
    if (k < W.size()) return W[k];
    k -= W.size();
    if (k < b.size()) return b[k];
    k -= b.size();
    if (k < w_out.size()) return w_out[k];
    k -= w_out.size();
    if (k == 0) return b_out;
    throw Error(ErrorKind::InvalidArgument, "parameter index out of range");
}

double LstmModel::parameter(std::size_t k) const { return const_cast<LstmModel*>(this)->parameter(k); }

LstmGrad::LstmGrad(const LstmModel& m)
    : embedding(m.embedding.size(), 0.0), W(m.W.size(), 0.0), b(m.b.size(), 0.0), w_out(m.w_out.size(), 0.0) {}

void LstmGrad::clear() {
    std::fill(embedding.begin(), embedding.end(), 0.0);
    std::fill(W.begin(), W.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(w_out.begin(), w_out.end(), 0.0);
    b_out = 0.0;
}

void LstmGrad::scale(double s) {
    for (auto* v : {&embedding, &W, &b, &w_out})
        for (auto& x : *v) x *= s;
    b_out *= s;
}

double LstmGrad::norm() const {
    double sum = b_out * b_out;
    for (const auto* v : {&embedding, &W, &b, &w_out})
        for (auto x : *v) sum += x * x;
    return std::sqrt(sum);
}

double LstmGrad::flat(std::size_t k) const {
    for (const auto* v : {&embedding, &W, &b, &w_out}) {
        if (k < v->size()) return (*v)[k];
        k -= v->size();
    }
    if (k == 0) return b_out;
    throw Error(ErrorKind::InvalidArgument, "gradient index out of range");
}

double lstm_forward(const LstmModel& model, std::span<const std::uint32_t> sequence) {
    validate(model, sequence);
    return sigmoid(run_forward(model, sequence, false).logit);
}

double lstm_loss(const LstmModel& model, std::span<const std::uint32_t> sequence, int label) {
    validate(model, sequence);
    const double z = run_forward(model, sequence, false).logit;
    return softplus(z) - static_cast<double>(label) * z;
}

double lstm_loss_and_grad(const LstmModel& m, std::span<const std::uint32_t> seq, int label, LstmGrad& grad,
                          BackwardFault fault) {
    validate(m, seq);
    const std::size_t H = m.hidden_dim, E = m.embed_dim, D = m.input_dim();
    const auto fp = run_forward(m, seq, true);
    const double z = fp.logit;
    const double y = static_cast<double>(label);
    const double dz = sigmoid(z) - y;

    const auto& last = fp.steps.back();
    std::vector<double> dh(H), dc(H, 0.0), da(4 * H), dz_in(D);
    for (std::size_t j = 0; j < H; ++j) {
        grad.w_out[j] += dz * last.h[j];
        dh[j] = dz * m.w_out[j];
    }
    grad.b_out += dz;

    for (std::size_t t = seq.size(); t-- > 0;) {
        const auto& s = fp.steps[t];
        for (std::size_t j = 0; j < H; ++j) {
            const double c_prev = t ? fp.steps[t - 1].c[j] : 0.0;
            const double d_o = dh[j] * s.tc[j];
            const double dcj = dc[j] + dh[j] * s.o[j] * (1.0 - s.tc[j] * s.tc[j]);
            const double d_i = dcj * s.g[j];
            const double d_g = dcj * s.i[j];
            const double d_f = fault == BackwardFault::DropForgetGate ? 0.0 : dcj * c_prev;
            da[j] = d_i * s.i[j] * (1.0 - s.i[j]);
            da[H + j] = d_f * s.f[j] * (1.0 - s.f[j]);
            da[2 * H + j] = d_g * (1.0 - s.g[j] * s.g[j]);
            da[3 * H + j] = d_o * s.o[j] * (1.0 - s.o[j]);
            dc[j] = dcj * s.f[j];
        }
        std::fill(dz_in.begin(), dz_in.end(), 0.0);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            const double g = da[r];
            if (g == 0.0) continue;
            double* gw = grad.W.data() + r * D;
            const double* w = m.W.data() + r * D;
            for (std::size_t k = 0; k < D; ++k) {
                gw[k] += g * s.z[k];
                dz_in[k] += w[k] * g;
            }
            grad.b[r] += g;
        }
        double* ge = grad.embedding.data() + seq[t] * E;
        for (std::size_t k = 0; k < E; ++k) ge[k] += dz_in[k];
        for (std::size_t j = 0; j < H; ++j) dh[j] = dz_in[E + j];
    }
    return softplus(z) - y * z;
}

double gradient_check(const std::function<double(std::span<const double>)>& f,
                      std::span<const double> analytic, std::vector<double> x, double epsilon) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
        throw Error(ErrorKind::InvalidArgument, "epsilon must be in [1e-7, 1e-3]");
    }
    if (analytic.size() != x.size()) throw Error(ErrorKind::InvalidArgument, "gradient size mismatch");
    double worst = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double keep = x[k];
        x[k] = keep + epsilon;
        const double up = f(x);
        x[k] = keep - epsilon;
        const double down = f(x);
        x[k] = keep;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom = std::max(std::abs(analytic[k]) + std::abs(numeric), kGradientCheckFloor);
        worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
    }
    return worst;
}

double gradient_check(const LstmModel& model, std::span<const std::uint32_t> sequence, int label,
                      double epsilon, BackwardFault fault) {
    LstmGrad grad(model);
    lstm_loss_and_grad(model, sequence, label, grad, fault);
    std::vector<double> analytic(model.parameter_count()), x(model.parameter_count());
    for (std::size_t k = 0; k < x.size(); ++k) {
        analytic[k] = grad.flat(k);
        x[k] = model.parameter(k);
    }
    LstmModel probe = model;
    auto f = [&](std::span<const double> p) {
        for (std::size_t k = 0; k < p.size(); ++k) probe.parameter(k) = p[k];
        return lstm_loss(probe, sequence, label);
    };
    return gradient_check(f, analytic, std::move(x), epsilon);
}

}  // namespace fuzztwin::predict
