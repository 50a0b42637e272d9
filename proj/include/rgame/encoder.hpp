#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rgame/errors.hpp"
#include "rgame/ops.hpp"
#include "rgame/params.hpp"

namespace rgame {

// Bidirectional tanh recurrence over embedded tokens. Per-token output is the
// concatenation [forward_state, backward_state] (width 2H); pooled output is
// the mean over positions. Both directions can start from a caller-supplied
// initial state of width H (used for label conditioning); default is zeros.

struct EncoderDims {
    std::size_t vocab = 0;
    std::size_t embed = 0;
    std::size_t hidden = 0;
};

inline void add_encoder_params(ParamSet& p, const EncoderDims& d) {
    p.add("embed", d.vocab, d.embed);
    p.add("fwd.w_in", d.hidden, d.embed);
    p.add("fwd.w_rec", d.hidden, d.hidden);
    p.add("fwd.b", d.hidden, 1);
    p.add("bwd.w_in", d.hidden, d.embed);
    p.add("bwd.w_rec", d.hidden, d.hidden);
    p.add("bwd.b", d.hidden, 1);
}

inline EncoderDims encoder_dims(const ParamSet& p) {
    EncoderDims d;
    d.vocab = p.value("embed").rows;
    d.embed = p.value("embed").cols;
    d.hidden = p.value("fwd.w_in").rows;
    return d;
}

struct EncoderTrace {
    std::vector<std::size_t> tokens;
    std::vector<Vec> emb;     // L x E
    std::vector<Vec> h_fwd;   // L x H, post-tanh
    std::vector<Vec> h_bwd;   // L x H, post-tanh
    Vec h0;                   // initial state fed to both directions; empty means zeros
    Tensor2 per_token;        // L x 2H
    Vec pooled;               // 2H
};

namespace detail {

// one tanh cell step: h = tanh(w_in e + w_rec prev + b)
inline Vec rnn_cell(const Tensor2& w_in, const Tensor2& w_rec, const Tensor2& b,
                    const Vec& e, const Vec& prev) {
    const std::size_t H = w_in.rows;
    Vec h(H);
    for (std::size_t r = 0; r < H; ++r) {
        double acc = b.data[r];
        const double* wi = w_in.row(r);
        for (std::size_t c = 0; c < w_in.cols; ++c) acc += wi[c] * e[c];
        const double* wr = w_rec.row(r);
        for (std::size_t c = 0; c < H; ++c) acc += wr[c] * prev[c];
        h[r] = std::tanh(acc);
    }
    return h;
}

}  // namespace detail

inline EncoderTrace encode_sequence(std::span<const std::size_t> tokens, const ParamSet& p,
                                    std::span<const double> h0 = {}) {
    if (tokens.empty()) throw EmptyInputError("encode_sequence: empty token sequence");
    const EncoderDims d = encoder_dims(p);
    const std::size_t L = tokens.size();

    EncoderTrace t;
    t.tokens.assign(tokens.begin(), tokens.end());
    const Tensor2& embed = p.value("embed");
    t.emb.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        if (tokens[i] >= d.vocab) {
            throw VocabError("encode_sequence: token id " + std::to_string(tokens[i]) +
                             " outside vocab of size " + std::to_string(d.vocab));
        }
        t.emb[i].assign(embed.row(tokens[i]), embed.row(tokens[i]) + d.embed);
    }

    if (!h0.empty()) {
        if (h0.size() != d.hidden) {
            throw ShapeError("encode_sequence: initial state [" + std::to_string(h0.size()) +
                             "] vs hidden [" + std::to_string(d.hidden) + "]");
        }
        t.h0.assign(h0.begin(), h0.end());
    }
    const Vec init = t.h0.empty() ? Vec(d.hidden, 0.0) : t.h0;

    t.h_fwd.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        const Vec& prev = (i == 0) ? init : t.h_fwd[i - 1];
        t.h_fwd[i] = detail::rnn_cell(p.value("fwd.w_in"), p.value("fwd.w_rec"), p.value("fwd.b"),
                                      t.emb[i], prev);
    }
    t.h_bwd.resize(L);
    for (std::size_t ii = 0; ii < L; ++ii) {
        const std::size_t i = L - 1 - ii;
        const Vec& prev = (i == L - 1) ? init : t.h_bwd[i + 1];
        t.h_bwd[i] = detail::rnn_cell(p.value("bwd.w_in"), p.value("bwd.w_rec"), p.value("bwd.b"),
                                      t.emb[i], prev);
    }

    t.per_token = Tensor2(L, 2 * d.hidden);
    t.pooled.assign(2 * d.hidden, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
        double* row = t.per_token.row(i);
        for (std::size_t k = 0; k < d.hidden; ++k) {
            row[k] = t.h_fwd[i][k];
            row[d.hidden + k] = t.h_bwd[i][k];
        }
        for (std::size_t k = 0; k < 2 * d.hidden; ++k) t.pooled[k] += row[k];
    }
    for (double& v : t.pooled) v /= static_cast<double>(L);
    return t;
}

// Backpropagates through both directions. d_per_token may be empty (treated as
// zeros) and d_pooled may be empty likewise. Parameter gradients accumulate
// into p.grads; the return value is the gradient w.r.t. the initial state
// (sum of both directions' contributions), for the label-conditioning path.
inline Vec encode_backward(const EncoderTrace& t, ParamSet& p,
                           const Tensor2& d_per_token, std::span<const double> d_pooled) {
    const EncoderDims d = encoder_dims(p);
    const std::size_t L = t.tokens.size();
    const std::size_t H = d.hidden;
    const bool has_pt = d_per_token.size() != 0;
    if (has_pt && (d_per_token.rows != L || d_per_token.cols != 2 * H)) {
        throw ShapeError("encode_backward: d_per_token " + d_per_token.shape_str() + " vs [" +
                         std::to_string(L) + "x" + std::to_string(2 * H) + "]");
    }
    const double inv_l = 1.0 / static_cast<double>(L);

    auto upstream = [&](std::size_t i, std::size_t k) {
        double g = has_pt ? d_per_token.at(i, k) : 0.0;
        if (!d_pooled.empty()) g += d_pooled[k] * inv_l;
        return g;
    };

    const Vec init = t.h0.empty() ? Vec(H, 0.0) : t.h0;
    std::vector<Vec> d_emb(L, Vec(d.embed, 0.0));
    Vec d_h0(H, 0.0);

    // forward direction, reverse sweep
    {
        Tensor2& dw_in = p.grad("fwd.w_in");
        Tensor2& dw_rec = p.grad("fwd.w_rec");
        Tensor2& db = p.grad("fwd.b");
        const Tensor2& w_in = p.value("fwd.w_in");
        const Tensor2& w_rec = p.value("fwd.w_rec");
        Vec dh(H, 0.0);
        for (std::size_t ii = 0; ii < L; ++ii) {
            const std::size_t i = L - 1 - ii;
            for (std::size_t k = 0; k < H; ++k) dh[k] += upstream(i, k);
            const Vec& h = t.h_fwd[i];
            const Vec& prev = (i == 0) ? init : t.h_fwd[i - 1];
            Vec dnext(H, 0.0);
            for (std::size_t r = 0; r < H; ++r) {
                const double da = (1.0 - h[r] * h[r]) * dh[r];
                double* wi = dw_in.row(r);
                for (std::size_t c = 0; c < d.embed; ++c) wi[c] += da * t.emb[i][c];
                double* wr = dw_rec.row(r);
                for (std::size_t c = 0; c < H; ++c) wr[c] += da * prev[c];
                db.data[r] += da;
                const double* wiv = w_in.row(r);
                for (std::size_t c = 0; c < d.embed; ++c) d_emb[i][c] += da * wiv[c];
                const double* wrv = w_rec.row(r);
                for (std::size_t c = 0; c < H; ++c) dnext[c] += da * wrv[c];
            }
            if (i == 0) {
                for (std::size_t k = 0; k < H; ++k) d_h0[k] += dnext[k];
            } else {
                dh = std::move(dnext);
            }
        }
    }

    // backward direction, forward sweep
    {
        Tensor2& dw_in = p.grad("bwd.w_in");
        Tensor2& dw_rec = p.grad("bwd.w_rec");
        Tensor2& db = p.grad("bwd.b");
        const Tensor2& w_in = p.value("bwd.w_in");
        const Tensor2& w_rec = p.value("bwd.w_rec");
        Vec dh(H, 0.0);
        for (std::size_t i = 0; i < L; ++i) {
            for (std::size_t k = 0; k < H; ++k) dh[k] += upstream(i, H + k);
            const Vec& h = t.h_bwd[i];
            const Vec& prev = (i == L - 1) ? init : t.h_bwd[i + 1];
            Vec dnext(H, 0.0);
            for (std::size_t r = 0; r < H; ++r) {
                const double da = (1.0 - h[r] * h[r]) * dh[r];
                double* wi = dw_in.row(r);
                for (std::size_t c = 0; c < d.embed; ++c) wi[c] += da * t.emb[i][c];
                double* wr = dw_rec.row(r);
                for (std::size_t c = 0; c < H; ++c) wr[c] += da * prev[c];
                db.data[r] += da;
                const double* wiv = w_in.row(r);
                for (std::size_t c = 0; c < d.embed; ++c) d_emb[i][c] += da * wiv[c];
                const double* wrv = w_rec.row(r);
                for (std::size_t c = 0; c < H; ++c) dnext[c] += da * wrv[c];
            }
            if (i == L - 1) {
                for (std::size_t k = 0; k < H; ++k) d_h0[k] += dnext[k];
            } else {
                dh = std::move(dnext);
            }
        }
    }

    Tensor2& d_embed = p.grad("embed");
    for (std::size_t i = 0; i < L; ++i) {
        double* row = d_embed.row(t.tokens[i]);
        for (std::size_t c = 0; c < d.embed; ++c) row[c] += d_emb[i][c];
    }
    return d_h0;
}

}  // namespace rgame
