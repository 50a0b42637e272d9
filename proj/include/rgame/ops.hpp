#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rgame/errors.hpp"
#include "rgame/tensor.hpp"

namespace rgame {

using Vec = std::vector<double>;

// ---- affine map y = W x + b ----

inline Vec affine(const Tensor2& w, std::span<const double> x, std::span<const double> b) {
    if (w.cols != x.size() || w.rows != b.size()) {
        throw ShapeError("affine: W " + w.shape_str() + " vs x [" + std::to_string(x.size()) +
                         "] and b [" + std::to_string(b.size()) + "]");
    }
    Vec y(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double* wr = w.row(r);
        double acc = b[r];
        for (std::size_t c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
    return y;
}

// Accumulates dW, db, dx given upstream dy. dx may be empty when the input
// gradient is not needed (e.g. x is a one-hot embedding lookup handled separately).
inline void affine_backward(const Tensor2& w, std::span<const double> x, std::span<const double> dy,
                            Tensor2& dw, std::span<double> db, std::span<double> dx) {
    for (std::size_t r = 0; r < w.rows; ++r) {
        const double g = dy[r];
        double* dwr = dw.row(r);
        for (std::size_t c = 0; c < w.cols; ++c) dwr[c] += g * x[c];
        db[r] += g;
    }
    if (!dx.empty()) {
        for (std::size_t r = 0; r < w.rows; ++r) {
            const double g = dy[r];
            const double* wr = w.row(r);
            for (std::size_t c = 0; c < w.cols; ++c) dx[c] += g * wr[c];
        }
    }
}

// ---- softmax cross entropy ----

inline Vec softmax(std::span<const double> logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    Vec p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

struct XentResult {
    double loss = 0.0;  // natural log scale
    Vec probs;
    Vec dlogits;  // probs with 1 subtracted at the label slot
};

// Max-subtracted softmax followed by negative log likelihood of `label`.
inline XentResult softmax_xent(std::span<const double> logits, std::size_t label) {
    if (label >= logits.size()) {
        throw LabelError("softmax_xent: label " + std::to_string(label) + " out of range [0, " +
                         std::to_string(logits.size()) + ")");
    }
    XentResult r;
    r.probs = softmax(logits);
    r.loss = -std::log(std::max(r.probs[label], 1e-300));
    r.dlogits = r.probs;
    r.dlogits[label] -= 1.0;
    return r;
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline std::size_t argmax_lowest_tie(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace rgame
