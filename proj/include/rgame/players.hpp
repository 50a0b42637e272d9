#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rgame/data.hpp"
#include "rgame/encoder.hpp"
#include "rgame/errors.hpp"
#include "rgame/ops.hpp"
#include "rgame/params.hpp"
#include "rgame/rng.hpp"

namespace rgame {

// Shared knobs of the selection game. `s` below 1.0 is a fraction of the
// sequence length, otherwise an absolute token budget. `c` is the slack inside
// the per-transition training penalty; `c_pieces` is the piece budget used by
// the exact checker and evaluation (a mask of p interior pieces costs 2p
// transitions, one edge-touching piece costs 1).
struct GameConfig {
    double lambda_g = 1.0;
    double lambda_s = 1.0;
    double lambda_cont = 1.0;
    double h = 0.0;        // margin on the loss-scale gap
    double h_r = 0.0;      // margin on the accuracy-scale gap used by rewards
    double s = 0.15;
    double c = 0.0;
    std::size_t c_pieces = 1;
    double explore = 0.05;
    double threshold = 0.5;

    double sparsity_budget(std::size_t seq_len) const {
        return s < 1.0 ? s * static_cast<double>(seq_len) : s;
    }
    std::size_t max_transitions() const { return 2 * c_pieces; }

    void validate() const {
        if (lambda_g < 0 || lambda_s < 0 || lambda_cont < 0) throw ConfigError("lambda weights must be >= 0");
        if (h < 0) throw ConfigError("h must be >= 0");
        if (h_r < 0) throw ConfigError("h_r must be >= 0");
        if (s < 0) throw ConfigError("s must be >= 0");
        if (c < 0) throw ConfigError("c must be >= 0");
        if (explore < 0 || explore > 1) throw ConfigError("explore must be in [0, 1]");
        if (threshold <= 0 || threshold >= 1) throw ConfigError("threshold must be in (0, 1)");
    }
};

// The three players (plus the optional introspection classifier, which belongs
// to the generator's training group). The generator's ParamSet carries the
// label embedding ("label_embed", num_classes x hidden) when introspective.
struct PlayerParams {
    ParamSet generator;
    ParamSet predictor;
    ParamSet complement_predictor;
    ParamSet introspection;
    bool introspective = false;

    const Tensor2* label_embedding() const {
        return generator.has("label_embed") ? &generator.value("label_embed") : nullptr;
    }
};

inline ParamSet make_classifier_params(const EncoderDims& d, std::size_t num_classes, double scale,
                                       Rng& rng) {
    ParamSet p;
    add_encoder_params(p, d);
    p.add("head.w", num_classes, 2 * d.hidden);
    p.add("head.b", num_classes, 1);
    for (const char* name : {"embed", "fwd.w_in", "fwd.w_rec", "bwd.w_in", "bwd.w_rec", "head.w"}) {
        init_uniform(p, name, scale, rng);
    }
    return p;
}

inline ParamSet make_generator_params(const EncoderDims& d, std::size_t num_classes, bool introspective,
                                      double scale, Rng& rng) {
    ParamSet p;
    add_encoder_params(p, d);
    p.add("zhead.w", 1, 2 * d.hidden);
    p.add("zhead.b", 1, 1);
    for (const char* name : {"embed", "fwd.w_in", "fwd.w_rec", "bwd.w_in", "bwd.w_rec", "zhead.w"}) {
        init_uniform(p, name, scale, rng);
    }
    if (introspective) {
        p.add("label_embed", num_classes, d.hidden);
        init_uniform(p, "label_embed", scale, rng);
    }
    return p;
}

inline PlayerParams make_player_params(const EncoderDims& d, std::size_t num_classes,
                                       bool introspective, double scale, Rng& rng) {
    PlayerParams pp;
    pp.introspective = introspective;
    pp.generator = make_generator_params(d, num_classes, introspective, scale, rng);
    pp.predictor = make_classifier_params(d, num_classes, scale, rng);
    pp.complement_predictor = make_classifier_params(d, num_classes, scale, rng);
    if (introspective) pp.introspection = make_classifier_params(d, num_classes, scale, rng);
    return pp;
}

// ---- masking ----

struct MaskedViews {
    std::vector<std::size_t> rationale;   // selected tokens kept, others -> mask id
    std::vector<std::size_t> complement;  // the opposite
};

inline MaskedViews apply_mask(std::span<const std::size_t> tokens, std::span<const int> z) {
    if (tokens.size() != z.size()) {
        throw ShapeError("apply_mask: tokens [" + std::to_string(tokens.size()) + "] vs mask [" +
                         std::to_string(z.size()) + "]");
    }
    MaskedViews v;
    v.rationale.resize(tokens.size());
    v.complement.resize(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        v.rationale[i] = z[i] ? tokens[i] : kMaskTokenId;
        v.complement[i] = z[i] ? kMaskTokenId : tokens[i];
    }
    return v;
}

inline std::size_t selected_count(std::span<const int> z) {
    std::size_t n = 0;
    for (int b : z) n += (b != 0);
    return n;
}

// transitions counted with a zero boundary on the left only
inline std::size_t transition_count(std::span<const int> z) {
    std::size_t n = 0;
    int prev = 0;
    for (int b : z) {
        n += (b != prev);
        prev = b;
    }
    return n;
}

inline std::size_t piece_count(std::span<const int> z) {
    std::size_t n = 0;
    int prev = 0;
    for (int b : z) {
        if (b && !prev) ++n;
        prev = b;
    }
    return n;
}

// ---- generator ----

struct GeneratorTrace {
    EncoderTrace enc;
    Vec scores;  // raw per-token logits of the selection head
    Vec probs;   // sigmoid(scores)
    std::size_t conditioned_label = 0;  // meaningful only when label-conditioned
    bool has_label = false;
};

inline GeneratorTrace generator_forward(std::span<const std::size_t> tokens, const ParamSet& gen) {
    GeneratorTrace t;
    t.enc = encode_sequence(tokens, gen);
    const Tensor2& w = gen.value("zhead.w");
    const double b = gen.value("zhead.b").data[0];
    const std::size_t L = tokens.size();
    t.scores.resize(L);
    t.probs.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        const double* row = t.enc.per_token.row(i);
        double acc = b;
        for (std::size_t k = 0; k < w.cols; ++k) acc += w.data[k] * row[k];
        t.scores[i] = acc;
        t.probs[i] = sigmoid(acc);
    }
    return t;
}

// Label-conditioned variant: the guessed label's embedding row seeds both
// recurrent directions. A zero row reduces this to generator_forward exactly.
inline GeneratorTrace introspective_forward(std::span<const std::size_t> tokens, std::size_t label,
                                            const ParamSet& gen) {
    const Tensor2& emb = gen.value("label_embed");
    if (label >= emb.rows) {
        throw LabelError("introspective_forward: label " + std::to_string(label) + " out of range [0, " +
                         std::to_string(emb.rows) + ")");
    }
    GeneratorTrace t;
    t.enc = encode_sequence(tokens, gen, std::span<const double>(emb.row(label), emb.cols));
    t.conditioned_label = label;
    t.has_label = true;
    const Tensor2& w = gen.value("zhead.w");
    const double b = gen.value("zhead.b").data[0];
    const std::size_t L = tokens.size();
    t.scores.resize(L);
    t.probs.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        const double* row = t.enc.per_token.row(i);
        double acc = b;
        for (std::size_t k = 0; k < w.cols; ++k) acc += w.data[k] * row[k];
        t.scores[i] = acc;
        t.probs[i] = sigmoid(acc);
    }
    return t;
}

// Backward from per-token score gradients; accumulates into gen.grads,
// including the conditioned label's embedding row when one was used.
inline void generator_backward(const GeneratorTrace& t, ParamSet& gen, std::span<const double> dscores) {
    const std::size_t L = t.scores.size();
    if (dscores.size() != L) {
        throw ShapeError("generator_backward: dscores [" + std::to_string(dscores.size()) + "] vs [" +
                         std::to_string(L) + "]");
    }
    const Tensor2& w = gen.value("zhead.w");
    Tensor2& dw = gen.grad("zhead.w");
    Tensor2& db = gen.grad("zhead.b");
    Tensor2 d_per_token(L, w.cols);
    for (std::size_t i = 0; i < L; ++i) {
        const double g = dscores[i];
        const double* row = t.enc.per_token.row(i);
        double* drow = d_per_token.row(i);
        for (std::size_t k = 0; k < w.cols; ++k) {
            dw.data[k] += g * row[k];
            drow[k] = g * w.data[k];
        }
        db.data[0] += g;
    }
    const Vec d_h0 = encode_backward(t.enc, gen, d_per_token, {});
    if (t.has_label) {
        Tensor2& demb = gen.grad("label_embed");
        double* row = demb.row(t.conditioned_label);
        for (std::size_t k = 0; k < d_h0.size(); ++k) row[k] += d_h0[k];
    }
}

// ---- classifier-shaped players (predictors and the introspection head) ----

struct ClassifierTrace {
    EncoderTrace enc;
    Vec logits;
    Vec probs;
};

inline ClassifierTrace classifier_forward(std::span<const std::size_t> tokens, const ParamSet& p) {
    ClassifierTrace t;
    t.enc = encode_sequence(tokens, p);
    t.logits = affine(p.value("head.w"), t.enc.pooled,
                      std::span<const double>(p.value("head.b").data));
    t.probs = softmax(t.logits);
    return t;
}

inline void classifier_backward(const ClassifierTrace& t, ParamSet& p, std::span<const double> dlogits) {
    Vec d_pooled(t.enc.pooled.size(), 0.0);
    affine_backward(p.value("head.w"), t.enc.pooled, dlogits, p.grad("head.w"),
                    std::span<double>(p.grad("head.b").data), d_pooled);
    encode_backward(t.enc, p, Tensor2(), d_pooled);
}

// Guessed label of the introspection classifier; ties resolve to the lowest id.
inline std::size_t introspect_label(std::span<const std::size_t> tokens, const ParamSet& classifier) {
    return argmax_lowest_tie(classifier_forward(tokens, classifier).probs);
}

// Generator probabilities by the active pathway for this parameter bundle.
inline GeneratorTrace rationale_probs(std::span<const std::size_t> tokens, const PlayerParams& pp) {
    if (pp.introspective) {
        return introspective_forward(tokens, introspect_label(tokens, pp.introspection), pp.generator);
    }
    return generator_forward(tokens, pp.generator);
}

// ---- sampling and inference ----

struct SampledMask {
    std::vector<int> z;
    double log_likelihood = 0.0;  // under the unmixed probabilities, floored
};

// Bernoulli sample per position from the exploration-smoothed policy
// (1 - explore) * p + explore * 0.5. The stored log likelihood uses the
// original probabilities with a floor, so a saturated head never yields an
// infinite value.
inline SampledMask sample_mask(std::span<const double> probs, double explore, Rng& rng) {
    constexpr double kFloor = 1e-6;
    SampledMask m;
    m.z.resize(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double smoothed = (1.0 - explore) * probs[i] + explore * 0.5;
        m.z[i] = rng.bernoulli(smoothed) ? 1 : 0;
        const double p = std::min(1.0 - kFloor, std::max(kFloor, probs[i]));
        m.log_likelihood += m.z[i] ? std::log(p) : std::log(1.0 - p);
    }
    return m;
}

// Deterministic mask: strictly above threshold selects.
inline std::vector<int> infer_mask(std::span<const double> probs, const GameConfig& cfg) {
    std::vector<int> z(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) z[i] = probs[i] > cfg.threshold ? 1 : 0;
    return z;
}

// Fixed-budget mask: the ceil(ratio * L) highest-probability positions,
// earlier positions first on ties.
inline std::vector<int> topk_mask(std::span<const double> probs, double ratio) {
    const std::size_t L = probs.size();
    std::size_t k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(L)));
    if (k > L) k = L;
    std::vector<std::size_t> order(L);
    for (std::size_t i = 0; i < L; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
    std::vector<int> z(L, 0);
    for (std::size_t i = 0; i < k; ++i) z[order[i]] = 1;
    return z;
}

}  // namespace rgame
