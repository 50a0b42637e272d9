#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rgame/data.hpp"
#include "rgame/errors.hpp"
#include "rgame/eval.hpp"
#include "rgame/objectives.hpp"
#include "rgame/players.hpp"

namespace rgame {

// Alternating optimization of the selection game. Each step mutates exactly
// one player group: the two predictors (supervised on sampled views), or the
// generator side (policy gradient, plus the introspection classifier's own
// supervised loss). Training is single threaded and draws randomness from one
// stream, so a fixed seed reproduces every byte of the outcome.

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double lr_predictors = 1e-3;
    double lr_generator = 1e-3;
    double baseline_decay = 0.9;
    enum class Schedule { joint, three_step } schedule = Schedule::joint;
    std::size_t pretrain_classifier_epochs = 0;
    std::size_t pretrain_generator_epochs = 0;  // used by three_step only
    std::uint64_t seed = 1;
    std::size_t eval_every = 1;
    bool introspective = true;
    std::size_t embed_dim = 32;
    std::size_t hidden_dim = 32;
    double init_scale = 0.1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const {
        if (batch_size == 0) throw ConfigError("batch_size must be positive");
        if (baseline_decay < 0 || baseline_decay >= 1) throw ConfigError("baseline_decay must be in [0, 1)");
        if (eval_every == 0) throw ConfigError("eval_every must be positive");
        if (embed_dim == 0 || hidden_dim == 0) throw ConfigError("model dims must be positive");
    }

    AdamConfig adam_for(double lr) const { return AdamConfig{lr, adam_beta1, adam_beta2, adam_eps}; }
};

struct EpochRecord {
    std::size_t epoch = 0;      // 1-based across all phases
    std::string phase;          // "classifier", "generator", or "joint"
    LossBreakdown mean_loss;    // averaged over this epoch's game steps
    double mean_reward = 0.0;
    double baseline = 0.0;
    bool has_dev = false;
    double dev_acc = 0.0;
    double dev_acc_c = 0.0;
    double dev_selected_fraction = 0.0;
    double dev_pieces = 0.0;
};

struct TrainState {
    PlayerParams params;
    double baseline = 0.0;
    std::vector<EpochRecord> history;
    PlayerParams best_params;
    double best_dev_acc = -1.0;
    double best_dev_acc_c = 2.0;
    std::size_t best_epoch = 0;
};

inline double update_baseline(double baseline, double batch_mean_reward, double decay) {
    return decay * baseline + (1.0 - decay) * batch_mean_reward;
}

namespace detail {

struct BatchStats {
    LossBreakdown loss_sum;
    double reward_sum = 0.0;
    std::size_t steps = 0;
};

inline void add_loss(LossBreakdown& acc, const LossBreakdown& x) {
    acc.loss_p += x.loss_p;
    acc.loss_c += x.loss_c;
    acc.loss_gap += x.loss_gap;
    acc.loss_sparsity += x.loss_sparsity;
    acc.loss_continuity += x.loss_continuity;
    acc.total += x.total;
}

}  // namespace detail

// Supervised update of both predictors on views cut by freshly sampled masks.
// The generator side is read only here.
inline std::pair<double, double> train_predictors_step(TrainState& st, const Dataset& ds,
                                                       std::span<const std::size_t> batch,
                                                       const GameConfig& game, const TrainConfig& tc,
                                                       Rng& rng) {
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss_p = 0.0, loss_c = 0.0;
    for (std::size_t idx : batch) {
        const TokenSequence& ex = ds.examples[idx];
        const GeneratorTrace gt = rationale_probs(ex.tokens, st.params);
        const SampledMask sm = sample_mask(gt.probs, game.explore, rng);
        const MaskedViews views = apply_mask(ex.tokens, sm.z);

        const ClassifierTrace pt = classifier_forward(views.rationale, st.params.predictor);
        XentResult px = softmax_xent(pt.logits, ex.label);
        loss_p += px.loss;
        for (double& g : px.dlogits) g *= inv_b;
        classifier_backward(pt, st.params.predictor, px.dlogits);

        const ClassifierTrace ct = classifier_forward(views.complement, st.params.complement_predictor);
        XentResult cx = softmax_xent(ct.logits, ex.label);
        loss_c += cx.loss;
        for (double& g : cx.dlogits) g *= inv_b;
        classifier_backward(ct, st.params.complement_predictor, cx.dlogits);
    }
    adam_update(st.params.predictor, tc.adam_for(tc.lr_predictors));
    adam_update(st.params.complement_predictor, tc.adam_for(tc.lr_predictors));
    return {loss_p * inv_b, loss_c * inv_b};
}

// Policy-gradient update of the generator (and, when introspective, the
// classifier's supervised update on full text). Predictor parameters are
// read only here. Returns this batch's stats; the reward baseline moves
// afterwards by exponential average.
inline detail::BatchStats train_generator_step(TrainState& st, const Dataset& ds,
                                               std::span<const std::size_t> batch,
                                               const GameConfig& game, const TrainConfig& tc,
                                               Rng& rng) {
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    detail::BatchStats stats;
    std::vector<double> dscores;
    for (std::size_t idx : batch) {
        const TokenSequence& ex = ds.examples[idx];

        GeneratorTrace gt;
        if (st.params.introspective) {
            const ClassifierTrace it = classifier_forward(ex.tokens, st.params.introspection);
            XentResult ix = softmax_xent(it.logits, ex.label);
            for (double& g : ix.dlogits) g *= inv_b;
            classifier_backward(it, st.params.introspection, ix.dlogits);
            gt = introspective_forward(ex.tokens, argmax_lowest_tie(it.probs), st.params.generator);
        } else {
            gt = generator_forward(ex.tokens, st.params.generator);
        }

        const SampledMask sm = sample_mask(gt.probs, game.explore, rng);
        const MaskedViews views = apply_mask(ex.tokens, sm.z);
        const ClassifierTrace pt = classifier_forward(views.rationale, st.params.predictor);
        const ClassifierTrace ct = classifier_forward(views.complement, st.params.complement_predictor);

        const bool pred_correct = argmax_lowest_tie(pt.probs) == ex.label;
        const bool comp_correct = argmax_lowest_tie(ct.probs) == ex.label;
        const double reward = sample_reward(pred_correct, comp_correct, sm.z, game);
        const double advantage = reward - st.baseline;

        // d/dscore of -advantage * log pi(z | probs)
        dscores.assign(sm.z.size(), 0.0);
        for (std::size_t i = 0; i < sm.z.size(); ++i) {
            dscores[i] = -advantage * (static_cast<double>(sm.z[i]) - gt.probs[i]) * inv_b;
        }
        generator_backward(gt, st.params.generator, dscores);

        stats.reward_sum += reward;
        detail::add_loss(stats.loss_sum,
                         generator_objective(softmax_xent(pt.logits, ex.label).loss,
                                             softmax_xent(ct.logits, ex.label).loss, sm.z, game));
        stats.steps += 1;
    }
    adam_update(st.params.generator, tc.adam_for(tc.lr_generator));
    if (st.params.introspective) {
        adam_update(st.params.introspection, tc.adam_for(tc.lr_generator));
    }
    st.baseline = update_baseline(st.baseline, stats.reward_sum * inv_b, tc.baseline_decay);
    return stats;
}

// Supervised step on unmasked text for a classifier-shaped ParamSet. With an
// rng, each example instead trains on a randomly thinned view (keep rate drawn
// uniformly per example, down to near-empty), so predictors seeded from this
// classifier stay calibrated on the masked views the generator will feed them.
inline double train_classifier_step(ParamSet& p, const Dataset& ds, std::span<const std::size_t> batch,
                                    const AdamConfig& adam, Rng* rng = nullptr) {
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<std::size_t> view;
    std::vector<int> z;
    for (std::size_t idx : batch) {
        const TokenSequence& ex = ds.examples[idx];
        view = ex.tokens;
        if (rng) {
            const double keep = rng->uniform(0.05, 1.0);
            z.resize(ex.tokens.size());
            for (int& b : z) b = rng->bernoulli(keep) ? 1 : 0;
            view = apply_mask(ex.tokens, z).rationale;
        }
        const ClassifierTrace t = classifier_forward(view, p);
        XentResult x = softmax_xent(t.logits, ex.label);
        loss += x.loss;
        for (double& g : x.dlogits) g *= inv_b;
        classifier_backward(t, p, x.dlogits);
    }
    adam_update(p, adam);
    return loss * inv_b;
}

namespace detail {

inline void copy_values(const ParamSet& from, ParamSet& to) {
    to = ParamSet();
    for (const auto& [name, t] : from.values) {
        to.add(name, t.rows, t.cols);
        to.value(name) = t;
    }
}

}  // namespace detail

// Full run over the configured schedule. `dev` may be empty (no evaluation,
// the final parameters double as the best ones).
inline TrainState run_training(const Dataset& train, const Dataset& dev, const GameConfig& game,
                               const TrainConfig& tc) {
    game.validate();
    tc.validate();
    if (train.examples.empty()) throw EmptyInputError("run_training: empty training dataset");
    train.validate();
    if (!dev.examples.empty()) dev.validate();

    const EncoderDims dims{train.vocab.size(), tc.embed_dim, tc.hidden_dim};
    Rng init_rng(mix_seed(tc.seed, 1));
    Rng train_rng(mix_seed(tc.seed, 2));

    TrainState st;
    st.params = make_player_params(dims, train.num_classes, tc.introspective, tc.init_scale, init_rng);

    struct Phase {
        std::string name;
        std::size_t epochs;
    };
    std::vector<Phase> phases;
    if (tc.schedule == TrainConfig::Schedule::three_step) {
        phases.push_back({"classifier", tc.pretrain_classifier_epochs});
        phases.push_back({"generator", tc.pretrain_generator_epochs});
        phases.push_back({"joint", tc.epochs});
    } else {
        phases.push_back({"classifier", tc.pretrain_classifier_epochs});
        phases.push_back({"joint", tc.epochs});
    }

    std::vector<std::size_t> order(train.examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t global_epoch = 0;
    for (const Phase& phase : phases) {
        for (std::size_t e = 0; e < phase.epochs; ++e) {
            ++global_epoch;
            train_rng.shuffle(order);

            EpochRecord rec;
            rec.epoch = global_epoch;
            rec.phase = phase.name;
            detail::BatchStats epoch_stats;
            double cls_loss = 0.0;
            std::size_t cls_batches = 0;

            for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
                const std::size_t end = std::min(start + tc.batch_size, order.size());
                const std::span<const std::size_t> batch(order.data() + start, end - start);
                if (phase.name == "classifier") {
                    ParamSet& cls = tc.introspective ? st.params.introspection : st.params.predictor;
                    cls_loss += train_classifier_step(cls, train, batch, tc.adam_for(tc.lr_predictors),
                                                      &train_rng);
                    ++cls_batches;
                } else if (phase.name == "generator") {
                    const detail::BatchStats bs = train_generator_step(st, train, batch, game, tc, train_rng);
                    detail::add_loss(epoch_stats.loss_sum, bs.loss_sum);
                    epoch_stats.reward_sum += bs.reward_sum;
                    epoch_stats.steps += bs.steps;
                } else {
                    const auto [lp, lc] = train_predictors_step(st, train, batch, game, tc, train_rng);
                    (void)lp;
                    (void)lc;
                    const detail::BatchStats bs = train_generator_step(st, train, batch, game, tc, train_rng);
                    detail::add_loss(epoch_stats.loss_sum, bs.loss_sum);
                    epoch_stats.reward_sum += bs.reward_sum;
                    epoch_stats.steps += bs.steps;
                }
            }

            if (epoch_stats.steps > 0) {
                const double inv = 1.0 / static_cast<double>(epoch_stats.steps);
                rec.mean_loss = epoch_stats.loss_sum;
                rec.mean_loss.loss_p *= inv;
                rec.mean_loss.loss_c *= inv;
                rec.mean_loss.loss_gap *= inv;
                rec.mean_loss.loss_sparsity *= inv;
                rec.mean_loss.loss_continuity *= inv;
                rec.mean_loss.total *= inv;
                rec.mean_reward = epoch_stats.reward_sum * inv;
            } else if (cls_batches > 0) {
                rec.mean_loss.loss_p = cls_loss / static_cast<double>(cls_batches);
            }
            rec.baseline = st.baseline;

            if (!dev.examples.empty() &&
                (global_epoch % tc.eval_every == 0 || (&phase == &phases.back() && e + 1 == phase.epochs))) {
                const EvalReport ev = evaluate(dev, st.params, game);
                rec.has_dev = true;
                rec.dev_acc = ev.accuracy;
                rec.dev_acc_c = ev.accuracy_c;
                rec.dev_selected_fraction = ev.mean_selected_fraction;
                rec.dev_pieces = ev.mean_pieces;
                // accuracy saturates long before the complement starves, so
                // ties go to the model whose complement knows the least
                const bool better = ev.accuracy > st.best_dev_acc ||
                                    (ev.accuracy == st.best_dev_acc && ev.accuracy_c < st.best_dev_acc_c);
                if (phase.name != "classifier" && better) {
                    st.best_dev_acc = ev.accuracy;
                    st.best_dev_acc_c = ev.accuracy_c;
                    st.best_epoch = global_epoch;
                    st.best_params = st.params;
                }
            }
            st.history.push_back(rec);
        }

        if (phase.name == "classifier" && phase.epochs > 0 &&
            tc.schedule == TrainConfig::Schedule::three_step) {
            // the pre-trained classifier seeds both predictors identically
            const ParamSet src = tc.introspective ? st.params.introspection : st.params.predictor;
            detail::copy_values(src, st.params.predictor);
            detail::copy_values(src, st.params.complement_predictor);
        }
    }

    if (st.best_dev_acc < 0.0) {
        st.best_params = st.params;
        st.best_epoch = global_epoch;
    }
    return st;
}

}  // namespace rgame
