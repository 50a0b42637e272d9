#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rgame/data.hpp"
#include "rgame/errors.hpp"
#include "rgame/players.hpp"
#include "rgame/threads.hpp"

namespace rgame {

// Deterministic evaluation of a trained bundle: masks come from thresholded
// probabilities (or a fixed top-k budget), never from sampling.

struct EvalReport {
    std::size_t examples = 0;
    double accuracy = 0.0;         // predictor on the selected view
    double accuracy_c = 0.0;       // complement predictor on the left-out view
    double mean_selected_fraction = 0.0;
    double mean_pieces = 0.0;
    bool has_rationale_metrics = false;
    double precision = 0.0;  // micro, against gold rationales where present
    double recall = 0.0;
};

// Micro-averaged overlap of predicted vs reference binary masks. An empty
// prediction scores precision 0 by convention. Swapping arguments swaps the
// two metrics.
inline std::pair<double, double> rationale_precision_recall(
    const std::vector<std::vector<int>>& predicted, const std::vector<std::vector<int>>& reference) {
    if (predicted.size() != reference.size()) {
        throw ShapeError("precision_recall: " + std::to_string(predicted.size()) + " vs " +
                         std::to_string(reference.size()) + " masks");
    }
    std::size_t tp = 0, pred_pos = 0, ref_pos = 0;
    for (std::size_t n = 0; n < predicted.size(); ++n) {
        if (predicted[n].size() != reference[n].size()) {
            throw ShapeError("precision_recall: mask " + std::to_string(n) + " length mismatch");
        }
        for (std::size_t i = 0; i < predicted[n].size(); ++i) {
            const bool p = predicted[n][i] != 0;
            const bool r = reference[n][i] != 0;
            tp += (p && r);
            pred_pos += p;
            ref_pos += r;
        }
    }
    const double precision = pred_pos == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_pos);
    const double recall = ref_pos == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(ref_pos);
    return {precision, recall};
}

namespace detail {

struct PerExample {
    bool pred_correct = false;
    bool comp_correct = false;
    std::vector<int> z;
};

inline PerExample eval_one(const TokenSequence& ex, const PlayerParams& pp, const GameConfig& cfg,
                           double fixed_ratio) {
    PerExample out;
    const GeneratorTrace t = rationale_probs(ex.tokens, pp);
    out.z = fixed_ratio > 0.0 ? topk_mask(t.probs, fixed_ratio) : infer_mask(t.probs, cfg);
    const MaskedViews views = apply_mask(ex.tokens, out.z);
    out.pred_correct = argmax_lowest_tie(classifier_forward(views.rationale, pp.predictor).probs) == ex.label;
    out.comp_correct =
        argmax_lowest_tie(classifier_forward(views.complement, pp.complement_predictor).probs) == ex.label;
    return out;
}

inline EvalReport evaluate_impl(const Dataset& ds, const PlayerParams& pp, const GameConfig& cfg,
                                double fixed_ratio) {
    if (ds.examples.empty()) throw EmptyInputError("evaluate: dataset has no examples");
    std::vector<PerExample> rows(ds.examples.size());
    parallel_for(ds.examples.size(),
                 [&](std::size_t i) { rows[i] = eval_one(ds.examples[i], pp, cfg, fixed_ratio); });

    EvalReport rep;
    rep.examples = ds.examples.size();
    std::vector<std::vector<int>> pred_masks, gold_masks;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rep.accuracy += rows[i].pred_correct;
        rep.accuracy_c += rows[i].comp_correct;
        rep.mean_selected_fraction += static_cast<double>(selected_count(rows[i].z)) /
                                      static_cast<double>(rows[i].z.size());
        rep.mean_pieces += static_cast<double>(piece_count(rows[i].z));
        if (ds.examples[i].gold_mask) {
            pred_masks.push_back(rows[i].z);
            gold_masks.push_back(*ds.examples[i].gold_mask);
        }
    }
    const double n = static_cast<double>(rep.examples);
    rep.accuracy /= n;
    rep.accuracy_c /= n;
    rep.mean_selected_fraction /= n;
    rep.mean_pieces /= n;
    if (!pred_masks.empty()) {
        rep.has_rationale_metrics = true;
        std::tie(rep.precision, rep.recall) = rationale_precision_recall(pred_masks, gold_masks);
    }
    return rep;
}

}  // namespace detail

inline EvalReport evaluate(const Dataset& ds, const PlayerParams& pp, const GameConfig& cfg) {
    return detail::evaluate_impl(ds, pp, cfg, 0.0);
}

// Same metrics with every mask forced to ceil(ratio * L) tokens.
inline EvalReport evaluate_at_ratio(const Dataset& ds, const PlayerParams& pp, const GameConfig& cfg,
                                    double ratio) {
    if (ratio <= 0.0 || ratio > 1.0) throw ConfigError("evaluate_at_ratio: ratio must be in (0, 1]");
    return detail::evaluate_impl(ds, pp, cfg, ratio);
}

inline double majority_rate(const Dataset& ds) {
    if (ds.examples.empty()) throw EmptyInputError("majority_rate: dataset has no examples");
    std::vector<std::size_t> counts(ds.num_classes, 0);
    for (const auto& ex : ds.examples) counts[ex.label] += 1;
    std::size_t best = 0;
    for (std::size_t c : counts) best = std::max(best, c);
    return static_cast<double>(best) / static_cast<double>(ds.examples.size());
}

struct DegenerationReport {
    double accuracy = 0.0;
    double accuracy_c = 0.0;
    double majority = 0.0;
    std::string verdict;  // "clean", "degenerate-risk", or "model-unconverged"
};

// Flags models whose left-out text still predicts the label: if the rationale
// path works but the complement path beats majority by a clear slack, the
// players likely share an encoding instead of the rationale carrying the
// information.
inline DegenerationReport degeneration_report(const Dataset& ds, const PlayerParams& pp,
                                              const GameConfig& cfg) {
    const EvalReport ev = evaluate(ds, pp, cfg);
    DegenerationReport rep;
    rep.accuracy = ev.accuracy;
    rep.accuracy_c = ev.accuracy_c;
    rep.majority = majority_rate(ds);
    if (rep.accuracy <= 0.8) {
        rep.verdict = "model-unconverged";
    } else if (rep.accuracy_c > rep.majority + 0.1) {
        rep.verdict = "degenerate-risk";
    } else {
        rep.verdict = "clean";
    }
    return rep;
}

}  // namespace rgame
