#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rgame/data.hpp"
#include "rgame/errors.hpp"
#include "rgame/players.hpp"
#include "rgame/threads.hpp"

namespace rgame {

// Exact quantities on FiniteTask distributions, all in bits. Small enough
// supports admit brute-force search over every deterministic masking scheme,
// which pins down the true optimum of the combined selection objective.

// Deterministic masking scheme: one binary mask per support sequence,
// indexed in support order.
struct MaskScheme {
    std::vector<std::vector<int>> masks;
};

inline double entropy_bits(std::span<const double> dist) {
    double h = 0.0;
    for (double p : dist) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

inline double label_entropy(const FiniteTask& task) {
    std::vector<double> marginal(task.num_classes, 0.0);
    for (const auto& e : task.support) marginal[e.label] += e.prob;
    return entropy_bits(marginal);
}

// H(Y | view(X)) where `view` maps a support index to any hashable summary of
// the observation (here: a token vector). Cells group equal views.
inline double exact_conditional_entropy(
    const FiniteTask& task,
    const std::function<std::vector<std::size_t>(std::size_t)>& view) {
    std::map<std::vector<std::size_t>, std::vector<double>> cells;
    for (std::size_t i = 0; i < task.support.size(); ++i) {
        auto& dist = cells[view(i)];
        if (dist.empty()) dist.assign(task.num_classes, 0.0);
        dist[task.support[i].label] += task.support[i].prob;
    }
    double h = 0.0;
    for (const auto& [v, joint] : cells) {
        double cell_mass = 0.0;
        for (double p : joint) cell_mass += p;
        if (cell_mass <= 0.0) continue;
        std::vector<double> cond(joint.size());
        for (std::size_t y = 0; y < joint.size(); ++y) cond[y] = joint[y] / cell_mass;
        h += cell_mass * entropy_bits(cond);
    }
    return h;
}

inline std::vector<std::size_t> masked_view(const FiniteTask& task, const MaskScheme& scheme,
                                            std::size_t idx, bool complement) {
    const auto& tokens = task.support[idx].tokens;
    const auto& z = scheme.masks[idx];
    std::vector<std::size_t> v(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const bool keep = complement ? z[i] == 0 : z[i] != 0;
        v[i] = keep ? tokens[i] : kMaskTokenId;
    }
    return v;
}

inline double entropy_given_rationale(const FiniteTask& task, const MaskScheme& scheme) {
    return exact_conditional_entropy(task, [&](std::size_t i) { return masked_view(task, scheme, i, false); });
}

inline double entropy_given_complement(const FiniteTask& task, const MaskScheme& scheme) {
    return exact_conditional_entropy(task, [&](std::size_t i) { return masked_view(task, scheme, i, true); });
}

// Margin used by the condition check and enumeration when the caller does not
// supply one: half the label entropy.
inline double default_margin_bits(const FiniteTask& task) { return 0.5 * label_entropy(task); }

struct ConditionReport {
    bool sufficient = false;
    bool comprehensive = false;
    bool compact = false;
    double h_y = 0.0;
    double h_y_given_x = 0.0;
    double h_y_given_r = 0.0;
    double h_y_given_rc = 0.0;
    double margin = 0.0;
    std::size_t max_selected = 0;
    std::size_t max_transitions = 0;
};

// Checks the three rationale conditions exactly. Sufficiency compares against
// H(Y|X) with a small tolerance; comprehensiveness requires the complement to
// sit at least `margin` bits above the rationale; compactness bounds both the
// selected count and the transition count of every support mask.
inline ConditionReport check_conditions(const FiniteTask& task, const MaskScheme& scheme,
                                        const GameConfig& cfg, double margin_bits = -1.0) {
    task.validate();
    if (scheme.masks.size() != task.support.size()) {
        throw ShapeError("check_conditions: scheme covers " + std::to_string(scheme.masks.size()) +
                         " sequences, task has " + std::to_string(task.support.size()));
    }
    for (std::size_t i = 0; i < scheme.masks.size(); ++i) {
        if (scheme.masks[i].size() != task.seq_len()) {
            throw ShapeError("check_conditions: mask " + std::to_string(i) + " length mismatch");
        }
    }
    ConditionReport rep;
    rep.margin = margin_bits >= 0.0 ? margin_bits : default_margin_bits(task);
    rep.h_y = label_entropy(task);
    rep.h_y_given_x = exact_conditional_entropy(task, [&](std::size_t i) { return task.support[i].tokens; });
    rep.h_y_given_r = entropy_given_rationale(task, scheme);
    rep.h_y_given_rc = entropy_given_complement(task, scheme);

    constexpr double kTol = 1e-9;
    rep.sufficient = rep.h_y_given_r <= rep.h_y_given_x + kTol;
    rep.comprehensive = rep.h_y_given_rc >= rep.h_y_given_r + rep.margin - kTol;
    const double budget = cfg.sparsity_budget(task.seq_len());
    rep.compact = true;
    for (const auto& z : scheme.masks) {
        rep.max_selected = std::max(rep.max_selected, selected_count(z));
        rep.max_transitions = std::max(rep.max_transitions, transition_count(z));
    }
    rep.compact = static_cast<double>(rep.max_selected) <= budget + kTol &&
                  rep.max_transitions <= cfg.max_transitions();
    return rep;
}

enum class OracleObjective { entropy_form, xent_form };

struct SchemeScore {
    double objective = 0.0;
    double h_y_given_r = 0.0;
    double h_y_given_rc = 0.0;
    double gap_term = 0.0;
    double sparsity_term = 0.0;
    double continuity_term = 0.0;
};

namespace detail {

// Expected cross entropy of the best lookup predictor reading the given view:
// fit the per-view conditional label distribution, then charge -log2 of it.
// On a finite task this equals the conditional entropy, which is exactly why
// entropy_form and xent_form must agree; both are kept as separate routes.
inline double lookup_predictor_xent(const FiniteTask& task, const MaskScheme& scheme, bool complement) {
    std::map<std::vector<std::size_t>, std::vector<double>> cells;
    for (std::size_t i = 0; i < task.support.size(); ++i) {
        auto& dist = cells[masked_view(task, scheme, i, complement)];
        if (dist.empty()) dist.assign(task.num_classes, 0.0);
        dist[task.support[i].label] += task.support[i].prob;
    }
    std::map<std::vector<std::size_t>, std::vector<double>> fitted;
    for (const auto& [v, joint] : cells) {
        double mass = 0.0;
        for (double p : joint) mass += p;
        std::vector<double> cond(joint.size(), 0.0);
        for (std::size_t y = 0; y < joint.size(); ++y) cond[y] = mass > 0.0 ? joint[y] / mass : 0.0;
        fitted[v] = std::move(cond);
    }
    double xent = 0.0;
    for (std::size_t i = 0; i < task.support.size(); ++i) {
        const auto& e = task.support[i];
        const auto& cond = fitted[masked_view(task, scheme, i, complement)];
        const double q = std::max(cond[e.label], 1e-300);
        xent += e.prob * -std::log2(q);
    }
    return xent;
}

}  // namespace detail

// Value of the combined objective for one masking scheme, everything exact:
// J = H(Y|R) + lambda_g * max{H(Y|R) - H(Y|R^c) + margin, 0}
//   + lambda_s * E[max{|z| - budget, 0}] + lambda_cont * E[max{T(z) - 2*c_pieces, 0}].
inline SchemeScore score_scheme(const FiniteTask& task, const MaskScheme& scheme, const GameConfig& cfg,
                                OracleObjective form, double margin_bits = -1.0) {
    const double margin = margin_bits >= 0.0 ? margin_bits : default_margin_bits(task);
    SchemeScore s;
    if (form == OracleObjective::entropy_form) {
        s.h_y_given_r = entropy_given_rationale(task, scheme);
        s.h_y_given_rc = entropy_given_complement(task, scheme);
    } else {
        s.h_y_given_r = detail::lookup_predictor_xent(task, scheme, false);
        s.h_y_given_rc = detail::lookup_predictor_xent(task, scheme, true);
    }
    s.gap_term = std::max(s.h_y_given_r - s.h_y_given_rc + margin, 0.0);
    const double budget = cfg.sparsity_budget(task.seq_len());
    const double max_trans = static_cast<double>(cfg.max_transitions());
    for (std::size_t i = 0; i < task.support.size(); ++i) {
        const auto& z = scheme.masks[i];
        const double p = task.support[i].prob;
        s.sparsity_term += p * std::max(static_cast<double>(selected_count(z)) - budget, 0.0);
        s.continuity_term += p * std::max(static_cast<double>(transition_count(z)) - max_trans, 0.0);
    }
    s.objective = s.h_y_given_r + cfg.lambda_g * s.gap_term + cfg.lambda_s * s.sparsity_term +
                  cfg.lambda_cont * s.continuity_term;
    return s;
}

struct EnumerationResult {
    double best_objective = 0.0;
    std::vector<MaskScheme> minimizers;
    std::vector<SchemeScore> minimizer_scores;
    std::uint64_t candidates = 0;
    double margin = 0.0;
};

// Exhaustive search over all 2^(L*|support|) deterministic masking schemes.
// Refuses anything above 2^24 candidates. Ties within 1e-12 of the optimum
// are all reported, in candidate order.
inline EnumerationResult enumerate_best_masks(const FiniteTask& task, const GameConfig& cfg,
                                              OracleObjective form, double margin_bits = -1.0) {
    task.validate();
    const std::size_t bits = task.seq_len() * task.support.size();
    if (bits > 24) {
        throw FeasibilityError("enumeration needs 2^" + std::to_string(bits) +
                               " candidates; the limit is 2^24");
    }
    const std::uint64_t total = std::uint64_t(1) << bits;
    const double margin = margin_bits >= 0.0 ? margin_bits : default_margin_bits(task);
    const std::size_t L = task.seq_len();
    const std::size_t n = task.support.size();

    auto scheme_at = [&](std::uint64_t code) {
        MaskScheme scheme;
        scheme.masks.assign(n, std::vector<int>(L, 0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < L; ++j) {
                scheme.masks[i][j] = static_cast<int>((code >> (i * L + j)) & 1u);
            }
        }
        return scheme;
    };

    std::vector<double> objectives(total);
    parallel_for(total, [&](std::size_t code) {
        objectives[code] = score_scheme(task, scheme_at(code), cfg, form, margin).objective;
    });

    EnumerationResult res;
    res.candidates = total;
    res.margin = margin;
    res.best_objective = objectives[0];
    for (std::uint64_t code = 1; code < total; ++code) {
        res.best_objective = std::min(res.best_objective, objectives[code]);
    }
    constexpr double kTieTol = 1e-12;
    for (std::uint64_t code = 0; code < total; ++code) {
        if (objectives[code] <= res.best_objective + kTieTol) {
            MaskScheme scheme = scheme_at(code);
            res.minimizer_scores.push_back(score_scheme(task, scheme, cfg, form, margin));
            res.minimizers.push_back(std::move(scheme));
        }
    }
    return res;
}

}  // namespace rgame
