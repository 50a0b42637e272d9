#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "rgame/players.hpp"

namespace rgame {

// Loss pieces of the selection game, all on the generator's side. Cross
// entropies arrive from the predictors; the three structural terms depend
// only on the mask.

// hinge on the gap between the two predictors' losses
inline double gap_loss(double loss_p, double loss_c, double h) {
    return std::max(loss_p - loss_c + h, 0.0);
}

// hinge on selected count over the budget
inline double sparsity_loss(std::span<const int> z, double budget) {
    return std::max(static_cast<double>(selected_count(z)) - budget, 0.0);
}

// per-adjacent-pair hinge; with a binary mask each |z_i - z_{i-1}| is 0 or 1,
// so allowance c >= 1 zeroes the term and c = 0 counts transitions
inline double continuity_loss(std::span<const int> z, double allowance) {
    double total = 0.0;
    int prev = 0;
    for (int b : z) {
        total += std::max(std::abs(b - prev) - allowance, 0.0);
        prev = b;
    }
    return total;
}

struct LossBreakdown {
    double loss_p = 0.0;
    double loss_c = 0.0;
    double loss_gap = 0.0;
    double loss_sparsity = 0.0;
    double loss_continuity = 0.0;
    double total = 0.0;
};

inline LossBreakdown generator_objective(double loss_p, double loss_c, std::span<const int> z,
                                         const GameConfig& cfg) {
    LossBreakdown b;
    b.loss_p = loss_p;
    b.loss_c = loss_c;
    b.loss_gap = gap_loss(loss_p, loss_c, cfg.h);
    b.loss_sparsity = sparsity_loss(z, cfg.sparsity_budget(z.size()));
    b.loss_continuity = continuity_loss(z, cfg.c);
    b.total = loss_p + cfg.lambda_g * b.loss_gap + cfg.lambda_s * b.loss_sparsity +
              cfg.lambda_cont * b.loss_continuity;
    return b;
}

// Policy-gradient reward for one sampled mask. Losses are replaced by 0/1
// accuracies so the reward stays bounded; structural penalties are divided by
// the sequence length for the same reason. With the default zero margin,
// |reward| never exceeds 1 + lambda_g + lambda_s + 2 * lambda_cont.
inline double sample_reward(bool pred_correct, bool comp_correct, std::span<const int> z,
                            const GameConfig& cfg) {
    const double a_p = pred_correct ? 1.0 : 0.0;
    const double a_c = comp_correct ? 1.0 : 0.0;
    const double inv_l = 1.0 / static_cast<double>(z.size());
    double r = a_p;
    r -= cfg.lambda_g * std::max(a_c - a_p + cfg.h_r, 0.0);
    r -= cfg.lambda_s * sparsity_loss(z, cfg.sparsity_budget(z.size())) * inv_l;
    r -= cfg.lambda_cont * continuity_loss(z, cfg.c) * inv_l;
    return r;
}

}  // namespace rgame
