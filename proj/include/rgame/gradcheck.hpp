#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "rgame/params.hpp"
#include "rgame/rng.hpp"

namespace rgame {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

// Central-difference check of analytic gradients. `loss_fn` evaluates the
// scalar loss at the current parameter values without touching gradients;
// `grad_fn` runs the backward pass, leaving gradients in p.grads. Up to
// `per_tensor` coordinates of each tensor are probed (chosen by rng so huge
// embeddings stay cheap); relative error uses a small floor so near-zero
// coordinate pairs do not explode the ratio.
inline GradCheckReport grad_check(const std::function<double()>& loss_fn,
                                  const std::function<void()>& grad_fn, ParamSet& p, double eps,
                                  Rng& rng, std::size_t per_tensor = 24) {
    p.zero_grads();
    grad_fn();

    GradCheckReport rep;
    for (auto& [name, v] : p.values) {
        const Tensor2& g = p.grads[name];
        std::vector<std::size_t> idx;
        if (v.size() <= per_tensor) {
            for (std::size_t i = 0; i < v.size(); ++i) idx.push_back(i);
        } else {
            for (std::size_t k = 0; k < per_tensor; ++k) idx.push_back(rng.uniform_index(v.size()));
        }
        for (std::size_t i : idx) {
            const double saved = v.data[i];
            v.data[i] = saved + eps;
            const double lp = loss_fn();
            v.data[i] = saved - eps;
            const double lm = loss_fn();
            v.data[i] = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            const double analytic = g.data[i];
            const double denom = std::max(std::abs(numeric), std::abs(analytic)) + 1e-8;
            const double rel = std::abs(numeric - analytic) / denom;
            rep.checked += 1;
            if (rel > rep.max_rel_error) {
                rep.max_rel_error = rel;
                rep.worst_param = name;
                rep.worst_index = i;
            }
        }
    }
    p.zero_grads();
    return rep;
}

}  // namespace rgame
