#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>

#include "rgame/errors.hpp"
#include "rgame/rng.hpp"
#include "rgame/tensor.hpp"

namespace rgame {

// Named parameter collection with shape-aligned gradient and Adam moment
// buffers. std::map keeps iteration order stable across runs, which makes
// every whole-set operation (updates, serialization, grad checks) deterministic.
struct ParamSet {
    std::map<std::string, Tensor2> values;
    std::map<std::string, Tensor2> grads;
    std::map<std::string, Tensor2> m1;  // first moments
    std::map<std::string, Tensor2> m2;  // second moments
    std::size_t adam_step = 0;

    Tensor2& add(const std::string& name, std::size_t rows, std::size_t cols) {
        values[name] = Tensor2(rows, cols);
        grads[name] = Tensor2(rows, cols);
        m1[name] = Tensor2(rows, cols);
        m2[name] = Tensor2(rows, cols);
        return values[name];
    }

    bool has(const std::string& name) const { return values.count(name) != 0; }

    Tensor2& value(const std::string& name) {
        auto it = values.find(name);
        if (it == values.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }
    const Tensor2& value(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }
    Tensor2& grad(const std::string& name) {
        auto it = grads.find(name);
        if (it == grads.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }

    void zero_grads() {
        for (auto& [name, g] : grads) g.fill(0.0);
    }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& [name, v] : values) n += v.size();
        return n;
    }
};

inline void init_uniform(ParamSet& p, const std::string& name, double scale, Rng& rng) {
    Tensor2& t = p.value(name);
    for (double& x : t.data) x = rng.uniform(-scale, scale);
}

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One Adam step over every tensor in the set, with bias correction.
// Gradients are zeroed afterwards; a non-finite gradient aborts with the
// offending parameter's name before any tensor is touched.
inline void adam_update(ParamSet& p, const AdamConfig& cfg) {
    for (const auto& [name, g] : p.grads) {
        for (double x : g.data) {
            if (!std::isfinite(x)) {
                throw DivergenceError("non-finite gradient in parameter " + name);
            }
        }
    }
    p.adam_step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.adam_step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.adam_step));
    for (auto& [name, v] : p.values) {
        Tensor2& g = p.grads[name];
        Tensor2& m = p.m1[name];
        Tensor2& s = p.m2[name];
        for (std::size_t i = 0; i < v.size(); ++i) {
            m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
            s.data[i] = cfg.beta2 * s.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
            const double mhat = m.data[i] / bc1;
            const double shat = s.data[i] / bc2;
            v.data[i] -= cfg.lr * mhat / (std::sqrt(shat) + cfg.eps);
        }
        g.fill(0.0);
    }
}

}  // namespace rgame
