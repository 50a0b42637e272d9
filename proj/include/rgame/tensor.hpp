#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rgame/errors.hpp"

namespace rgame {

// Dense row-major matrix of doubles. Vectors are plain std::vector<double>;
// a Tensor2 with cols == 1 is used where a named parameter must be a tensor.
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    std::string shape_str() const {
        return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
    }
};

inline void require_same_shape(const Tensor2& a, const Tensor2& b, const char* where) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
}

}  // namespace rgame
