#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace rgame {

// splitmix64 finalizer; used to derive independent per-component seeds
// from one master seed so adding a consumer never shifts another's stream.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic RNG: mt19937_64 (bit-stream fixed by the standard) plus
// hand-rolled distributions, since std::uniform_* distributions are not
// reproducible across standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform on [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // uniform on {0, ..., n-1}; n must be positive
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace rgame
