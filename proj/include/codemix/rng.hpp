#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace codemix {

// Deterministic RNG wrapper. Uniform doubles are derived from raw mt19937_64
// draws instead of std::uniform_real_distribution, whose output is not
// specified by the standard; this keeps seeded runs bit-identical across
// compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    std::size_t index(std::size_t n) {
        std::size_t i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace codemix
