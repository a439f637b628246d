#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace oscbound {

/// Stateless counter-based generator: each (seed, index, dim) triple maps
/// through a splitmix64-style finalizer to one uniform double in [0, 1).
/// Sampling loops can be partitioned across workers arbitrarily without
/// changing a single draw.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t index, std::uint64_t dim) const {
        std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (index * 64 + dim + 1);
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    [[nodiscard]] double uniform(std::uint64_t index, std::uint64_t dim) const {
        return static_cast<double>(bits(index, dim) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
};

/// Sobol low-discrepancy sequence for up to 3 dimensions (direction
/// numbers from the standard primitive polynomials x+1 and x^2+x+1),
/// Gray-code order. point(i) is the i-th element with i >= 1; index 0
/// (the origin) is skipped by convention.
class Sobol {
public:
    explicit Sobol(int dim) : dim_(dim) {
        if (dim < 1 || dim > 3) throw std::invalid_argument("sobol sequence supports 1..3 dims");
        // dimension 0: van der Corput, v_j = 2^{-j}
        for (int j = 0; j < kBits; ++j) v_[0][j] = 1ULL << (kBits - 1 - j);
        if (dim_ >= 2) init_direction(1, /*s=*/1, /*a=*/0, {1});
        if (dim_ >= 3) init_direction(2, /*s=*/2, /*a=*/1, {1, 3});
    }

    /// i-th point (i >= 1), components in [0, 1).
    [[nodiscard]] std::array<double, 3> point(std::uint64_t i) const {
        std::array<double, 3> p{};
        for (int d = 0; d < dim_; ++d) {
            std::uint64_t x = 0;
            std::uint64_t gray = i ^ (i >> 1);
            for (int j = 0; j < kBits && gray; ++j, gray >>= 1)
                if (gray & 1ULL) x ^= v_[d][j];
            p[d] = static_cast<double>(x) * 0x1.0p-32;
        }
        return p;
    }

private:
    static constexpr int kBits = 32;

    void init_direction(int d, int s, std::uint32_t a, std::vector<std::uint32_t> m) {
        for (int j = 0; j < s; ++j) v_[d][j] = static_cast<std::uint64_t>(m[j]) << (kBits - 1 - j);
        for (int j = s; j < kBits; ++j) {
            std::uint64_t v = v_[d][j - s] ^ (v_[d][j - s] >> s);
            for (int t = 1; t < s; ++t)
                if ((a >> (s - 1 - t)) & 1U) v ^= v_[d][j - t];
            v_[d][j] = v;
        }
    }

    int dim_;
    std::uint64_t v_[3][kBits] = {};
};

} // namespace oscbound
