#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

namespace sampsize {

// (seed, stream) fully determines a random sequence. Child streams are
// derived deterministically, so jobs can be scheduled in any order.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    RngSeed child(std::uint64_t index) const;

    friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

using Engine = std::mt19937_64;

Engine make_engine(const RngSeed& seed);

// Uniform on the open interval (0, 1).
double uniform_open(Engine& engine);

// Standard normal draw via the inverse CDF.
double standard_normal(Engine& engine);

// Uniform integer in [0, bound), unbiased.
std::uint64_t uniform_index(Engine& engine, std::uint64_t bound);

// Fisher-Yates shuffle driven by uniform_index.
template <typename It>
void shuffle(It first, It last, Engine& engine) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_index(engine, i);
        std::iter_swap(first + (i - 1), first + j);
    }
}

}  // namespace sampsize
