#include "sampsize/rng.hpp"

#include "sampsize/special.hpp"

namespace sampsize {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngSeed RngSeed::child(std::uint64_t index) const {
    return {seed, splitmix64(splitmix64(stream) ^ splitmix64(index + 0x632be59bd9b4e019ULL))};
}

Engine make_engine(const RngSeed& s) {
    const std::uint64_t a = splitmix64(s.seed);
    const std::uint64_t b = splitmix64(s.stream ^ 0xd1b54a32d192ed03ULL);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Engine(seq);
}

double uniform_open(Engine& engine) {
    // 53 random bits, shifted by half an ulp so 0 and 1 never occur.
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Engine& engine) {
    return special::normal_quantile(uniform_open(engine));
}

std::uint64_t uniform_index(Engine& engine, std::uint64_t bound) {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
        const std::uint64_t r = engine();
        if (r >= limit) return r % bound;
    }
}

}  // namespace sampsize
