#pragma once

#include <cstdint>

namespace stochrc {

// SplitMix64 (Steele/Lea/Flood). Pinned as the project's generator so that
// seeded results are bit-identical across platforms and standard libraries;
// std::uniform_real_distribution is implementation-defined and must not be
// used anywhere results are persisted or golden-tested.
//
// Full 2^64 period, counter-based state, trivially splittable by seed mixing.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform on [-1, 1).
    double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

private:
    std::uint64_t state_;
};

// Deterministic substream derivation: stream `index` of a master seed.
// Used for per-run, per-sample and per-grid-point seeding so that results
// are independent of scheduling and worker count.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    SplitMix64 g(master + 0x9e3779b97f4a7c15ull * (index + 1));
    return g.next();
}

} // namespace stochrc
