#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace geoval {

// splitmix64 step; used both as a stream mixer and to seed the generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Portable seedable generator (xoshiro256++). All randomness in the
/// project flows through this class so that results are bit-reproducible
/// across platforms; substreams are derived by hashing a path of indices
/// into the seed (one substream per process column, fold, sweep cell, ...).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    /// Derive a deterministic substream seed from a base seed and a path
    /// of stream indices.
    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t s = seed;
        for (std::uint64_t p : path) {
            s ^= splitmix64(p) + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
            (void)splitmix64(s);
        }
        return s;
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log argument.
    double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (portable, unlike std::normal_distribution).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = mag * std::sin(ang);
        have_spare_ = true;
        return mag * std::cos(ang);
    }

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace geoval
