#pragma once

#include <cstdint>
#include <initializer_list>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace cgldp {

/// SplitMix64 finalizer; used to expand and decorrelate seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// xoshiro256++ (Blackman & Vigna), a UniformRandomBitGenerator with a
/// fixed, platform-independent output sequence.
class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept {
        const std::uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

    bool operator==(const Xoshiro256pp&) const = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

using Rng = Xoshiro256pp;

/// Deterministic seed from a master seed and a key path, e.g.
/// derive_seed(master, {n, batch, stream}).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept;

struct StreamSeeds {
    std::uint64_t prior = 0;
    std::uint64_t noise = 0;

    bool operator==(const StreamSeeds&) const = default;
};

/// Independent sub-streams for the conditioning draw and the Gaussian noise.
struct Streams {
    StreamSeeds seeds;
    Rng prior;
    Rng noise;

    explicit Streams(StreamSeeds s) : seeds(s), prior(s.prior), noise(s.noise) {}

    /// Streams of batch `batch` at ladder rung n.
    static Streams derive(std::uint64_t master_seed, std::uint64_t n, std::uint64_t batch);
};

// Inline: these sit in the innermost simulation loop. Boost's ziggurat
// sampler keeps no state between calls, so a fresh distribution is free.
inline double standard_normal(Rng& rng) {
    boost::random::normal_distribution<double> nd;
    return nd(rng);
}

inline double uniform01(Rng& rng) {
    boost::random::uniform_01<double> u;
    return u(rng);
}

}  // namespace cgldp
