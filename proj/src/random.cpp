#include "cgldp/random.hpp"

namespace cgldp {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) noexcept {
    std::uint64_t st = seed;
    for (auto& w : s_) w = splitmix64(st);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t st = master;
    std::uint64_t h = splitmix64(st);
    for (std::uint64_t k : keys) {
        st = h ^ k;
        h = splitmix64(st);
    }
    return h;
}

Streams Streams::derive(std::uint64_t master_seed, std::uint64_t n, std::uint64_t batch) {
    return Streams(StreamSeeds{derive_seed(master_seed, {n, batch, 0}),
                               derive_seed(master_seed, {n, batch, 1})});
}

}  // namespace cgldp
