#ifndef PACING_RNG_HPP
#define PACING_RNG_HPP

#include <cstdint>
#include <random>

namespace pacing {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent generator for one (seed, stream) pair. Each control cycle draws
/// from its own stream, so two runs with the same seed see identical traffic in
/// every cycle no matter how their controllers behaved earlier.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(seed)};
    return std::mt19937_64(seq);
}

}  // namespace pacing

#endif  // PACING_RNG_HPP
