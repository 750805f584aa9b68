#ifndef GFD_RNG_HPP
#define GFD_RNG_HPP

#include <cstdint>
#include <random>

namespace gfd {

// splitmix64 step, used to mix stream identifiers into seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic substream derived from (seed, a, b, c). Draws from one
// substream are independent of how many draws other substreams made, so
// results do not depend on evaluation order across iterations or samples.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix64(seed);
    s = mix64(s ^ mix64(a));
    s = mix64(s ^ mix64(b));
    s = mix64(s ^ mix64(c));
    return std::mt19937_64(s);
}

// Fresh distribution objects per call: normal_distribution caches a spare
// deviate internally, which would leak state between substreams.
inline double draw_normal(std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

inline double draw_uniform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

}  // namespace gfd

#endif
