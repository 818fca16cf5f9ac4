#pragma once

#include <cstdint>
#include <random>

namespace switchkit {

using Rng = std::mt19937_64;

// splitmix64 step; used to turn (seed, path index) into decorrelated seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per replication. Results are then invariant under the
// number of worker threads, only under the (seed, path) pair.
inline Rng path_rng(std::uint64_t seed, std::uint64_t path_index) {
    return Rng(splitmix64(splitmix64(seed) ^ (path_index + 0x9e3779b97f4a7c15ULL)));
}

// uniform on the open interval (0,1); never returns 0 or 1
inline double uniform01(Rng& rng) {
    for (;;) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        if (u > 0.0 && u < 1.0) return u;
    }
}

}  // namespace switchkit
