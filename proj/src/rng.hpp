#pragma once

#include <cstdint>
#include <random>

namespace ssde {

// Splittable seeding: (master seed, replication index) -> independent stream.
// Replications may therefore run in any order, or in parallel, and still
// produce bit-identical results.
struct ReplicationSeed {
    std::uint64_t master = 0;
    std::uint64_t index = 0;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive a generator for one replication stream. The master seed is mixed
// with the replication index through splitmix64 before seeding the engine,
// so neighbouring indices give decorrelated streams.
inline std::mt19937_64 make_stream(ReplicationSeed seed) {
    std::uint64_t s = seed.master;
    std::uint64_t a = splitmix64(s);
    s ^= seed.index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64(s);
    std::uint64_t c = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    return std::mt19937_64(seq);
}

} // namespace ssde
