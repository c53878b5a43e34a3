#pragma once

// Keyed random streams. Every (seed, replication, stream id) triple gets its
// own engine, so a channel's trajectory never depends on how many draws other
// parts of the simulation made. Variates are built from raw 64-bit output so
// results are identical across standard libraries.

#include <cmath>
#include <cstdint>
#include <random>

namespace chansel {

inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Hashes a sequence of keys into one 64-bit value.
inline constexpr std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0)
{
    return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

class RandomStream {
public:
    RandomStream() : engine_(0) {}
    RandomStream(std::uint64_t seed, std::uint64_t replication, std::uint64_t stream)
    {
        const std::uint64_t key = mix_keys(seed, replication, stream);
        std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(replication)};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential with the given rate.
    double exponential(double rate)
    {
        // 1 - uniform() lies in (0, 1]
        return -std::log(1.0 - uniform()) / rate;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace chansel
