#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace doseopt {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Folds a root seed and a path of keys into an independent stream seed, so a
// draw depends only on its coordinates and never on execution order.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t h = mix64(seed);
    for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

// mt19937_64 output is fully specified by the standard; the distributions in
// <random> are not, so uniform and binomial draws are built here.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint32_t binomial(std::uint32_t trials, double p)
    {
        std::uint32_t hits = 0;
        for (std::uint32_t i = 0; i < trials; ++i)
            if (uniform() < p) ++hits;
        return hits;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace doseopt
