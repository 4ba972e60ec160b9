#pragma once

#include <cstdint>

namespace sgds {

// Counter-based stream: every draw is a pure function of (seed, counter), so
// block-parallel and serial evaluation orders produce identical numbers.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))), counter_(0)
    {
    }

    std::uint64_t next_u64() { return mix(seed_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    void jump_to(std::uint64_t counter) { counter_ = counter; }

private:
    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace sgds
