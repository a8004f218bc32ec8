#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace chfe {

/// Counter-based generator: draw k of stream s under seed x is a pure function of (x, s, k).
/// No hidden state beyond the counter, so parallel workers can own disjoint streams.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() { return at(counter_++); }

    std::uint64_t at(std::uint64_t k) const
    {
        std::uint64_t z = mix(seed_ ^ mix(stream_ + 0x9e3779b97f4a7c15ULL)) + k * 0x9e3779b97f4a7c15ULL;
        return mix(z);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal by Box-Muller; the second variate is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        spare_ = rad * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return rad * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t counter() const { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace chfe
