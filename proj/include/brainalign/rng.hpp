#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace brainalign {

// Counter-based generator: every draw is a pure function of
// (key, stream, counter), so any partitioning of work over threads sees the
// same values. The mixer is the SplitMix64 finalizer.
struct CounterHash {
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t at(std::uint64_t key, std::uint64_t stream, std::uint64_t counter) noexcept
    {
        const std::uint64_t k = mix(key + kGolden);
        const std::uint64_t s = mix(k ^ (stream * kGolden + 0x632be59bd9b4e019ULL));
        return mix(s + (counter + 1) * kGolden);
    }
};

class RandomStream {
public:
    RandomStream(std::uint64_t key, std::uint64_t stream) noexcept : key_(key), stream_(stream) {}

    std::uint64_t next_u64() noexcept { return CounterHash::at(key_, stream_, counter_++); }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept
    {
        if (n <= 1)
            return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller.
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace brainalign
