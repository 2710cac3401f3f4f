#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>

namespace qhier {

// Counter-free splitmix64 stream. Chosen over std::mt19937 because the
// standard distributions are not bit-stable across library versions and
// every report here must be byte-identical under a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive an independent named sub-stream, e.g. Rng(7).stream("fock").
    Rng stream(std::string_view name) const
    {
        std::uint64_t h = 1469598103934665603ull; // FNV-1a
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return Rng(mix(state_ ^ h));
    }

    /// Sub-stream by index (e.g. one per trajectory).
    Rng stream(std::uint64_t index) const
    {
        return Rng(mix(state_ + 0x632BE59BD9B4E019ull * (index + 1)));
    }

    std::uint64_t next_u64()
    {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Complex normal with unit total variance.
    std::complex<double> normal_complex()
    {
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        return {normal() * inv_sqrt2, normal() * inv_sqrt2};
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qhier
