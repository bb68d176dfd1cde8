// Random streams for path simulation.
//
// Each path owns an Rng seeded with stream_seed(master, path_index). The
// engine is std::mt19937_64, whose output sequence is fixed by the standard;
// the distributions below are written out here because the std::
// distributions are implementation-defined, and trajectories must be
// bit-identical across standard libraries.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ussir {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of stream `index` under master seed `master`.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() {
        for (;;) {
            const double v = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
            if (v > 0.0) return v;
        }
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal by Box-Muller; the second variate of each pair is kept
    /// for the next call.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Poisson(mean) by sequential inversion; large means are split into
    /// independent chunks so exp(-chunk) never underflows.
    std::uint64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        constexpr double kChunk = 16.0;
        std::uint64_t total = 0;
        while (mean > kChunk) {
            total += poisson_small(kChunk);
            mean -= kChunk;
        }
        return total + poisson_small(mean);
    }

    std::uint64_t bits() { return engine_(); }

private:
    std::uint64_t poisson_small(double mean) {
        const double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            const double next = cdf + p;
            if (next == cdf) break; // tail below double resolution
            cdf = next;
        }
        return k;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace ussir
