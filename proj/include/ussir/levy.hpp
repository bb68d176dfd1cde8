// Intensity measure of the Poisson random measure N(dt, du) on R \ {0}.
#pragma once

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ussir {

/// Small jumps {|u| < 1} enter compensated; large jumps {|u| >= 1} do not.
enum class JumpRegion { small, large };

inline const char *to_string(JumpRegion r) { return r == JumpRegion::small ? "small" : "large"; }

inline bool in_region(double u, JumpRegion r) {
    return r == JumpRegion::small ? std::abs(u) < 1.0 : std::abs(u) >= 1.0;
}

struct JumpBatch {
    JumpRegion region = JumpRegion::small;
    std::vector<double> marks;
};

/// Piecewise-uniform density on a bounded support. The default is the
/// Lebesgue measure restricted to [-2, 2].
class LevyMeasure {
public:
    struct Piece {
        double lo;
        double hi;
        double density;
    };

    /// One interval of the measure restricted to a region.
    struct Segment {
        double lo;
        double hi;
        double density;
        double mass() const { return (hi - lo) * density; }
    };

    LevyMeasure() : LevyMeasure(uniform(-2.0, 2.0)) {}

    static LevyMeasure uniform(double lo, double hi, double density = 1.0) { return LevyMeasure({{lo, hi, density}}); }

    /// A measure with no mass; every region is empty.
    static LevyMeasure none() { return LevyMeasure(std::vector<Piece>{}); }

    explicit LevyMeasure(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
        for (const Piece &p : pieces_) {
            if (!(p.lo < p.hi) || !std::isfinite(p.lo) || !std::isfinite(p.hi))
                throw std::invalid_argument("LevyMeasure: each piece needs finite lo < hi");
            if (!(p.density >= 0.0) || !std::isfinite(p.density))
                throw std::invalid_argument("LevyMeasure: density must be finite and non-negative");
        }
        for (JumpRegion r : {JumpRegion::small, JumpRegion::large}) {
            auto &segs = segments_[index(r)];
            for (const Piece &p : pieces_) {
                if (p.density == 0.0) continue;
                if (r == JumpRegion::small) {
                    push(segs, std::max(p.lo, -1.0), std::min(p.hi, 1.0), p.density);
                } else {
                    push(segs, p.lo, std::min(p.hi, -1.0), p.density);
                    push(segs, std::max(p.lo, 1.0), p.hi, p.density);
                }
            }
            double m = 0.0;
            for (const Segment &s : segs) m += s.mass();
            mass_[index(r)] = m;
        }
    }

    const std::vector<Piece> &pieces() const { return pieces_; }
    const std::vector<Segment> &segments(JumpRegion r) const { return segments_[index(r)]; }

    /// nu(region).
    double region_mass(JumpRegion r) const { return mass_[index(r)]; }

    double total_mass() const { return region_mass(JumpRegion::small) + region_mass(JumpRegion::large); }

    /// Integral of (1 ^ |u|^2) nu(du); finite for any bounded support.
    double levy_integral() const {
        double total = 0.0;
        for (const Segment &s : segments(JumpRegion::small))
            total += s.density * (s.hi * s.hi * s.hi - s.lo * s.lo * s.lo) / 3.0;
        return total + region_mass(JumpRegion::large);
    }

    /// One mark drawn from nu restricted to the region, normalised.
    double sample_mark(JumpRegion r, Rng &rng) const {
        const auto &segs = segments(r);
        double pick = rng.uniform() * region_mass(r);
        for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
            if (pick < segs[i].mass()) return segs[i].lo + (segs[i].hi - segs[i].lo) * rng.uniform();
            pick -= segs[i].mass();
        }
        const Segment &last = segs.back();
        return last.lo + (last.hi - last.lo) * rng.uniform();
    }

    /// Midpoint nodes (u, weight) over the region, `per_segment` per segment.
    /// Weights sum to region_mass.
    std::vector<std::pair<double, double>> quadrature(JumpRegion r, std::size_t per_segment = 1000) const {
        std::vector<std::pair<double, double>> nodes;
        for (const Segment &s : segments(r)) {
            const double h = (s.hi - s.lo) / static_cast<double>(per_segment);
            for (std::size_t k = 0; k < per_segment; ++k)
                nodes.emplace_back(s.lo + (static_cast<double>(k) + 0.5) * h, h * s.density);
        }
        return nodes;
    }

    template <class F> double integrate(JumpRegion r, F &&f, std::size_t per_segment = 1000) const {
        double total = 0.0;
        for (const auto &[u, w] : quadrature(r, per_segment)) total += w * f(u);
        return total;
    }

private:
    static std::size_t index(JumpRegion r) { return r == JumpRegion::small ? 0 : 1; }

    static void push(std::vector<Segment> &segs, double lo, double hi, double density) {
        if (lo < hi) segs.push_back({lo, hi, density});
    }

    std::vector<Piece> pieces_;
    std::vector<Segment> segments_[2];
    double mass_[2] = {0.0, 0.0};
};

/// Points of N falling in `region` during one step of length dt: a
/// Poisson(nu(region) dt) count of i.i.d. marks. Deterministic in the rng
/// state; draws nothing from rng beyond the count when the region is empty.
inline JumpBatch sample_jumps(const LevyMeasure &m, JumpRegion region, double dt, Rng &rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_jumps: dt must be positive");
    JumpBatch batch{region, {}};
    const double mass = m.region_mass(region);
    if (mass == 0.0) return batch;
    const std::uint64_t count = rng.poisson(mass * dt);
    batch.marks.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) batch.marks.push_back(m.sample_mark(region, rng));
    return batch;
}

} // namespace ussir
