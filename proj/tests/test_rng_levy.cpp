#include "ussir/levy.hpp"
#include "ussir/models.hpp"
#include "ussir/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace ussir;

TEST(Rng, StreamSeedsAreDistinctAndStable) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(stream_seed(1, i));
    EXPECT_EQ(seen.size(), 10000u);
    EXPECT_EQ(stream_seed(1, 0), stream_seed(1, 0));
    EXPECT_NE(stream_seed(1, 0), stream_seed(2, 0));
}

TEST(Rng, EngineMatchesStandardSequence) {
    // The 10000th output of a default-seeded mt19937_64 is fixed by the standard.
    std::mt19937_64 e;
    e.discard(9999);
    EXPECT_EQ(e(), 9981545732273789042ULL);
}

TEST(Rng, UniformIsOpenInterval) {
    Rng r(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, NormalMoments) {
    Rng r(11);
    const int n = 400000;
    double m = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        m += z, m2 += z * z, m4 += z * z * z * z;
    }
    m /= n, m2 /= n, m4 /= n;
    EXPECT_NEAR(m, 0.0, 4 / std::sqrt(n));
    EXPECT_NEAR(m2, 1.0, 4 * std::sqrt(2.0 / n));
    EXPECT_NEAR(m4, 3.0, 4 * std::sqrt(96.0 / n));
}

TEST(Rng, PoissonMeanAndVarianceAcrossRegimes) {
    for (double mean : {0.002, 0.5, 4.0, 40.0}) {
        Rng r(static_cast<std::uint64_t>(mean * 1000));
        const int n = 200000;
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i) {
            const double k = static_cast<double>(r.poisson(mean));
            s += k, s2 += k * k;
        }
        const double m = s / n, v = s2 / n - m * m;
        EXPECT_NEAR(m, mean, 5 * std::sqrt(mean / n)) << mean;
        EXPECT_NEAR(v / mean, 1.0, 0.05) << mean;
    }
    Rng r(1);
    EXPECT_EQ(r.poisson(0.0), 0u);
}

TEST(Levy, PaperMeasureRegionMasses) {
    const LevyMeasure m;
    EXPECT_EQ(m.region_mass(JumpRegion::small), 2.0);
    EXPECT_EQ(m.region_mass(JumpRegion::large), 2.0);
    EXPECT_EQ(m.total_mass(), 4.0);
}

TEST(Levy, NarrowSupportHasNoLargeRegion) {
    const auto m = LevyMeasure::uniform(-0.5, 0.5);
    EXPECT_EQ(m.region_mass(JumpRegion::large), 0.0);
    EXPECT_EQ(m.region_mass(JumpRegion::small), 1.0);
}

TEST(Levy, LevyIntegralIsFinite) {
    // int_{-1}^{1} u^2 du + 2 = 2/3 + 2.
    EXPECT_NEAR(LevyMeasure().levy_integral(), 2.0 / 3.0 + 2.0, 1e-15);
}

TEST(Levy, PropertyRegionMassesAddUp) {
    Rng r(5);
    for (int i = 0; i < 500; ++i) {
        const double lo = r.uniform(-5, 5), hi = lo + r.uniform(0.01, 5), d = r.uniform(0, 3);
        const auto m = LevyMeasure::uniform(lo, hi, d);
        EXPECT_NEAR(m.total_mass(), (hi - lo) * d, 1e-12);
    }
}

TEST(Levy, SampledMarksStayInRegion) {
    const LevyMeasure m;
    Rng r(8);
    for (int i = 0; i < 20000; ++i) {
        const double s = m.sample_mark(JumpRegion::small, r), l = m.sample_mark(JumpRegion::large, r);
        ASSERT_TRUE(in_region(s, JumpRegion::small));
        ASSERT_TRUE(in_region(l, JumpRegion::large));
        ASSERT_LE(std::abs(l), 2.0);
    }
}

TEST(Levy, LargeMarksAreUniformOnBothSides) {
    const LevyMeasure m;
    Rng r(9);
    const int n = 200000;
    int negative = 0;
    double abs_sum = 0;
    for (int i = 0; i < n; ++i) {
        const double u = m.sample_mark(JumpRegion::large, r);
        negative += u < 0;
        abs_sum += std::abs(u);
    }
    EXPECT_NEAR(negative / double(n), 0.5, 0.005);
    EXPECT_NEAR(abs_sum / n, 1.5, 0.005);
}

TEST(Levy, MeanJumpCountPerStep) {
    const LevyMeasure m;
    Rng r(2024);
    const int calls = 1'000'000;
    std::size_t total = 0;
    for (int i = 0; i < calls; ++i) total += sample_jumps(m, JumpRegion::small, 0.001, r).marks.size();
    EXPECT_NEAR(total / double(calls) / 0.002, 1.0, 0.01);
}

TEST(Levy, EmptyRegionDrawsNothing) {
    const auto m = LevyMeasure::uniform(-0.5, 0.5);
    Rng a(1), b(1);
    for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_jumps(m, JumpRegion::large, 1.0, a).marks.empty());
    EXPECT_EQ(a.bits(), b.bits());
}

TEST(Levy, BatchesAreReproducible) {
    const LevyMeasure m;
    Rng a(77), b(77);
    for (int i = 0; i < 1000; ++i) {
        const auto x = sample_jumps(m, JumpRegion::large, 0.5, a), y = sample_jumps(m, JumpRegion::large, 0.5, b);
        ASSERT_EQ(x.marks, y.marks);
    }
    EXPECT_THROW(sample_jumps(m, JumpRegion::small, 0.0, a), std::invalid_argument);
}

TEST(Levy, QuadratureIntegratesConstantsExactly) {
    const LevyMeasure m;
    EXPECT_NEAR(m.integrate(JumpRegion::small, [](double) { return 3.0; }), 6.0, 1e-12);
    EXPECT_NEAR(m.integrate(JumpRegion::large, [](double u) { return u * u; }), 2.0 * 7.0 / 3.0, 1e-6);
}

namespace {

Ex1Params table1() {
    using expr::TimeFunction;
    Ex1Params p{TimeFunction::parse("0.3+0.1*sin(4*t)"),   TimeFunction::parse("0.8+0.04*cos(7*t)"),
                TimeFunction::parse("1+t/(1+t)"),          TimeFunction::parse("0.5+0.01*cos(7*t)"),
                TimeFunction::parse("0.4+0.01*sin(7*t)"),  TimeFunction::parse("0.01+0.005*cos(t)"),
                TimeFunction::parse("0.01+0.005*cos(t)"),  TimeFunction::parse("1+0.5*sin(15*t)"),
                0.01, 0.025, 0.1, 0.12, LevyMeasure()};
    return p;
}

} // namespace

TEST(Compensator, ExOneClosedForm) {
    const auto model = build_ex1(table1());
    const Vec3 c = compensator_integral(model, 0.0, {0.8, 0.19, 0.01});
    EXPECT_NEAR(c[0], -0.01 * 0.8 * 0.19 * 2, 1e-15);
}

TEST(Compensator, ZeroJumpsGiveZero) {
    Ex1Params p = table1();
    p.h1 = p.h2 = 0.0;
    const Vec3 c = compensator_integral(build_ex1(p), 1.0, {0.3, 0.3, 0.4});
    EXPECT_EQ(c[0], 0.0);
    EXPECT_EQ(c[1], 0.0);
    EXPECT_EQ(c[2], 0.0);
}

TEST(Compensator, ExOneBSumsToZero) {
    using expr::TimeFunction;
    Ex1bParams p{TimeFunction::parse("0.17+0.01*cos(20*t)"), TimeFunction::parse("0.12+0.01*cos(t)"),
                 TimeFunction::parse("0.56+0.01*sin(t)"), TimeFunction::parse("0.141+0.02*(sin(t)+cos(t))"),
                 0.019, 0.018, 0.11, 0.1, LevyMeasure()};
    const auto model = build_ex1b(p);
    Rng r(4);
    for (int i = 0; i < 1000; ++i) {
        const State s = sample_simplex(r);
        const Vec3 c = compensator_integral(model, r.uniform(0, 50), s);
        ASSERT_NEAR(c[0] + c[1] + c[2], 0.0, 1e-16);
    }
}

// Mark-dependent small jumps: the compensator is a quadrature, checked against
// the closed-form integral of u^2 over (-1, 1).
TEST(Compensator, MarkDependentQuadrature) {
    CustomParams p;
    p.domain = Domain::octant;
    const auto zero = expr::TimeFunction::constant(0.0);
    p.b = {zero, zero, zero};
    p.h = {expr::TimeFunction::parse("0.1*x*u*u", expr::VarSet::state_and_mark()), zero, zero};
    p.g = {zero, zero, zero};
    const auto model = build_custom(p);
    const Vec3 c = compensator_integral(model, 0.0, {2.0, 1.0, 1.0});
    EXPECT_NEAR(c[0], 0.1 * 2.0 * 2.0 / 3.0, 1e-6);
}
