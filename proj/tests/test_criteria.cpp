#include "ussir/criteria.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

using namespace ussir;
using expr::TimeFunction;

namespace {

TimeFunction f(const char *text) { return TimeFunction::parse(text); }

const double r2 = std::sqrt(2.0);

Ex1Params table1() {
    return {f("0.3+0.1*sin(4*t)"),  f("0.8+0.04*cos(7*t)"), f("1+t/(1+t)"),        f("0.5+0.01*cos(7*t)"),
            f("0.4+0.01*sin(7*t)"), f("0.01+0.005*cos(t)"), f("0.01+0.005*cos(t)"), f("1+0.5*sin(15*t)"),
            0.01, 0.025, 0.1, 0.12, LevyMeasure()};
}

Ex1bParams table2() {
    return {f("0.17+0.01*cos(20*t)"), f("0.12+0.01*cos(t)"), f("0.56+0.01*sin(t)"),
            f("0.141+0.02*(sin(t)+cos(t))"), 0.019, 0.018, 0.11, 0.1, LevyMeasure()};
}

XcParams xc(const char *beta, const char *gamma, const char *sigma) {
    return {f("0.5+0.06*sin(t)"), f("0.07+0.004*cos(t)"), f(beta), f(gamma), f("0.15+0.07*sin(t)"), f(sigma)};
}

XcParams table3() { return xc("0.13+0.01*sin(t)", "0.9+0.02*sin(t)", "0.12+0.01*(sin(t)+cos(t))"); }
XcParams table4() { return xc("0.13+0.01*sin(t)", "0.9+0.02*sin(t)", "0.55+0.003*(sin(t)+cos(t))"); }
XcParams table5() { return xc("0.56+0.01*sin(4*t)", "0.25+0.1*cos(5*t)", "0.24+0.01*(sin(t)+cos(t))"); }

Ex34aParams table6() {
    return {f("0.15+0.006*sin(t)"),  f("0.002+0.0001*cos(t)"), f("0.18+0.01*sin(2*t)"),  f("0.15+0.004*cos(t)"),
            f("0.12+0.02*cos(t)"),   f("0.12+0.04*cos(2*t)"),  f("0.1+0.04*sin(4*t)"),   f("1+ln(1+abs(sin(t)))"),
            f("0.15+0.01*cos(t)"),   f("0.12+0.01*sin(t)"),    f("0.01+0.005*cos(t)"),   f("0.01+0.005*cos(t)"),
            f("1+0.25*sin(15*t)"),   0.0001, 0.00025, 0.0009, 0.001, 0.0012, 2.0, LevyMeasure()};
}

Ex34bParams table7() {
    return {f("0.09+0.01*cos(t)"),     f("0.003+0.001*sin(t)"),  f("0.14+0.005*cos(10*t)"),
            f("0.002+0.002*cos(25*t)"), f("0.35+0.04*cos(15*t)"), f("0.3125+0.002*(sin(t)+cos(t))"),
            0.0001, 0.0004, 0.0009, 0.001, 0.007, 0.005, 1.5, LevyMeasure()};
}

ModelSpec octant_custom(const char *b2, const char *h2, const char *g2, const char *s2 = nullptr) {
    const auto sv = expr::VarSet::state(), sm = expr::VarSet::state_and_mark();
    CustomParams p;
    p.domain = Domain::octant;
    p.b = {TimeFunction(), TimeFunction::parse(b2, sv), TimeFunction()};
    if (s2) p.sigma.push_back({TimeFunction(), TimeFunction::parse(s2, sv), TimeFunction()});
    p.h = {TimeFunction(), TimeFunction::parse(h2, sm), TimeFunction()};
    p.g = {TimeFunction(), TimeFunction::parse(g2, sm), TimeFunction()};
    return build_custom(p);
}

} // namespace

TEST(Ex1Criteria, TableOneRate) {
    const auto r = ex1_extinction(bounds_of(table1()));
    EXPECT_EQ(r.classification, Classification::extinct);
    // inf gamma 0.76, sup beta 0.4, g1 0.1.
    EXPECT_NEAR(*r.extinction_rate_lb, 0.76 - 0.4 - 2 * 0.1, 1e-12);
    EXPECT_NEAR(*r.extinction_rate_lb, 0.16, 1e-12);
}

TEST(Ex1Criteria, LargeJumpsCanBreakTheCondition) {
    auto p = table1();
    p.g1 = 0.2;
    const auto r = ex1_extinction(bounds_of(p));
    EXPECT_EQ(r.classification, Classification::indeterminate);
    EXPECT_FALSE(r.extinction_rate_lb);
    EXPECT_FALSE(r.find("beta_sup+2g1<gamma_inf")->satisfied);
}

TEST(Ex1Criteria, MonotoneInG1) {
    double last = 1.0;
    for (double g1 : {0.0, 0.05, 0.1, 0.15}) {
        auto p = table1();
        p.g1 = g1;
        const double rate = *ex1_extinction(bounds_of(p)).extinction_rate_lb;
        EXPECT_LT(rate, last);
        last = rate;
    }
}

TEST(Ex1bCriteria, TableTwoPair) {
    const auto r = ex1b_persistence(bounds_of(table2()));
    ASSERT_EQ(r.classification, Classification::persistent);
    const double s = 0.141 + 0.02 * r2;
    const double lambda = 0.55 - 0.13 - 2 * (s * s + 0.019 - std::log(0.982 * 0.9));
    EXPECT_EQ(*r.lambda0, 0.55);
    EXPECT_NEAR(*r.lambda, lambda, 1e-14);
    EXPECT_NEAR(*r.lambda, 0.0776367, 1e-5);
    EXPECT_NEAR(*r.mean_infected_lb, lambda / 0.55, 1e-14);
    EXPECT_NEAR(*r.mean_infected_lb, 0.14115, 1e-4);
    EXPECT_TRUE(r.all({"gamma1_sup<beta_inf", "beta_inf<=gamma2_inf", "h2,g2<1", "noise<(gamma2_inf-gamma1_sup)/2"}));
}

TEST(Ex1bCriteria, LargeNoiseLosesPersistence) {
    auto p = table2();
    p.sigma = f("0.4");
    const auto r = ex1b_persistence(bounds_of(p));
    EXPECT_EQ(r.classification, Classification::indeterminate);
    EXPECT_FALSE(r.lambda);
}

TEST(XcCriteria, TableThreeWeakNoiseExtinction) {
    const auto r = xc_report(bounds_of(table3()));
    ASSERT_EQ(r.classification, Classification::extinct);
    const double Lhi = 0.56, mlo = 0.066, removal = 0.066 + 0.88 + 0.08, s = 0.12 - 0.01 * r2;
    const double rt = 0.14 * Lhi / (mlo * removal) - s * s * Lhi * Lhi / (2 * mlo * mlo * removal);
    EXPECT_NEAR(*r.invariant_bound, 0.56 / 0.066, 1e-12);
    EXPECT_NEAR(*r.invariant_bound, 8.484848, 1e-6);
    EXPECT_NEAR(*r.r_tilde, rt, 1e-12);
    EXPECT_NEAR(*r.r_tilde, 0.7646, 5e-4);
    EXPECT_NEAR(*r.extinction_rate_lb, removal * (1 - rt), 1e-12);
    EXPECT_NEAR(*r.extinction_rate_lb, 0.241, 1e-3);
    // sigma_inf^2 = 0.0121 sits below mu_inf beta_sup / Lambda_sup = 0.0165.
    const auto *weak = r.find("sigma_inf^2<=mu_inf*beta_sup/Lambda_sup");
    ASSERT_NE(weak, nullptr);
    EXPECT_TRUE(weak->satisfied);
    EXPECT_NEAR(weak->margin, 0.0165 - s * s, 1e-12);
    EXPECT_LT(s * s, 0.0121);
}

TEST(XcCriteria, TableFourStrongNoiseExtinction) {
    const auto r = xc_report(bounds_of(table4()));
    ASSERT_EQ(r.classification, Classification::extinct);
    const double s2 = std::pow(0.55 - 0.003 * r2, 2);
    EXPECT_GE(s2, 0.29);
    EXPECT_TRUE(r.all({"sigma_inf^2>max{mu_inf*beta_sup/Lambda_sup,beta_sup^2/(2(mu+gamma+eps)_inf)}"}));
    EXPECT_NEAR(*r.extinction_rate_lb, 1.026 - 0.14 * 0.14 / (2 * s2), 1e-12);
    EXPECT_NEAR(*r.extinction_rate_lb, 0.993, 1e-3);
}

TEST(XcCriteria, TableFivePersistence) {
    const auto r = xc_report(bounds_of(table5()));
    ASSERT_EQ(r.classification, Classification::persistent);
    const double Llo = 0.44, Lhi = 0.56, mlo = 0.066, mhi = 0.074, blo = 0.55, removal = 0.074 + 0.35 + 0.22;
    const double s = 0.24 + 0.01 * r2;
    const double rp = blo * Llo / (mhi * removal) - s * s * Lhi * Lhi / (2 * mlo * mlo * removal);
    EXPECT_NEAR(*r.r_tilde_persistence, rp, 1e-12);
    EXPECT_NEAR(*r.r_tilde_persistence, 1.4679, 1e-4);
    EXPECT_GT(*r.r_tilde_persistence, 1.0);
    EXPECT_NEAR(*r.mean_infected_lb, mhi * (rp - 1) / blo, 1e-12);
    EXPECT_FALSE(r.extinction_rate_lb);
}

TEST(XcCriteria, MoreNoiseLowersTheThreshold) {
    double last = 10.0;
    for (const char *s : {"0.1", "0.15", "0.2", "0.25"}) {
        const double rt = *xc_report(bounds_of(xc("0.56", "0.25", s))).r_tilde_persistence;
        EXPECT_LT(rt, last) << s;
        last = rt;
    }
}

TEST(XcCriteria, NonPositiveDeathRateIsIndeterminate) {
    auto p = table3();
    p.mu = f("0.07*sin(t)");
    const auto r = xc_report(bounds_of(p));
    EXPECT_EQ(r.classification, Classification::indeterminate);
    EXPECT_FALSE(r.find("mu_inf>0")->satisfied);
}

TEST(Ex34aCriteria, TableSix) {
    const auto r = ex34a_persistence(bounds_of(table6()));
    ASSERT_EQ(r.classification, Classification::persistent);
    const double growth = 0.10 - 0.0021;
    const double jumps = 0.0001 - std::log((1 - 0.00025) * (1 - 0.0012));
    const double lambda = growth - (0.5 * (0.16 * 0.16 + 0.13 * 0.13) + jumps);
    EXPECT_EQ(*r.lambda0, 1.16);
    EXPECT_NEAR(*r.lambda, lambda, 1e-12);
    EXPECT_NEAR(*r.lambda, 0.075, 1e-3);
    EXPECT_NEAR(*r.mean_infected_lb, lambda / 1.16, 1e-12);
    EXPECT_NEAR(*r.mean_infected_lb, 0.064, 1e-3);
}

TEST(Ex34aCriteria, SmallCapBindsTheGrowth) {
    auto p = table6();
    p.M = 0.05;
    const auto r = ex34a_persistence(bounds_of(p));
    const double jumps = 0.0001 - std::log((1 - 0.00025) * (1 - 0.0012));
    EXPECT_NEAR(*r.lambda, 0.05 - (0.5 * (0.16 * 0.16 + 0.13 * 0.13) + jumps), 1e-12);
}

TEST(Ex34bCriteria, TableSeven) {
    const auto r = ex34b_extinction(bounds_of(table7()));
    ASSERT_EQ(r.classification, Classification::extinct);
    EXPECT_NEAR(*r.extinction_rate_lb, 0.31 + 0.002 - 0.145 - 0.002, 1e-12);
    EXPECT_NEAR(*r.extinction_rate_lb, 0.165, 1e-3);
}

TEST(KValue, UnitRatioGivesOneMinusLnTwo) {
    const auto m = octant_custom("0", "y", "0");
    EXPECT_NEAR(k_value(m, 0.0, {1.0, 0.3, 2.0}, 0.5), 1.0 - std::log(2.0), 1e-15);
}

TEST(KValue, PropertyNonNegative) {
    const ModelSpec models[] = {build_ex1(table1()), build_ex1b(table2()), build_ex34a(table6()),
                                build_ex34b(table7())};
    Rng r(4);
    for (const auto &m : models)
        for (int i = 0; i < 2000; ++i) {
            const State s = sample_state(m.domain(), r);
            ASSERT_GE(k_value(m, r.uniform(0, 50), s, r.uniform(-1, 1)), 0.0) << m.name();
        }
}

TEST(KValue, RejectsRatioAtOrBelowMinusOne) {
    CustomParams p;
    p.domain = Domain::octant;
    p.b = p.g = {TimeFunction(), TimeFunction(), TimeFunction()};
    p.h = {TimeFunction::parse("-2*x", expr::VarSet::state_and_mark()), TimeFunction(), TimeFunction()};
    const auto m = build_custom(p, Check::skip);
    EXPECT_THROW(k_value(m, 0.0, {1.0, 1.0, 1.0}, 0.0), DomainError);
}

TEST(AlphaEstimate, DriftOnlyGivesTheDecayRate) {
    const auto m = octant_custom("-0.3*y", "0", "0");
    AlphaGrid g{uniform_grid(0, 10, 11), octant_state_grid(5, 0.01, 5)};
    EXPECT_NEAR(generic_alpha_estimate(m, g).alpha, -0.3, 1e-12);
}

TEST(AlphaEstimate, JumpOnlyTerms) {
    const auto m = octant_custom("0", "0.5*y", "0.2*y");
    AlphaGrid g{{0.0}, octant_state_grid(4, 0.01, 5)};
    const auto a = generic_alpha_estimate(m, g);
    EXPECT_NEAR(a.small_jump_term, 2 * (std::log(1.5) - 0.5), 1e-12);
    EXPECT_NEAR(a.large_jump_term, 2 * std::log(1.2), 1e-12);
    EXPECT_NEAR(a.alpha, 2 * (std::log(1.5) - 0.5) + 2 * std::log(1.2), 1e-12);
}

TEST(AlphaEstimate, MarkDependentSmallJumps) {
    // int_{-1}^{1} ln(1 + 0.5u^2) - 0.5u^2 du, by a fine midpoint sum.
    const auto m = octant_custom("0", "0.5*u*u*y", "0");
    AlphaGrid g{{0.0}, octant_state_grid(3, 0.1, 2)};
    double want = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = -1.0 + (i + 0.5) * 2.0 / n, v = 0.5 * u * u;
        want += (std::log1p(v) - v) * 2.0 / n;
    }
    EXPECT_NEAR(generic_alpha_estimate(m, g).small_jump_term, want, 1e-6);
}

// The ex1 exponent on a hand-written grid loop, independent of alpha_scan.
TEST(AlphaEstimate, ExOneMatchesHandLoopAndImpliesTheRate) {
    const auto m = build_ex1(table1());
    const auto times = uniform_grid(0, 20, 41);
    const auto states = simplex_state_grid(60);
    AlphaGrid g{times, states};
    const auto est = generic_alpha_estimate(m, g);

    double want = -INFINITY;
    for (double t : times) {
        const double beta = 0.3 + 0.1 * std::sin(4 * t), gamma = 0.8 + 0.04 * std::cos(7 * t);
        const double xi = 1 + t / (1 + t), s1 = 0.5 + 0.01 * std::cos(7 * t), s2 = 0.4 + 0.01 * std::sin(7 * t);
        const double phi12 = 0.01 + 0.005 * std::cos(t), phi3 = 1 + 0.5 * std::sin(15 * t);
        double drift = -INFINITY, small = -INFINITY, large = -INFINITY;
        for (const State &s : states) {
            const double P = 1 + phi12 * s.x + phi12 * s.y + phi3 * s.x * s.y;
            const double a = s1 * s.x / P, b = s2 * s.z;
            drift = std::max(drift, beta * std::pow(s.x, xi) / P - gamma - 0.5 * (a * a + b * b));
            const double rh = 0.01 * s.x - 0.025 * s.z, rg = 0.1 * s.x - 0.12 * s.z;
            small = std::max(small, std::log1p(rh) - rh);
            large = std::max(large, std::log1p(rg));
        }
        want = std::max(want, drift + 2 * small + 2 * large);
    }
    EXPECT_NEAR(est.alpha, want, 1e-12);
    EXPECT_LE(est.alpha, -0.16);
}

TEST(AlphaEstimate, PropertyStrengthenedExponentDominates) {
    Rng r(10);
    const ModelSpec models[] = {build_ex1(table1()), build_ex1b(table2()), build_xc(table3()), build_ex34b(table7())};
    for (const auto &m : models) {
        for (int k = 0; k < 5; ++k) {
            AlphaGrid g;
            g.times = {r.uniform(0, 100), r.uniform(0, 100)};
            for (int i = 0; i < 200; ++i) g.states.push_back(sample_state(m.domain(), r));
            ASSERT_LE(generic_alpha_estimate(m, g).alpha, alpha_star_estimate(m, g).alpha + 1e-12) << m.name();
        }
    }
}

TEST(AlphaEstimate, EmptyGridRejected) {
    EXPECT_THROW(generic_alpha_estimate(build_ex1(table1()), AlphaGrid{}), std::invalid_argument);
}

TEST(Grids, SimplexGridIsAdmissible) {
    const auto g = simplex_state_grid(50, 1e-3);
    EXPECT_EQ(g.size(), 2500u);
    for (const State &s : g) ASSERT_TRUE(admissible(s, Domain::simplex));
    EXPECT_EQ(g.front().y, 1e-3);
}

TEST(Report, TextAndCsvLayout) {
    const auto r = ex1_extinction(bounds_of(table1()));
    const std::string text = to_text(r);
    EXPECT_NE(text.find("model: ex1\n"), std::string::npos);
    EXPECT_NE(text.find("classification: extinct\n"), std::string::npos);
    EXPECT_NE(text.find("extinction_rate_lb: 0.15999999999999998\n"), std::string::npos);
    EXPECT_NE(text.find("condition.beta_sup+2g1<gamma_inf: holds"), std::string::npos);
    const std::string row = to_csv_row(r);
    EXPECT_EQ(row.substr(0, 12), "ex1,extinct,");
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(kCriteriaCsvHeader, kCriteriaCsvHeader +
                                                                      std::strlen(kCriteriaCsvHeader), ','));
}
