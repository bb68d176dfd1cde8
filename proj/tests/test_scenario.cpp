#include "ussir/scenario.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace ussir;

namespace {

const std::string dir = USSIR_SCENARIO_DIR;

ScenarioConfig parse(const std::string &text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

std::size_t error_line(const std::string &text) {
    try {
        parse(text);
    } catch (const ConfigError &e) {
        return e.line();
    }
    return 9999;
}

const char *kXcBody = R"S([model]
id = xc
[params]
Lambda = 0.5
mu = "0.07 + 0.004*cos(t)"
beta = 0.13
gamma = 0.9
epsilon = 0.15
sigma = 0.12
[initial]
state = (2.0, 0.8, 1.0)
)S";

} // namespace

TEST(Scenario, TableOneLoads) {
    const auto c = load_scenario(dir + "/table1.scn");
    EXPECT_EQ(c.model, ModelId::ex1);
    EXPECT_EQ(c.domain, Domain::simplex);
    EXPECT_EQ(expr::TimeFunction::parse(c.params.at("beta")), expr::TimeFunction::parse("0.3+0.1*sin(4*t)"));
    EXPECT_EQ(c.initial, (State{0.8, 0.19, 0.01}));
    EXPECT_EQ(c.jumps.at("g2"), 0.12);
    EXPECT_EQ(c.sim.dt, 0.001);
    EXPECT_EQ(c.sim.horizon, 100.0);
    EXPECT_EQ(c.paths, 50u);
    EXPECT_EQ(c.measure().total_mass(), 4.0);
}

TEST(Scenario, AllShippedTablesBuild) {
    for (int k = 1; k <= 7; ++k) {
        const auto c = load_scenario(dir + "/table" + std::to_string(k) + ".scn");
        EXPECT_NO_THROW(build_model(c)) << k;
        EXPECT_NE(criteria_for(c).classification, Classification::indeterminate) << k;
    }
}

TEST(Scenario, MinimalXc) {
    const auto c = parse(kXcBody);
    EXPECT_EQ(c.model, ModelId::xc);
    EXPECT_EQ(c.domain, Domain::octant);
    EXPECT_EQ(c.sim.dt, 0.001);
    EXPECT_NEAR(build_model(c).drift(0.0, c.initial)[0], 0.144, 1e-15);
}

TEST(Scenario, MissingParameterIsNamed) {
    std::string text = kXcBody;
    text.erase(text.find("epsilon = 0.15\n"), 15);
    try {
        parse(text);
        FAIL();
    } catch (const ConfigError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("missing parameter(s) epsilon"), std::string::npos) << msg;
        EXPECT_NE(msg.find("requires"), std::string::npos) << msg;
    }
}

TEST(Scenario, NonPositiveStepRejected) {
    EXPECT_THROW(parse(std::string(kXcBody) + "[sim]\ndt = 0\n"), ConfigError);
    EXPECT_EQ(error_line(std::string(kXcBody) + "[sim]\ndt = 0\n"), 13u);
    EXPECT_THROW(parse(std::string(kXcBody) + "[sim]\ndt = 0.1\nT = 0.05\n"), ConfigError);
}

TEST(Scenario, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line(std::string(kXcBody) + "[sim]\nbogus = 1\n"), 13u);
    EXPECT_EQ(error_line("[model]\nid = ex9\n"), 2u);
    EXPECT_EQ(error_line("[model]\nid = xc\nid = xc\n"), 3u);
    EXPECT_EQ(error_line("[nope]\n"), 1u);
    EXPECT_EQ(error_line("[model]\nid xc\n"), 2u);
    std::string bad = kXcBody;
    bad.replace(bad.find("0.13"), 4, "\"0.13+*t\"");
    EXPECT_EQ(error_line(bad), 6u);
}

TEST(Scenario, JumpsRejectedForXc) {
    EXPECT_EQ(error_line(std::string(kXcBody) + "[jumps]\nh1 = 0.1\n"), 13u);
}

TEST(Scenario, InitialStateMustBeAdmissible) {
    std::string text = kXcBody;
    text.replace(text.find("(2.0, 0.8, 1.0)"), 15, "(2.0, -0.8, 1.0)");
    EXPECT_EQ(error_line(text), 11u);
}

TEST(Scenario, CommentsAndBareWords) {
    const auto c = parse(std::string("# header\n") + kXcBody + "[sim]  # trailing\nseed = 42 # set\nout = \"o/x\"\n");
    EXPECT_EQ(c.sim.seed, 42u);
    EXPECT_EQ(c.out, "o/x");
}

TEST(Scenario, CustomModel) {
    const auto c = parse(R"S([model]
id = custom
domain = simplex
[params]
b  = ("-0.2*x*y", "0.2*x*y - 0.1*y", "0.1*y")
s1 = ("-0.1*x*y", "0.1*x*y", "0")
[jumps]
h = ("-0.01*x*y*u*u", "0.01*x*y*u*u", "0")
g = ("0", "0", "0")
[initial]
state = (0.8, 0.19, 0.01)
[criteria]
grid = 40
t_points = 3
)S");
    EXPECT_EQ(c.model, ModelId::custom);
    const auto m = build_model(c);
    EXPECT_EQ(m.brownian_dim(), 1);
    const auto r = criteria_for(c);
    EXPECT_EQ(r.classification, Classification::indeterminate);
    ASSERT_TRUE(r.alpha_estimate);
    EXPECT_LT(*r.alpha_estimate, 0.2);
    EXPECT_EQ(*r.alpha_y_min, 1e-3);
}

TEST(Scenario, CustomColumnsMustBeContiguous) {
    EXPECT_THROW(parse(R"S([model]
id = custom
[params]
b  = ("0", "0", "0")
s2 = ("0", "0", "0")
[initial]
state = (0.8, 0.19, 0.01)
)S"),
                 ConfigError);
}

TEST(Scenario, MeasureOverride) {
    const auto c = parse(std::string(kXcBody) + "[measure]\nsupport = (-0.5, 0.5)\ndensity = 3\n");
    EXPECT_EQ(c.measure().region_mass(JumpRegion::small), 3.0);
    EXPECT_EQ(c.measure().region_mass(JumpRegion::large), 0.0);
}
