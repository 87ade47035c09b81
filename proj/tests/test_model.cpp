#include "rpi/rpi.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rpi;

namespace {

RobustMdpInstance<double> two_action_rmdp() {
    RobustMdpInstance<double> m;
    m.n = 2;
    m.cost = {1.0, 0.0};
    m.actions = {{{{1}, {1.0}, 0.0}, {{0, 1}, {0.25, 0.75}, 0.1}}, {{{1}, {1.0}, 0.0}}};
    return m;
}

} // namespace

TEST_CASE("validate_rmdp accepts a one-state identity instance", "[model]") {
    RobustMdpInstance<double> m{1, {0.0}, {{{{0}, {1.0}, 0.0}}}};
    CHECK(validate_rmdp(m).empty());
}

TEST_CASE("validate_rmdp reports nominal mass off one", "[model]") {
    RobustMdpInstance<double> m{2, {0.0, 0.0}, {{{{0, 1}, {0.6, 0.6}, 0.1}}, {{{1}, {1.0}, 0.0}}}};
    const auto report = validate_rmdp(m);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].find("nominal mass 1.2 != 1") != std::string::npos);
}

TEST_CASE("validate_rmdp clamps radius above one with a warning", "[model]") {
    RobustMdpInstance<double> m{1, {0.0}, {{{{0}, {1.0}, 1.5}}}};
    const auto report = validate_rmdp(m);
    CHECK(report.ok());
    REQUIRE(report.warnings.size() == 1);
    CHECK(report.warnings[0].find("clamped to 1") != std::string::npos);
    CHECK(m.actions[0][0].radius == 1.0);
}

TEST_CASE("validate_rmdp reports structural problems", "[model]") {
    RobustMdpInstance<double> m{2, {0.0, 0.0}, {{{{0, 5}, {0.5, 0.5}, -0.1}}, {}}};
    const auto report = validate_rmdp(m);
    CHECK(report.violations.size() == 3); // index out of range, negative radius, no actions

    RobustMdpInstance<double> unsorted{2, {0.0, 0.0}, {{{{1, 0}, {0.5, 0.5}, 0.0}}, {{{1}, {1.0}, 0.0}}}};
    CHECK_FALSE(validate_rmdp(unsorted).ok());
}

TEST_CASE("exact validation has zero slack", "[model]") {
    RobustMdpInstance<Rational> m{1, {Rational(0)}, {{{{0}, {Rational(1)}, Rational(0)}}}};
    CHECK(validate_rmdp(m).empty());
    m.actions[0][0].nominal[0] = Rational(999999999, 1000000000);
    CHECK_FALSE(validate_rmdp(m).ok());
}

TEST_CASE("induce_rmc picks the ball of the chosen action", "[model]") {
    const auto m = two_action_rmdp();
    const auto rmc = induce_rmc(m, AgentPolicy{{1, 0}});
    CHECK(rmc.balls[0] == m.actions[0][1]);
    CHECK(rmc.balls[1] == m.actions[1][0]);
    CHECK(rmc.cost == m.cost);
    CHECK_THROWS_AS(induce_rmc(m, AgentPolicy{{2, 0}}), StructuralError);
    CHECK_THROWS_AS(induce_rmc(m, AgentPolicy{{0}}), StructuralError);
}

TEST_CASE("induce_rmc is the identity on single-action instances", "[model]") {
    GeneratorSpec spec;
    spec.n = 4;
    const auto rmc = generate_rmc(spec);
    const auto back = induce_rmc(as_rmdp(rmc), AgentPolicy{{0, 0, 0, 0}});
    CHECK(back == rmc);
}

TEST_CASE("induced RMCs of random instances re-validate", "[model][property]") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 6;
        spec.m = 3;
        auto m = generate_rmdp(spec);
        REQUIRE(validate_rmdp(m).empty());
        Rng rng(seed);
        AgentPolicy sigma;
        for (std::size_t s = 0; s < m.n; ++s) sigma.actions.push_back(rng.index(m.action_count(s)));
        auto rmc = induce_rmc(m, sigma);
        CHECK(validate_rmc(rmc).empty());
        CHECK(rmc.cost == m.cost);
    }
}

TEST_CASE("realize scatters rows through the support", "[model]") {
    RmcInstance<double> one{1, {0.0}, {{{0}, {1.0}, 0.0}}};
    const auto p = realize(one, nominal_policy(one));
    CHECK(p(0, 0) == 1.0);

    RmcInstance<double> rmc{3, {0, 0, 0}, {{{0, 2}, {0.5, 0.5}, 0.1}, {{1}, {1.0}, 0.0}, {{0, 1, 2}, {0.2, 0.3, 0.5}, 0.0}}};
    const auto q = realize(rmc, nominal_policy(rmc));
    CHECK(q(0, 0) == 0.5);
    CHECK(q(0, 1) == 0.0);
    CHECK(q(0, 2) == 0.5);
    CHECK(q(2, 1) == 0.3);

    EnvPolicy<double> outside{{{0.7, 0.3}, {1.0}, {0.2, 0.3, 0.5}}};
    CHECK_THROWS_AS(realize(rmc, outside), FeasibilityError);
    EnvPolicy<double> inside{{{0.6, 0.4}, {1.0}, {0.2, 0.3, 0.5}}};
    CHECK_NOTHROW(realize(rmc, inside));
}

TEST_CASE("homotopy rows realize within the radius", "[model][property]") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 4;
        spec.delta_hi = 0.5;
        const auto rmc = generate_rmc(spec);
        Rng rng(seed + 1000);
        std::vector<double> v(rmc.n);
        for (auto& x : v) x = rng.uniform(-5, 5);
        const auto rho = improve_env_policy(rmc, std::span<const double>(v));
        const auto p = realize(rmc, rho);
        for (std::size_t s = 0; s < rmc.n; ++s) {
            double mass = 0;
            for (std::size_t t = 0; t < rmc.n; ++t) mass += p(s, t);
            CHECK(std::fabs(mass - 1.0) <= 1e-9);
            const auto& ball = rmc.balls[s];
            for (std::size_t j = 0; j < ball.size(); ++j)
                CHECK(std::fabs(p(s, ball.support[j]) - ball.nominal[j]) <= ball.radius + 1e-12);
        }
    }
}
