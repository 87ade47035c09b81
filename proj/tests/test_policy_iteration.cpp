#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>

using namespace rpi;
using Catch::Approx;

namespace {

RmcInstance<double> two_state_rmc() {
    return {2, {0.0, 10.0}, {{{0, 1}, {0.5, 0.5}, 0.5}, {{1}, {1.0}, 0.0}}};
}

RobustMdpInstance<double> two_state_rmdp() {
    // state 0: action 0 moves to state 1, action 1 loops; state 1 absorbs
    return {2, {1.0, 0.0}, {{{{1}, {1.0}, 0.0}, {{0}, {1.0}, 0.0}}, {{{1}, {1.0}, 0.0}}}};
}

} // namespace

TEST_CASE("RMC-PI solves the two-state example", "[policy_iteration]") {
    const auto rmc = two_state_rmc();
    const auto trace = rmc_policy_iteration(rmc, 0.5);
    REQUIRE(trace.converged);
    CHECK(trace.value[0] == Approx(10.0).margin(1e-12));
    CHECK(trace.value[1] == Approx(20.0).margin(1e-12));
    CHECK(trace.policy[0] == std::vector<double>{0.0, 1.0});
    CHECK_FALSE(trace.warm_started);

    const auto exact = rmc_policy_iteration(
        RmcInstance<Rational>{2, {0, 10}, {{{0, 1}, {Rational(1, 2), Rational(1, 2)}, Rational(1, 2)}, {{1}, {1}, 0}}},
        Rational(1, 2));
    CHECK(exact.value == std::vector<Rational>{10, 20});
    CHECK(exact.iterations.back().residual == 0);
}

TEST_CASE("RMC-PI without uncertainty stops after one improvement", "[policy_iteration]") {
    GeneratorSpec spec;
    spec.n = 6;
    spec.delta_hi = 0.0;
    const auto rmc = generate_rmc(spec);
    const auto trace = rmc_policy_iteration(rmc, 0.9);
    CHECK(trace.converged);
    CHECK(trace.iteration_count() <= 2);
    const auto p = realize(rmc, nominal_policy(rmc));
    CHECK(sup_distance<double>(trace.value, oracle::neumann_value(p, rmc.cost, 0.9)) <= 1e-10);
}

TEST_CASE("improve_env_policy special cases", "[policy_iteration]") {
    GeneratorSpec spec;
    spec.n = 5;
    spec.delta_hi = 0.0;
    const auto point = generate_rmc(spec);
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(improve_env_policy(point, std::span<const double>(v)) == nominal_policy(point));

    spec.delta_hi = 0.3;
    const auto rmc = generate_rmc(spec);
    const std::vector<double> flat(5, 2.0);
    const auto rho = improve_env_policy(rmc, std::span<const double>(flat));
    for (std::size_t s = 0; s < 5; ++s) {
        double obj = 0;
        for (double p : rho[s]) obj += 2.0 * p;
        CHECK(obj == Approx(2.0).margin(1e-14));
    }
}

TEST_CASE("improve_env_policy agrees with the oracle", "[policy_iteration][property]") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 7;
        spec.density = 4;
        spec.delta_hi = 0.5;
        const auto rmc = generate_rmc(spec);
        Rng rng(seed);
        std::vector<double> v(7);
        for (auto& x : v) x = rng.uniform(-4, 4);
        const auto rho = improve_env_policy(rmc, std::span<const double>(v));
        for (std::size_t s = 0; s < 7; ++s) {
            const auto local = restrict_to(rmc.balls[s], std::span<const double>(v));
            double obj = 0;
            for (std::size_t j = 0; j < local.size(); ++j) obj += rho[s][j] * local[j];
            CHECK(std::fabs(obj - oracle_maximize(rmc.balls[s], std::span<const double>(local))) <= 1e-12);
        }
    }
}

TEST_CASE("RMDP-PI solves the two-state example", "[policy_iteration]") {
    const auto m = two_state_rmdp();
    const auto trace = rmdp_policy_iteration(m, 0.5);
    REQUIRE(trace.converged);
    CHECK(trace.policy.actions == std::vector<ActionIndex>{0, 0});
    CHECK(trace.value[0] == Approx(1.0).margin(1e-12));
    CHECK(trace.value[1] == Approx(0.0).margin(1e-12));

    // starting from the self-loop needs exactly one switch
    const auto from_loop = rmdp_policy_iteration(m, 0.5, AgentPolicy{{1, 0}});
    CHECK(from_loop.outer_iterations() == 2);
    CHECK(from_loop.iterations[0].value[0] == Approx(2.0).margin(1e-12));
    CHECK(from_loop.policy.actions == std::vector<ActionIndex>{0, 0});
}

TEST_CASE("RMDP-PI on single-action instances is RMC-PI", "[policy_iteration]") {
    GeneratorSpec spec;
    spec.seed = 4;
    spec.n = 6;
    const auto rmc = generate_rmc(spec);
    const auto outer = rmdp_policy_iteration(as_rmdp(rmc), 0.9);
    const auto inner = rmc_policy_iteration(rmc, 0.9);
    CHECK(outer.outer_iterations() == 1);
    CHECK(outer.value == inner.value);
    CHECK(outer.env_policy == inner.policy);
}

TEST_CASE("improve_agent_policy keeps tied incumbents", "[policy_iteration]") {
    RobustMdpInstance<double> m{3, {0.0, 3.0, 3.0}, {{{{1}, {1.0}, 0.0}, {{2}, {1.0}, 0.0}}, {{{1}, {1.0}, 0.0}}, {{{2}, {1.0}, 0.0}}}};
    const std::vector<double> v{0, 3, 3};
    CHECK(improve_agent_policy(m, std::span<const double>(v), AgentPolicy{{1, 0, 0}}, 0.5).actions[0] == 1);
    CHECK(improve_agent_policy(m, std::span<const double>(v), AgentPolicy{{0, 0, 0}}, 0.5).actions[0] == 0);
    const std::vector<double> w{0, 3, 7};
    CHECK(improve_agent_policy(m, std::span<const double>(w), AgentPolicy{{1, 0, 0}}, 0.5).actions[0] == 0);
}

TEST_CASE("solved policies are fixed points of improvement", "[policy_iteration][property]") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 6;
        spec.m = 3;
        const auto m = generate_rmdp(spec);
        const auto trace = rmdp_policy_iteration(m, 0.9);
        REQUIRE(trace.converged);
        CHECK(improve_agent_policy(m, std::span<const double>(trace.value), trace.policy, 0.9) == trace.policy);
    }
}

TEST_CASE("PI traces are monotone, contract and never revisit", "[policy_iteration][property]") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 2 + seed % 7;
        spec.m = 1 + seed % 4;
        spec.delta_hi = 0.4;
        const double gamma = seed % 2 ? 0.9 : 0.5;
        const auto m = generate_rmdp(spec);
        const auto trace = rmdp_policy_iteration(m, gamma);
        REQUIRE(trace.converged);

        std::set<std::vector<ActionIndex>> seen;
        const auto& its = trace.iterations;
        const double d0 = sup_distance<double>(its.front().value, trace.value);
        for (std::size_t t = 0; t < its.size(); ++t) {
            CHECK(seen.insert(its[t].policy.actions).second);
            if (t > 0)
                for (std::size_t s = 0; s < m.n; ++s) CHECK(its[t].value[s] <= its[t - 1].value[s] + 1e-10);
            CHECK(sup_distance<double>(its[t].value, trace.value) <= std::pow(gamma, t) * d0 + 1e-9);

            const auto& inner = its[t].inner;
            REQUIRE(inner.converged);
            CHECK(inner.iterations.back().residual <= 1e-9);
            const double e0 = sup_distance<double>(inner.iterations.front().value, inner.value);
            for (std::size_t k = 0; k < inner.iterations.size(); ++k) {
                if (k > 0)
                    for (std::size_t s = 0; s < m.n; ++s)
                        CHECK(inner.iterations[k].value[s] >= inner.iterations[k - 1].value[s] - 1e-10);
                CHECK(sup_distance<double>(inner.iterations[k].value, inner.value) <= std::pow(gamma, k) * e0 + 1e-9);
            }
        }
        const auto t = bellman_rmdp(m, std::span<const double>(trace.value), gamma).value;
        CHECK(sup_distance<double>(t, trace.value) <= 1e-9);
    }
}

TEST_CASE("PI agrees with value iteration", "[policy_iteration][property]") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 8;
        spec.m = 1 + seed % 4;
        const auto m = generate_rmdp(spec);
        const auto pi = rmdp_policy_iteration(m, 0.9);
        const auto vi = robust_value_iteration(m, 0.9, 1e-8, 100000);
        REQUIRE(vi.converged);
        CHECK(sup_distance<double>(pi.value, vi.value) <= 2e-8);
    }
}

TEST_CASE("warm and cold inner starts reach the same solution", "[policy_iteration]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 6;
        spec.m = 3;
        const auto m = generate_rmdp(spec);
        const auto warm = rmdp_policy_iteration(m, 0.9);
        const auto cold = rmdp_policy_iteration(m, 0.9, std::nullopt, kDefaultMaxIter, {}, false);
        CHECK(sup_distance<double>(warm.value, cold.value) <= 1e-9);
        if (warm.outer_iterations() > 1) CHECK(warm.iterations[1].inner.warm_started);
        for (const auto& it : cold.iterations) CHECK_FALSE(it.inner.warm_started);
    }
}

TEST_CASE("iteration limits are reported, not thrown", "[policy_iteration]") {
    const auto rmc = two_state_rmc();
    const auto trace = rmc_policy_iteration(rmc, 0.5, std::nullopt, 1);
    CHECK_FALSE(trace.converged);
    CHECK(trace.iteration_count() == 1);
    CHECK_THROWS_AS(rmc_policy_iteration(rmc, 1.5), ParameterError);
}

TEST_CASE("exact RMDP-PI matches float", "[policy_iteration]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 4;
        spec.m = 2;
        const auto exact = generate_rmdp_exact(spec);
        RobustMdpInstance<double> approx{exact.n, {}, {}};
        for (const auto& c : exact.cost) approx.cost.push_back(to_double(c));
        for (const auto& acts : exact.actions) {
            approx.actions.emplace_back();
            for (const auto& b : acts) {
                LInfBall<double> d{b.support, {}, to_double(b.radius)};
                for (const auto& p : b.nominal) d.nominal.push_back(to_double(p));
                approx.actions.back().push_back(d);
            }
        }
        const auto q = rmdp_policy_iteration(exact, Rational(9, 10));
        const auto f = rmdp_policy_iteration(approx, 0.9);
        REQUIRE(q.converged);
        for (std::size_t s = 0; s < exact.n; ++s) CHECK(to_double(q.value[s]) == Approx(f.value[s]).margin(1e-9));
        const auto t = bellman_rmdp(exact, std::span<const Rational>(q.value), Rational(9, 10)).value;
        CHECK(t == q.value);
    }
}
