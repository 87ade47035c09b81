#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rpi;
using Catch::Approx;

namespace {

std::span<const double> view(const std::vector<double>& v) { return v; }

RmcInstance<double> random_rmc(std::uint64_t seed, std::size_t n, double delta_hi = 0.3) {
    GeneratorSpec spec;
    spec.seed = seed;
    spec.n = n;
    spec.delta_hi = delta_hi;
    spec.cost_lo = -1;
    spec.cost_hi = 2;
    return generate_rmc(spec);
}

} // namespace

TEST_CASE("evaluate_chain on closed-form chains", "[eval]") {
    DenseMatrix<double> self(1, 1);
    self(0, 0) = 1;
    CHECK(evaluate_chain(self, view({5.0}), 0.5)[0] == Approx(10.0).margin(1e-12));

    DenseMatrix<double> absorb(2, 2);
    absorb(0, 1) = 1;
    absorb(1, 1) = 1;
    const auto v = evaluate_chain(absorb, view({1.0, 0.0}), 0.9);
    CHECK(v[0] == Approx(1.0).margin(1e-12));
    CHECK(v[1] == Approx(0.0).margin(1e-12));

    CHECK_THROWS_AS(evaluate_chain(self, view({1.0}), 1.0), ParameterError);
    CHECK_THROWS_AS(evaluate_chain(self, view({1.0}), 0.0), ParameterError);
}

TEST_CASE("evaluate_chain matches the truncated series", "[eval][property]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto rmc = random_rmc(seed, 6);
        const auto p = realize(rmc, nominal_policy(rmc));
        for (double gamma : {0.5, 0.9}) {
            const auto v = evaluate_chain(p, view(rmc.cost), gamma);
            const auto ref = oracle::neumann_value(p, rmc.cost, gamma);
            CHECK(sup_distance<double>(v, ref) <= 1e-10);
            // residual of (I - gamma P) v = c
            double cmax = sup_norm<double>(rmc.cost);
            for (std::size_t i = 0; i < rmc.n; ++i) {
                double r = v[i] - rmc.cost[i];
                for (std::size_t j = 0; j < rmc.n; ++j) r -= gamma * p(i, j) * v[j];
                CHECK(std::fabs(r) <= 1e-10 * (1 + cmax));
            }
        }
    }
}

TEST_CASE("exact evaluation agrees with float", "[eval]") {
    GeneratorSpec spec;
    spec.n = 5;
    const auto exact = generate_rmdp_exact(spec);
    const auto rmc = induce_rmc(exact, AgentPolicy{std::vector<ActionIndex>(5, 0)});
    const auto v = evaluate_env_policy(rmc, nominal_policy(rmc), Rational(9, 10));
    DenseMatrix<double> p(5, 5);
    std::vector<double> c;
    for (std::size_t s = 0; s < 5; ++s) {
        c.push_back(to_double(rmc.cost[s]));
        for (std::size_t j = 0; j < rmc.balls[s].size(); ++j)
            p(s, rmc.balls[s].support[j]) = to_double(rmc.balls[s].nominal[j]);
    }
    const auto ref = oracle::neumann_value(p, c, 0.9);
    for (std::size_t s = 0; s < 5; ++s) CHECK(to_double(v[s]) == Approx(ref[s]).margin(1e-10));
}

TEST_CASE("bellman_rmc special cases", "[eval]") {
    RmcInstance<double> rmc{2, {1.0, 2.0}, {{{0, 1}, {0.25, 0.75}, 0.0}, {{1}, {1.0}, 0.0}}};
    const std::vector<double> v{4, 8};
    const auto t = bellman_rmc(rmc, view(v), 0.5);
    CHECK(t[0] == Approx(1.0 + 0.5 * (0.25 * 4 + 0.75 * 8)));
    CHECK(t[1] == Approx(2.0 + 0.5 * 8));
    const std::vector<double> zero(2, 0.0);
    CHECK(bellman_rmc(rmc, view(zero), 0.5) == rmc.cost);
}

TEST_CASE("bellman_rmdp picks the cheaper continuation", "[eval]") {
    RobustMdpInstance<double> m{3, {0.0, 3.0, 7.0}, {{{{1}, {1.0}, 0.0}, {{2}, {1.0}, 0.0}}, {{{1}, {1.0}, 0.0}}, {{{2}, {1.0}, 0.0}}}};
    const std::vector<double> v{0, 3, 7};
    const auto r = bellman_rmdp(m, view(v), 0.5);
    CHECK(r.value[0] == Approx(1.5));
    CHECK(r.policy[0] == 0);

    const std::vector<double> tie{0, 5, 5};
    CHECK(bellman_rmdp(m, view(tie), 0.5).policy[0] == 0);
}

TEST_CASE("bellman_rmdp is dominated by every fixed policy", "[eval][property]") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 5;
        spec.m = 3;
        const auto m = generate_rmdp(spec);
        Rng rng(seed);
        std::vector<double> v(5);
        for (auto& x : v) x = rng.uniform(-3, 3);
        const auto best = bellman_rmdp(m, view(v), 0.9);
        CHECK(best.value == bellman_rmc(induce_rmc(m, best.policy), view(v), 0.9));
        for (int k = 0; k < 10; ++k) {
            AgentPolicy sigma;
            for (std::size_t s = 0; s < 5; ++s) sigma.actions.push_back(rng.index(3));
            const auto t = bellman_rmc(induce_rmc(m, sigma), view(v), 0.9);
            for (std::size_t s = 0; s < 5; ++s) CHECK(best.value[s] <= t[s] + 1e-12);
        }
    }
}

TEST_CASE("bellman operators contract", "[eval][property]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 6;
        spec.m = 2;
        spec.delta_hi = 0.5;
        const auto m = generate_rmdp(spec);
        Rng rng(seed + 77);
        for (int k = 0; k < 50; ++k) {
            std::vector<double> u(6), w(6);
            for (auto& x : u) x = rng.uniform(-10, 10);
            for (auto& x : w) x = rng.uniform(-10, 10);
            const double d = sup_distance<double>(u, w);
            const auto tu = bellman_rmdp(m, view(u), 0.9).value;
            const auto tw = bellman_rmdp(m, view(w), 0.9).value;
            CHECK(sup_distance<double>(tu, tw) <= 0.9 * d + 1e-12);
        }
    }
}

TEST_CASE("one Bellman step improves any evaluated env policy", "[eval][property]") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto rmc = random_rmc(seed, 6, 0.4);
        Rng rng(seed);
        std::vector<double> w(6);
        for (auto& x : w) x = rng.uniform(-5, 5);
        // any homotopy policy is feasible; use the greedy one for arbitrary values
        const auto rho = improve_env_policy(rmc, view(w));
        const auto v = evaluate_env_policy(rmc, rho, 0.8);
        const auto tv = bellman_rmc(rmc, view(v), 0.8);
        for (std::size_t s = 0; s < 6; ++s) CHECK(tv[s] >= v[s] - 1e-10);
    }
}

TEST_CASE("agent policy values are not increased by the RMDP operator", "[eval][property]") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        GeneratorSpec spec;
        spec.seed = seed;
        spec.n = 5;
        spec.m = 3;
        const auto m = generate_rmdp(spec);
        Rng rng(seed);
        AgentPolicy sigma;
        for (std::size_t s = 0; s < 5; ++s) sigma.actions.push_back(rng.index(3));
        const auto v = rmc_policy_iteration(induce_rmc(m, sigma), 0.8).value;
        const auto tv = bellman_rmdp(m, view(v), 0.8).value;
        for (std::size_t s = 0; s < 5; ++s) CHECK(tv[s] <= v[s] + 1e-10);
    }
}

TEST_CASE("value iteration closed forms", "[eval]") {
    RmcInstance<double> zero{3, {0, 0, 0}, {{{1}, {1.0}, 0.0}, {{2}, {1.0}, 0.0}, {{0}, {1.0}, 0.0}}};
    const auto z = robust_value_iteration(zero, 0.9, 1e-8, 1000);
    CHECK(z.converged);
    CHECK(z.iterations == 1);
    CHECK(z.value == std::vector<double>(3, 0.0));

    RmcInstance<double> loop{1, {1.0}, {{{0}, {1.0}, 0.0}}};
    const auto l = robust_value_iteration(loop, 0.9, 1e-8, 100000);
    CHECK(l.converged);
    CHECK(std::fabs(l.value[0] - 10.0) <= 1e-8);

    const auto capped = robust_value_iteration(loop, 0.9, 1e-8, 3);
    CHECK_FALSE(capped.converged);
    CHECK(capped.iterations == 3);
    CHECK_THROWS_AS(robust_value_iteration(loop, 0.9, 0.0, 3), ParameterError);
}
