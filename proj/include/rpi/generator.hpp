#pragma once

#include "rpi/errors.hpp"
#include "rpi/game.hpp"
#include "rpi/model.hpp"
#include "rpi/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace rpi {

/// Parameters of the random instance generator.
struct GeneratorSpec {
    std::uint64_t seed = 0;
    std::size_t n = 5;
    std::size_t m = 1;
    double density = 3.0; ///< mean support size
    double delta_lo = 0.0;
    double delta_hi = 0.2;
    double cost_lo = 0.0;
    double cost_hi = 1.0;
    double gamma = 0.9;

    void check() const {
        if (n == 0 || m == 0) throw ParameterError("generator needs n, m >= 1");
        if (!(density >= 1.0)) throw ParameterError("density must be >= 1");
        if (!(delta_lo >= 0.0 && delta_lo <= delta_hi && delta_hi <= 1.0))
            throw ParameterError("delta range must satisfy 0 <= lo <= hi <= 1");
        if (!(cost_lo <= cost_hi) || !std::isfinite(cost_lo) || !std::isfinite(cost_hi))
            throw ParameterError("cost range must satisfy lo <= hi");
        if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0,1)");
    }
};

/**
 * 64-bit Mersenne twister with hand-rolled uniform draws, so sequences are
 * identical across standard library implementations.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform on {0, ..., k-1}.
    std::size_t index(std::size_t k) { return static_cast<std::size_t>(engine_() % k); }
    /// Uniform on {lo, ..., hi}.
    long long integer(long long lo, long long hi) {
        return lo + static_cast<long long>(index(static_cast<std::size_t>(hi - lo + 1)));
    }
    std::uint64_t next() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

/// `k` distinct states out of `n`, ascending.
inline std::vector<StateIndex> random_support(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<StateIndex> pool(n);
    std::iota(pool.begin(), pool.end(), StateIndex{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.index(n - i)]);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// Support size with mean close to `density`, clamped to [1, n].
inline std::size_t random_support_size(Rng& rng, std::size_t n, double density) {
    const auto span = static_cast<std::size_t>(std::llround(2.0 * density - 1.0));
    return std::clamp<std::size_t>(1 + rng.index(std::max<std::size_t>(span, 1)), 1, n);
}

/// Normalized exponential weights: a flat Dirichlet draw.
inline std::vector<double> random_distribution(Rng& rng, std::size_t k) {
    std::vector<double> w(k);
    double total = 0;
    for (auto& x : w) {
        x = -std::log1p(-rng.uniform());
        if (x <= 0) x = 0x1.0p-53;
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

inline LInfBall<double> random_ball(Rng& rng, std::size_t n, double density, double delta_lo, double delta_hi) {
    LInfBall<double> ball;
    ball.support = random_support(rng, n, random_support_size(rng, n, density));
    ball.nominal = random_distribution(rng, ball.support.size());
    ball.radius = rng.uniform(delta_lo, delta_hi);
    return ball;
}

/// Deterministic random RMDP with exactly `m` actions per state.
inline RobustMdpInstance<double> generate_rmdp(const GeneratorSpec& spec) {
    spec.check();
    Rng rng(spec.seed);
    RobustMdpInstance<double> out;
    out.n = spec.n;
    out.cost.resize(spec.n);
    for (auto& c : out.cost) c = rng.uniform(spec.cost_lo, spec.cost_hi);
    out.actions.resize(spec.n);
    for (auto& acts : out.actions)
        for (std::size_t a = 0; a < spec.m; ++a)
            acts.push_back(random_ball(rng, spec.n, spec.density, spec.delta_lo, spec.delta_hi));
    return out;
}

inline RmcInstance<double> generate_rmc(GeneratorSpec spec) {
    spec.m = 1;
    return induce_rmc(generate_rmdp(spec), AgentPolicy{std::vector<ActionIndex>(spec.n, 0)});
}

/**
 * Exact variant: nominals are integer weights in [1, 8] over their total and
 * radii multiples of 1/40 inside the delta range, costs multiples of 1/4.
 */
inline RobustMdpInstance<Rational> generate_rmdp_exact(const GeneratorSpec& spec) {
    spec.check();
    Rng rng(spec.seed);
    RobustMdpInstance<Rational> out;
    out.n = spec.n;
    const auto cost_lo = static_cast<long long>(std::ceil(spec.cost_lo * 4));
    const auto cost_hi = std::max(cost_lo, static_cast<long long>(std::floor(spec.cost_hi * 4)));
    for (std::size_t s = 0; s < spec.n; ++s) out.cost.emplace_back(rng.integer(cost_lo, cost_hi), 4);
    const auto delta_lo = static_cast<long long>(std::ceil(spec.delta_lo * 40));
    const auto delta_hi = std::max(delta_lo, static_cast<long long>(std::floor(spec.delta_hi * 40)));
    out.actions.resize(spec.n);
    for (auto& acts : out.actions)
        for (std::size_t a = 0; a < spec.m; ++a) {
            LInfBall<Rational> ball;
            ball.support = random_support(rng, spec.n, random_support_size(rng, spec.n, spec.density));
            std::vector<long long> w(ball.support.size());
            long long total = 0;
            for (auto& x : w) total += (x = rng.integer(1, 8));
            for (auto x : w) ball.nominal.emplace_back(x, total);
            ball.radius = Rational(rng.integer(delta_lo, delta_hi), 40);
            acts.push_back(std::move(ball));
        }
    return out;
}

/// Random turn-based game: roles uniform, up to three successors per controlled state.
inline StochasticGame<double> generate_game(std::uint64_t seed, std::size_t n, double cost_lo = 0.0,
                                            double cost_hi = 1.0) {
    if (n == 0) throw ParameterError("game needs at least one state");
    Rng rng(seed);
    StochasticGame<double> g;
    g.n = n;
    for (std::size_t s = 0; s < n; ++s) {
        g.cost.push_back(rng.uniform(cost_lo, cost_hi));
        const std::size_t role = rng.index(3);
        if (role == 2) {
            g.sr.push_back(s);
            const auto support = random_support(rng, n, 1 + rng.index(std::min<std::size_t>(n, 3)));
            const auto w = random_distribution(rng, support.size());
            std::vector<double> row(n, 0.0);
            for (std::size_t j = 0; j < support.size(); ++j) row[support[j]] = w[j];
            g.p[s] = std::move(row);
        } else {
            (role == 0 ? g.s1 : g.s2).push_back(s);
            g.succ[s] = random_support(rng, n, 1 + rng.index(std::min<std::size_t>(n, 3)));
        }
    }
    return g;
}

/// `size` nonnegative rationals p/q with p in [0, max_value], q in [1, max_denom]; may repeat.
inline std::vector<Rational> random_rational_set(Rng& rng, std::size_t size, long long max_denom,
                                                 long long max_value = 1000) {
    if (max_denom < 1 || max_value < 0) throw ParameterError("random rational set needs max_denom >= 1");
    std::vector<Rational> out;
    out.reserve(size);
    for (std::size_t i = 0; i < size; ++i) out.emplace_back(rng.integer(0, max_value), rng.integer(1, max_denom));
    return out;
}

} // namespace rpi
