#pragma once

#include "rpi/eval.hpp"
#include "rpi/inner_max.hpp"
#include "rpi/model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

namespace rpi {

inline constexpr std::size_t kDefaultMaxIter = 100000;

/// One evaluated environment policy of RMC-PI.
template <class Real> struct RmcIteration {
    EnvPolicy<Real> policy;
    ValueVector<Real> value;
    Real residual{0}; ///< ||T v - v||_inf
};

template <class Real> struct RmcSolveTrace {
    std::vector<RmcIteration<Real>> iterations;
    EnvPolicy<Real> policy; ///< final (optimal when converged)
    ValueVector<Real> value;
    bool converged = false;
    bool warm_started = false;

    std::size_t iteration_count() const { return iterations.size(); }
};

/// Greedy environment improvement: per state, the homotopy maximizer against `v`.
template <class Real> EnvPolicy<Real> improve_env_policy(const RmcInstance<Real>& rmc, std::span<const Real> v) {
    if (v.size() != rmc.n) throw StructuralError("improve_env_policy: value vector size mismatch");
    EnvPolicy<Real> rho;
    rho.rows.reserve(rmc.n);
    for (StateIndex s = 0; s < rmc.n; ++s) rho.rows.push_back(worst_case(rmc.balls[s], v).distribution);
    return rho;
}

/**
 * Policy iteration for robust Markov chains.
 *
 * Alternates exact evaluation with homotopy improvement, starting from
 * `initial` (nominal when absent). Stops once no state gains more than
 * `tol.fix` from improving, i.e. ||T v - v||_inf <= tol.fix; with exact
 * scalars that is the point where the improved policy has the same objective
 * as the current one.
 */
template <class Real>
RmcSolveTrace<Real> rmc_policy_iteration(const RmcInstance<Real>& rmc, const Real& gamma,
                                         std::optional<std::type_identity_t<EnvPolicy<Real>>> initial = std::nullopt,
                                         std::size_t max_iter = kDefaultMaxIter, const Tolerances<Real>& tol = {}) {
    check_discount(gamma);
    RmcSolveTrace<Real> trace;
    trace.warm_started = initial.has_value();
    EnvPolicy<Real> rho = initial ? std::move(*initial) : nominal_policy(rmc);

    for (std::size_t t = 0; t < max_iter; ++t) {
        auto v = evaluate_env_policy(rmc, rho, gamma, tol);
        EnvPolicy<Real> improved;
        improved.rows.reserve(rmc.n);
        Real residual(0);
        for (StateIndex s = 0; s < rmc.n; ++s) {
            auto best = worst_case(rmc.balls[s], std::span<const Real>(v));
            const Real tv = rmc.cost[s] + gamma * best.objective;
            residual = std::max<Real>(residual, detail::abs_value(Real(tv - v[s])));
            improved.rows.push_back(std::move(best.distribution));
        }
        trace.iterations.push_back({rho, v, residual});
        trace.policy = rho;
        trace.value = v;
        if (residual <= tol.fix) {
            trace.converged = true;
            break;
        }
        rho = std::move(improved);
    }
    return trace;
}

/**
 * Greedy agent improvement against `v`. The incumbent action is kept whenever
 * it is within `eps_tie` of the best; otherwise the lowest tied action wins.
 */
template <class Real>
AgentPolicy improve_agent_policy(const RobustMdpInstance<Real>& rmdp, std::span<const Real> v,
                                 const AgentPolicy& incumbent, const Real& gamma,
                                 const Real& eps_tie = ScalarTraits<Real>::eps_tie()) {
    check_agent_policy(rmdp, incumbent);
    if (v.size() != rmdp.n) throw StructuralError("improve_agent_policy: value vector size mismatch");
    AgentPolicy next = incumbent;
    for (StateIndex s = 0; s < rmdp.n; ++s) {
        const auto& acts = rmdp.actions[s];
        std::vector<Real> q(acts.size());
        Real best(0);
        for (ActionIndex a = 0; a < acts.size(); ++a) {
            q[a] = rmdp.cost[s] + gamma * worst_case(acts[a], v).objective;
            if (a == 0 || q[a] < best) best = q[a];
        }
        if (q[incumbent[s]] <= best + eps_tie) continue;
        ActionIndex pick = 0;
        while (!(q[pick] <= best + eps_tie)) ++pick;
        next.actions[s] = pick;
    }
    return next;
}

template <class Real> struct RmdpIteration {
    AgentPolicy policy;
    RmcSolveTrace<Real> inner;
    ValueVector<Real> value;
};

template <class Real> struct RmdpSolveTrace {
    std::vector<RmdpIteration<Real>> iterations;
    AgentPolicy policy;         ///< sigma*
    EnvPolicy<Real> env_policy; ///< rho* on the pairs (s, sigma*(s))
    ValueVector<Real> value;
    bool converged = false;

    std::size_t outer_iterations() const { return iterations.size(); }

    std::size_t inner_iterations() const {
        std::size_t total = 0;
        for (const auto& it : iterations) total += it.inner.iteration_count();
        return total;
    }
};

/**
 * Policy iteration for robust MDPs. Each outer step solves the induced RMC
 * with `rmc_policy_iteration`, warm-started from the previous environment
 * policy on every state whose action survived, then improves the agent
 * policy. Stops when the agent policy repeats.
 */
template <class Real>
RmdpSolveTrace<Real> rmdp_policy_iteration(const RobustMdpInstance<Real>& rmdp, const Real& gamma,
                                           std::optional<AgentPolicy> initial = std::nullopt,
                                           std::size_t max_iter = kDefaultMaxIter, const Tolerances<Real>& tol = {},
                                           bool warm_start = true) {
    check_discount(gamma);
    AgentPolicy sigma = initial ? std::move(*initial) : AgentPolicy{std::vector<ActionIndex>(rmdp.n, 0)};
    check_agent_policy(rmdp, sigma);

    RmdpSolveTrace<Real> trace;
    std::optional<AgentPolicy> previous_sigma;
    EnvPolicy<Real> previous_rho;
    for (std::size_t t = 0; t < max_iter; ++t) {
        const auto rmc = induce_rmc(rmdp, sigma);
        std::optional<EnvPolicy<Real>> seed;
        if (warm_start && previous_sigma) {
            seed = nominal_policy(rmc);
            for (StateIndex s = 0; s < rmdp.n; ++s)
                if ((*previous_sigma)[s] == sigma[s]) seed->rows[s] = previous_rho.rows[s];
        }
        auto inner = rmc_policy_iteration(rmc, gamma, std::move(seed), max_iter, tol);
        const bool inner_ok = inner.converged;
        trace.iterations.push_back({sigma, inner, inner.value});
        trace.policy = sigma;
        trace.env_policy = inner.policy;
        trace.value = inner.value;
        if (!inner_ok) break;

        auto next = improve_agent_policy(rmdp, std::span<const Real>(trace.value), sigma, gamma, tol.tie);
        if (next == sigma) {
            trace.converged = true;
            break;
        }
        previous_sigma = sigma;
        previous_rho = std::move(inner.policy);
        sigma = std::move(next);
    }
    return trace;
}

} // namespace rpi
