#pragma once

#include "rpi/errors.hpp"
#include "rpi/inner_max.hpp"
#include "rpi/linalg.hpp"
#include "rpi/model.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rpi {

template <class Real> using ValueVector = std::vector<Real>;

template <class Real> void check_discount(const Real& gamma) {
    if (!(gamma > Real(0) && gamma < Real(1)))
        throw ParameterError("discount factor must lie in (0,1), got " + to_string(gamma));
}

template <class Real> Real sup_norm(std::span<const Real> x) {
    Real m(0);
    for (const Real& v : x) m = std::max<Real>(m, detail::abs_value(v));
    return m;
}

template <class Real> Real sup_distance(std::span<const Real> a, std::span<const Real> b) {
    if (a.size() != b.size()) throw StructuralError("vector size mismatch");
    Real m(0);
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max<Real>(m, detail::abs_value(Real(a[i] - b[i])));
    return m;
}

/// Solves (I - gamma P) v = c by LU with partial pivoting.
template <class Real>
ValueVector<Real> evaluate_chain(const TransitionMatrix<Real>& p, std::span<const Real> cost, const Real& gamma) {
    check_discount(gamma);
    const std::size_t n = p.rows();
    if (p.cols() != n || cost.size() != n) throw StructuralError("evaluate_chain: size mismatch");
    DenseMatrix<Real> a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? Real(1) : Real(0)) - gamma * p(i, j);
    return lu_solve(std::move(a), cost);
}

/// Value of an RMC under a fixed environment policy.
template <class Real>
ValueVector<Real> evaluate_env_policy(const RmcInstance<Real>& rmc, const EnvPolicy<Real>& rho, const Real& gamma,
                                      const Tolerances<Real>& tol = {}) {
    return evaluate_chain(realize(rmc, rho, tol), std::span<const Real>(rmc.cost), gamma);
}

/// `v` restricted to the support of `ball`, in support order.
template <class Real> std::vector<Real> restrict_to(const LInfBall<Real>& ball, std::span<const Real> v) {
    std::vector<Real> out(ball.size());
    for (std::size_t j = 0; j < ball.size(); ++j) out[j] = v[ball.support[j]];
    return out;
}

/// Worst-case continuation max_{p in ball} p.v.
template <class Real> InnerMaxResult<Real> worst_case(const LInfBall<Real>& ball, std::span<const Real> v) {
    auto local = restrict_to(ball, v);
    return homotopy_maximize(ball, std::span<const Real>(local));
}

/// Robust Bellman operator of an RMC: (Tv)_s = c_s + gamma max_{p in P(s)} p.v.
template <class Real>
ValueVector<Real> bellman_rmc(const RmcInstance<Real>& rmc, std::span<const Real> v, const Real& gamma) {
    check_discount(gamma);
    if (v.size() != rmc.n) throw StructuralError("bellman_rmc: value vector size mismatch");
    ValueVector<Real> out(rmc.n);
    for (StateIndex s = 0; s < rmc.n; ++s) out[s] = rmc.cost[s] + gamma * worst_case(rmc.balls[s], v).objective;
    return out;
}

/// Bellman image of an RMDP together with the greedy agent policy.
template <class Real> struct BellmanRmdpResult {
    ValueVector<Real> value;
    AgentPolicy policy;
};

/**
 * Robust Bellman operator of an RMDP: min over actions of the worst-case
 * continuation. The argmin is the lowest action index within `eps_tie` of
 * the minimum.
 */
template <class Real>
BellmanRmdpResult<Real> bellman_rmdp(const RobustMdpInstance<Real>& rmdp, std::span<const Real> v, const Real& gamma,
                                     const Real& eps_tie = ScalarTraits<Real>::eps_tie()) {
    check_discount(gamma);
    if (v.size() != rmdp.n) throw StructuralError("bellman_rmdp: value vector size mismatch");
    BellmanRmdpResult<Real> out;
    out.value.resize(rmdp.n);
    out.policy.actions.resize(rmdp.n);
    for (StateIndex s = 0; s < rmdp.n; ++s) {
        const auto& acts = rmdp.actions[s];
        if (acts.empty()) throw StructuralError("state " + std::to_string(s) + " has no actions");
        std::vector<Real> q(acts.size());
        Real best(0);
        for (ActionIndex a = 0; a < acts.size(); ++a) {
            q[a] = rmdp.cost[s] + gamma * worst_case(acts[a], v).objective;
            if (a == 0 || q[a] < best) best = q[a];
        }
        ActionIndex pick = 0;
        while (!(q[pick] <= best + eps_tie)) ++pick;
        out.policy.actions[s] = pick;
        out.value[s] = best;
    }
    return out;
}

template <class Real> struct ValueIterationResult {
    ValueVector<Real> value;
    AgentPolicy policy; ///< greedy policy of the last sweep (RMDP runs only)
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

template <class Real, class Operator>
ValueIterationResult<Real> run_value_iteration(std::size_t n, const Real& gamma, const Real& tol, std::size_t max_iter,
                                               Operator&& apply) {
    check_discount(gamma);
    if (!(tol > Real(0))) throw ParameterError("value iteration tolerance must be positive");
    // ||v_{k+1} - v_k|| <= tol (1-gamma) / (2 gamma) puts v_{k+1} within tol/2 of the fixed point
    const Real threshold = tol * (Real(1) - gamma) / (Real(2) * gamma);
    ValueIterationResult<Real> result;
    result.value.assign(n, Real(0));
    for (std::size_t k = 0; k < max_iter; ++k) {
        auto next = apply(result.value, result.policy);
        const Real step = sup_distance<Real>(next, result.value);
        result.value = std::move(next);
        result.iterations = k + 1;
        if (step <= threshold) {
            result.converged = true;
            break;
        }
    }
    return result;
}

} // namespace detail

/// Robust value iteration from v0 = 0 for an RMC.
template <class Real>
ValueIterationResult<Real> robust_value_iteration(const RmcInstance<Real>& rmc, const Real& gamma, const Real& tol,
                                                  std::size_t max_iter) {
    return detail::run_value_iteration<Real>(rmc.n, gamma, tol, max_iter,
                                             [&](const ValueVector<Real>& v, AgentPolicy&) {
                                                 return bellman_rmc<Real>(rmc, v, gamma);
                                             });
}

/// Robust value iteration from v0 = 0 for an RMDP.
template <class Real>
ValueIterationResult<Real> robust_value_iteration(const RobustMdpInstance<Real>& rmdp, const Real& gamma,
                                                  const Real& tol, std::size_t max_iter) {
    return detail::run_value_iteration<Real>(rmdp.n, gamma, tol, max_iter,
                                             [&](const ValueVector<Real>& v, AgentPolicy& policy) {
                                                 auto r = bellman_rmdp<Real>(rmdp, v, gamma);
                                                 policy = std::move(r.policy);
                                                 return std::move(r.value);
                                             });
}

} // namespace rpi
