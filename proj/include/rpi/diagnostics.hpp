#pragma once

#include "rpi/eval.hpp"
#include "rpi/model.hpp"
#include "rpi/policy_iteration.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace rpi {

/// Optimal value and environment policy of an RMC, as returned by a converged solve.
template <class Real> struct RmcSolution {
    ValueVector<Real> value;
    EnvPolicy<Real> policy;
};

template <class Real> RmcSolution<Real> solution_of(const RmcSolveTrace<Real>& trace) {
    return {trace.value, trace.policy};
}

/// Optimal value and agent policy of an RMDP.
template <class Real> struct RmdpSolution {
    ValueVector<Real> value;
    AgentPolicy policy;
};

template <class Real> RmdpSolution<Real> solution_of(const RmdpSolveTrace<Real>& trace) {
    return {trace.value, trace.policy};
}

using Triple = std::array<StateIndex, 3>;

namespace detail {

inline void check_triple(std::size_t n, StateIndex s, StateIndex s1, StateIndex s2) {
    if (s >= n || s1 >= n || s2 >= n)
        throw StructuralError("state triple (" + std::to_string(s) + "," + std::to_string(s1) + "," +
                              std::to_string(s2) + ") out of range for " + std::to_string(n) + " states");
}

/// min(P*_{s,s1} - P_{s,s1}, P_{s,s2} - P*_{s,s2}): the mass a move from s2 to s1 can shift toward P*.
template <class Real>
Real transfer_amount(const TransitionMatrix<Real>& p_star, const TransitionMatrix<Real>& p_rho, StateIndex s,
                     StateIndex s1, StateIndex s2) {
    return std::min<Real>(p_star(s, s1) - p_rho(s, s1), p_rho(s, s2) - p_star(s, s2));
}

template <class Real>
Real mass_potential(const TransitionMatrix<Real>& p_star, const TransitionMatrix<Real>& p_rho,
                    std::span<const Real> v_star, StateIndex s, StateIndex s1, StateIndex s2) {
    return transfer_amount(p_star, p_rho, s, s1, s2) * (v_star[s1] - v_star[s2]);
}

template <class Real> double log_ratio(double num, const Real& gamma) {
    return std::log(num) / std::log(to_double(gamma));
}

} // namespace detail

/// Mass-transfer potential f_rho(s, s1, s2) of an RMC policy relative to a solution.
template <class Real>
Real potential_rmc(const RmcInstance<Real>& rmc, [[maybe_unused]] const Real& gamma, std::span<const Real> v_star,
                   const EnvPolicy<Real>& p_star, const EnvPolicy<Real>& rho, StateIndex s, StateIndex s1,
                   StateIndex s2) {
    detail::check_triple(rmc.n, s, s1, s2);
    const auto star = realize(rmc, p_star);
    const auto cur = realize(rmc, rho);
    return detail::mass_potential<Real>(star, cur, v_star, s, s1, s2);
}

template <class Real> struct PotentialArgmax {
    Triple triple{0, 0, 0};
    Real value{0};
};

namespace detail {

template <class Real>
PotentialArgmax<Real> scan_triples(const TransitionMatrix<Real>& star, const TransitionMatrix<Real>& cur,
                                   std::span<const Real> v_star) {
    const std::size_t n = star.rows();
    PotentialArgmax<Real> best;
    bool first = true;
    for (StateIndex s = 0; s < n; ++s)
        for (StateIndex s1 = 0; s1 < n; ++s1)
            for (StateIndex s2 = 0; s2 < n; ++s2) {
                const Real f = mass_potential<Real>(star, cur, v_star, s, s1, s2);
                if (first || f > best.value) {
                    best = {{s, s1, s2}, f};
                    first = false;
                }
            }
    return best;
}

} // namespace detail

/// Exhaustive argmax of f_rho over all n^3 triples; ties go to the lexicographically first.
template <class Real>
PotentialArgmax<Real> max_potential_rmc(const RmcInstance<Real>& rmc, [[maybe_unused]] const Real& gamma,
                                        const RmcSolution<Real>& solution, const EnvPolicy<Real>& rho) {
    return detail::scan_triples<Real>(realize(rmc, solution.policy), realize(rmc, rho),
                                      std::span<const Real>(solution.value));
}

template <class Real> struct LowerBoundViolation {
    Triple triple{0, 0, 0};
    Real slack{0};    ///< (v*_s - v_s) - gamma f; negative here
    Real transfer{0}; ///< the min(...) factor of f
};

template <class Real> struct RmcPotentialReport {
    PotentialArgmax<Real> argmax;
    ValueVector<Real> policy_value;
    Real lower_slack{0}; ///< min over triples of (v*_s - v_s) - gamma f(s,s1,s2)
    Real upper_slack{0}; ///< n^2 gamma / (1-gamma) max f - ||v* - v||
    std::vector<LowerBoundViolation<Real>> lower_violations;
    bool upper_violated = false;

    std::size_t violations() const { return lower_violations.size() + (upper_violated ? 1 : 0); }

    /// Violations on triples whose transfer factor is negative, i.e. no feasible
    /// move of mass from s2 to s1 exists.
    std::size_t negative_transfer_violations() const {
        std::size_t count = 0;
        for (const auto& v : lower_violations)
            if (v.transfer < Real(0)) ++count;
        return count;
    }
};

/**
 * Checks the two potential bounds for an RMC policy `rho`:
 *   (a) v*_s - v^rho_s >= gamma f_rho(s,s1,s2) for every triple;
 *   (b) ||v* - v^rho||_inf <= n^2 gamma / (1-gamma) max f_rho.
 * Violations beyond `tol` are reported, never thrown.
 */
template <class Real>
RmcPotentialReport<Real> check_rmc_lemma_bounds(const RmcInstance<Real>& rmc, const Real& gamma,
                                                const RmcSolution<Real>& solution, const EnvPolicy<Real>& rho,
                                                const Real& tol = from_double<Real>(1e-9)) {
    check_discount(gamma);
    const auto star = realize(rmc, solution.policy);
    const auto cur = realize(rmc, rho);
    const std::span<const Real> v_star(solution.value);
    RmcPotentialReport<Real> report;
    report.policy_value = evaluate_chain(cur, std::span<const Real>(rmc.cost), gamma);
    report.argmax = detail::scan_triples<Real>(star, cur, v_star);

    const std::size_t n = rmc.n;
    bool first = true;
    for (StateIndex s = 0; s < n; ++s) {
        const Real gap = v_star[s] - report.policy_value[s];
        for (StateIndex s1 = 0; s1 < n; ++s1)
            for (StateIndex s2 = 0; s2 < n; ++s2) {
                const Real transfer = detail::transfer_amount(star, cur, s, s1, s2);
                const Real slack = gap - gamma * transfer * (v_star[s1] - v_star[s2]);
                if (first || slack < report.lower_slack) report.lower_slack = slack;
                first = false;
                if (slack < -tol) report.lower_violations.push_back({{s, s1, s2}, slack, transfer});
            }
    }
    const Real distance = sup_distance<Real>(v_star, report.policy_value);
    const Real n2 = Real(static_cast<long long>(n * n));
    report.upper_slack = n2 * gamma / (Real(1) - gamma) * report.argmax.value - distance;
    report.upper_violated = report.upper_slack < -tol;
    return report;
}

/// Action-swap potential f(s,a): worst case of (s,a) minus worst case of (s, sigma*(s)), both against v*.
template <class Real>
Real potential_rmdp(const RobustMdpInstance<Real>& rmdp, [[maybe_unused]] const Real& gamma,
                    std::span<const Real> v_star, const AgentPolicy& sigma_star, StateIndex s, ActionIndex a) {
    check_agent_policy(rmdp, sigma_star);
    if (s >= rmdp.n) throw StructuralError("state " + std::to_string(s) + " out of range");
    if (a >= rmdp.action_count(s))
        throw StructuralError("action " + std::to_string(a) + " invalid at state " + std::to_string(s));
    return worst_case(rmdp.actions[s][a], v_star).objective -
           worst_case(rmdp.actions[s][sigma_star[s]], v_star).objective;
}

template <class Real> struct RmdpPotentialReport {
    ValueVector<Real> policy_value; ///< robust value of the checked sigma
    StateIndex argmax_state = 0;
    Real max_potential{0};
    Real lower_slack{0}; ///< min_s (v^sigma_s - v*_s) - gamma f(s, sigma(s))
    Real upper_slack{0}; ///< gamma/(1-gamma) f(s^, sigma(s^)) - ||v^sigma - v*||
    std::vector<StateIndex> lower_violations;
    bool upper_violated = false;

    std::size_t violations() const { return lower_violations.size() + (upper_violated ? 1 : 0); }
};

/**
 * Checks the action-swap bounds for an agent policy `sigma`:
 *   v^sigma_s - v*_s >= gamma f(s, sigma(s)) for all s, and
 *   ||v^sigma - v*||_inf <= gamma/(1-gamma) f(s^, sigma(s^)) at the potential argmax s^.
 * v^sigma is the robust value of sigma, obtained from RMC policy iteration.
 */
template <class Real>
RmdpPotentialReport<Real> check_rmdp_lemma_bounds(const RobustMdpInstance<Real>& rmdp, const Real& gamma,
                                                  const RmdpSolution<Real>& solution, const AgentPolicy& sigma,
                                                  const Real& tol = from_double<Real>(1e-9)) {
    check_discount(gamma);
    check_agent_policy(rmdp, sigma);
    const std::span<const Real> v_star(solution.value);
    RmdpPotentialReport<Real> report;
    report.policy_value = rmc_policy_iteration(induce_rmc(rmdp, sigma), gamma).value;

    std::vector<Real> f(rmdp.n);
    for (StateIndex s = 0; s < rmdp.n; ++s) {
        f[s] = potential_rmdp(rmdp, gamma, v_star, solution.policy, s, sigma[s]);
        if (s == 0 || f[s] > report.max_potential) {
            report.max_potential = f[s];
            report.argmax_state = s;
        }
        const Real slack = report.policy_value[s] - v_star[s] - gamma * f[s];
        if (s == 0 || slack < report.lower_slack) report.lower_slack = slack;
        if (slack < -tol) report.lower_violations.push_back(s);
    }
    const Real distance = sup_distance<Real>(report.policy_value, v_star);
    report.upper_slack = gamma / (Real(1) - gamma) * report.max_potential - distance;
    report.upper_violated = report.upper_slack < -tol;
    return report;
}

struct DynamicsViolation {
    std::size_t from = 0;         ///< iteration whose argmax is tracked
    std::size_t to = 0;           ///< later iteration that breaks the bound
    std::vector<StateIndex> key;  ///< maximizing triple (RMC) or state (RMDP)
};

/// Result of checking a recorded PI trace against the step-threshold bounds.
struct BoundReport {
    double step_threshold = 0;     ///< L
    double iteration_ceiling = 0;  ///< reported iteration formula
    bool ceiling_asserted = false; ///< true for RMDP traces only
    bool ceiling_holds = true;
    std::size_t iterations = 0;
    std::size_t checks = 0;
    std::vector<DynamicsViolation> violations;

    bool clean() const { return violations.empty() && ceiling_holds; }
};

/**
 * RMC traces: for the maximizing triple (s,s1,s2) of each iterate t, the
 * transfer factor must have at least halved at every iterate l > t + L with
 * L = log_gamma((1-gamma)/(2 n^2)). The iteration formula
 * n^4 log n * log((1-gamma)/n^2) / log gamma is reported, not asserted: it
 * hides constants.
 */
template <class Real>
BoundReport check_trace_dynamics(const RmcInstance<Real>& rmc, const RmcSolveTrace<Real>& trace, const Real& gamma,
                                 const Real& tol = from_double<Real>(1e-9)) {
    check_discount(gamma);
    const double n = static_cast<double>(rmc.n);
    BoundReport report;
    report.step_threshold = detail::log_ratio((1.0 - to_double(gamma)) / (2.0 * n * n), gamma);
    report.iteration_ceiling = std::pow(n, 4) * std::log(n) * detail::log_ratio((1.0 - to_double(gamma)) / (n * n), gamma);
    report.iterations = trace.iteration_count();
    if (trace.iterations.empty()) return report;

    const auto star = realize(rmc, trace.policy);
    const std::span<const Real> v_star(trace.value);
    std::vector<TransitionMatrix<Real>> mats;
    mats.reserve(trace.iterations.size());
    for (const auto& it : trace.iterations) mats.push_back(realize(rmc, it.policy));

    const std::size_t total = mats.size();
    for (std::size_t t = 0; t < total; ++t) {
        const auto arg = detail::scan_triples<Real>(star, mats[t], v_star);
        const auto [s, s1, s2] = arg.triple;
        const Real base = detail::transfer_amount(star, mats[t], s, s1, s2);
        for (std::size_t l = t + 1; l < total; ++l) {
            if (!(static_cast<double>(l) > static_cast<double>(t) + report.step_threshold)) continue;
            ++report.checks;
            const Real later = detail::transfer_amount(star, mats[l], s, s1, s2);
            if (later > base / Real(2) + tol) report.violations.push_back({t, l, {s, s1, s2}});
        }
    }
    return report;
}

/**
 * RMDP traces: with s^ the potential argmax under sigma^l, no iterate
 * k > l + L may pick sigma^l(s^) again at s^, L = log_gamma(1-gamma). Iterates
 * whose potential is already zero (optimal policies) make the bound vacuous
 * and are skipped. The outer iteration count must not exceed
 * ceil(n m log(1-gamma) / log gamma), m the largest action count.
 */
template <class Real>
BoundReport check_trace_dynamics(const RobustMdpInstance<Real>& rmdp, const RmdpSolveTrace<Real>& trace,
                                 const Real& gamma, const Real& tol = from_double<Real>(1e-9)) {
    check_discount(gamma);
    BoundReport report;
    report.step_threshold = detail::log_ratio(1.0 - to_double(gamma), gamma);
    report.iteration_ceiling = std::ceil(static_cast<double>(rmdp.n) * static_cast<double>(rmdp.max_actions()) *
                                         report.step_threshold);
    report.ceiling_asserted = true;
    report.iterations = trace.outer_iterations();
    report.ceiling_holds = static_cast<double>(report.iterations) <= report.iteration_ceiling;
    if (trace.iterations.empty()) return report;

    const std::span<const Real> v_star(trace.value);
    const std::size_t total = trace.iterations.size();
    for (std::size_t l = 0; l < total; ++l) {
        const auto& sigma = trace.iterations[l].policy;
        StateIndex hat = 0;
        Real best(0);
        for (StateIndex s = 0; s < rmdp.n; ++s) {
            const Real f = potential_rmdp(rmdp, gamma, v_star, trace.policy, s, sigma[s]);
            if (s == 0 || f > best) {
                best = f;
                hat = s;
            }
        }
        if (best <= tol) continue;
        for (std::size_t k = l + 1; k < total; ++k) {
            if (!(static_cast<double>(k) > static_cast<double>(l) + report.step_threshold)) continue;
            ++report.checks;
            if (trace.iterations[k].policy[hat] == sigma[hat]) report.violations.push_back({l, k, {hat}});
        }
    }
    return report;
}

} // namespace rpi
