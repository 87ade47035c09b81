#pragma once

#include "rpi/errors.hpp"
#include "rpi/linalg.hpp"
#include "rpi/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace rpi {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/**
 * The L-infinity uncertainty set around a nominal distribution:
 * { p in simplex(support) : |p_j - nominal_j| <= radius for all j }.
 *
 * `nominal[j]` is the probability of moving to `support[j]`; supports are
 * sorted ascending and duplicate free.
 */
template <class Real> struct LInfBall {
    std::vector<StateIndex> support;
    std::vector<Real> nominal;
    Real radius{0};

    std::size_t size() const { return support.size(); }

    /// Upper bound of coordinate j inside ball and simplex.
    Real upper(std::size_t j) const { return std::min<Real>(Real(1), nominal[j] + radius); }
    /// Lower bound of coordinate j inside ball and simplex.
    Real lower(std::size_t j) const { return std::max<Real>(Real(0), nominal[j] - radius); }

    bool operator==(const LInfBall&) const = default;
};

/// Robust Markov chain: one uncertainty set per state.
template <class Real> struct RmcInstance {
    std::size_t n = 0;
    std::vector<Real> cost;
    std::vector<LInfBall<Real>> balls;

    bool operator==(const RmcInstance&) const = default;
};

/// Robust MDP with (s,a)-rectangular uncertainty: `actions[s][a]` is the ball of (s,a).
template <class Real> struct RobustMdpInstance {
    std::size_t n = 0;
    std::vector<Real> cost;
    std::vector<std::vector<LInfBall<Real>>> actions;

    std::size_t action_count(StateIndex s) const { return actions[s].size(); }

    std::size_t max_actions() const {
        std::size_t m = 0;
        for (const auto& a : actions) m = std::max(m, a.size());
        return m;
    }

    bool operator==(const RobustMdpInstance&) const = default;
};

/// Positional deterministic agent policy.
struct AgentPolicy {
    std::vector<ActionIndex> actions;

    ActionIndex operator[](StateIndex s) const { return actions[s]; }
    std::size_t size() const { return actions.size(); }
    bool operator==(const AgentPolicy&) const = default;
};

/// Environment policy of an RMC: per state, a distribution over that state's support.
template <class Real> struct EnvPolicy {
    std::vector<std::vector<Real>> rows;

    const std::vector<Real>& operator[](StateIndex s) const { return rows[s]; }
    std::size_t size() const { return rows.size(); }
    bool operator==(const EnvPolicy&) const = default;
};

/// Environment policy of an RMDP: `rows[s][a]` is the distribution chosen at (s,a).
template <class Real> struct RmdpEnvPolicy {
    std::vector<std::vector<std::vector<Real>>> rows;
};

template <class Real> using TransitionMatrix = DenseMatrix<Real>;

/// Violations make an instance unusable; warnings record silent repairs.
struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const { return violations.empty(); }
    bool empty() const { return violations.empty() && warnings.empty(); }
};

namespace detail {

template <class Real> Real abs_value(const Real& x) { return x < Real(0) ? Real(-x) : x; }

template <class Real> bool is_finite(const Real& x) {
    if constexpr (ScalarTraits<Real>::exact) {
        return true;
    } else {
        return std::isfinite(x);
    }
}

template <class Real>
void validate_ball(LInfBall<Real>& ball, std::size_t n, const Real& eps_sum, const std::string& where,
                   ValidationReport& report) {
    if (ball.support.empty()) {
        report.violations.push_back(where + ": empty support");
        return;
    }
    if (ball.nominal.size() != ball.support.size()) {
        report.violations.push_back(where + ": nominal has " + std::to_string(ball.nominal.size()) +
                                    " entries but support has " + std::to_string(ball.support.size()));
        return;
    }
    for (std::size_t j = 0; j < ball.support.size(); ++j) {
        if (ball.support[j] >= n)
            report.violations.push_back(where + ": support index " + std::to_string(ball.support[j]) +
                                        " out of range [0," + std::to_string(n) + ")");
        if (j > 0 && ball.support[j] <= ball.support[j - 1])
            report.violations.push_back(where + ": support not strictly ascending at position " +
                                        std::to_string(j));
    }
    Real mass(0);
    for (std::size_t j = 0; j < ball.nominal.size(); ++j) {
        const Real& p = ball.nominal[j];
        if (!is_finite(p) || p < Real(0) || p > Real(1))
            report.violations.push_back(where + ": nominal entry " + std::to_string(j) + " = " + to_string(p) +
                                        " outside [0,1]");
        mass += p;
    }
    if (abs_value(Real(mass - Real(1))) > eps_sum)
        report.violations.push_back(where + ": nominal mass " + to_string(mass) + " != 1");
    if (!is_finite(ball.radius) || ball.radius < Real(0)) {
        report.violations.push_back(where + ": negative radius " + to_string(ball.radius));
    } else if (ball.radius > Real(1)) {
        report.warnings.push_back(where + ": radius " + to_string(ball.radius) + " clamped to 1");
        ball.radius = Real(1);
    }
}

template <class Real>
void validate_costs(const std::vector<Real>& cost, std::size_t n, ValidationReport& report) {
    if (cost.size() != n)
        report.violations.push_back("cost vector has " + std::to_string(cost.size()) + " entries, expected " +
                                    std::to_string(n));
    for (std::size_t s = 0; s < cost.size(); ++s)
        if (!is_finite(cost[s])) report.violations.push_back("cost of state " + std::to_string(s) + " not finite");
}

} // namespace detail

/**
 * Checks every structural and numeric invariant of an RMDP and reports all
 * problems found. Radii above 1 are clamped in place (a warning, not a
 * violation): past 1 the ball already covers the whole simplex.
 */
template <class Real>
ValidationReport validate_rmdp(RobustMdpInstance<Real>& instance,
                               const Real& eps_sum = ScalarTraits<Real>::eps_sum()) {
    ValidationReport report;
    if (instance.n == 0) report.violations.push_back("instance has no states");
    detail::validate_costs(instance.cost, instance.n, report);
    if (instance.actions.size() != instance.n) {
        report.violations.push_back("action table has " + std::to_string(instance.actions.size()) +
                                    " states, expected " + std::to_string(instance.n));
        return report;
    }
    for (StateIndex s = 0; s < instance.n; ++s) {
        if (instance.actions[s].empty())
            report.violations.push_back("state " + std::to_string(s) + ": no actions");
        for (ActionIndex a = 0; a < instance.actions[s].size(); ++a)
            detail::validate_ball(instance.actions[s][a], instance.n, eps_sum,
                                  "state " + std::to_string(s) + " action " + std::to_string(a), report);
    }
    return report;
}

template <class Real>
ValidationReport validate_rmc(RmcInstance<Real>& instance, const Real& eps_sum = ScalarTraits<Real>::eps_sum()) {
    ValidationReport report;
    if (instance.n == 0) report.violations.push_back("instance has no states");
    detail::validate_costs(instance.cost, instance.n, report);
    if (instance.balls.size() != instance.n) {
        report.violations.push_back("ball table has " + std::to_string(instance.balls.size()) +
                                    " states, expected " + std::to_string(instance.n));
        return report;
    }
    for (StateIndex s = 0; s < instance.n; ++s)
        detail::validate_ball(instance.balls[s], instance.n, eps_sum, "state " + std::to_string(s), report);
    return report;
}

template <class Real> void check_agent_policy(const RobustMdpInstance<Real>& rmdp, const AgentPolicy& sigma) {
    if (sigma.size() != rmdp.n)
        throw StructuralError("agent policy covers " + std::to_string(sigma.size()) + " states, expected " +
                              std::to_string(rmdp.n));
    for (StateIndex s = 0; s < rmdp.n; ++s)
        if (sigma[s] >= rmdp.action_count(s))
            throw StructuralError("agent policy picks action " + std::to_string(sigma[s]) + " at state " +
                                  std::to_string(s) + " which has " + std::to_string(rmdp.action_count(s)) +
                                  " actions");
}

/// The RMC left over once the agent commits to `sigma`.
template <class Real> RmcInstance<Real> induce_rmc(const RobustMdpInstance<Real>& rmdp, const AgentPolicy& sigma) {
    check_agent_policy(rmdp, sigma);
    RmcInstance<Real> rmc;
    rmc.n = rmdp.n;
    rmc.cost = rmdp.cost;
    rmc.balls.reserve(rmdp.n);
    for (StateIndex s = 0; s < rmdp.n; ++s) rmc.balls.push_back(rmdp.actions[s][sigma[s]]);
    return rmc;
}

/// A single-action RMDP view of an RMC.
template <class Real> RobustMdpInstance<Real> as_rmdp(const RmcInstance<Real>& rmc) {
    RobustMdpInstance<Real> rmdp;
    rmdp.n = rmc.n;
    rmdp.cost = rmc.cost;
    for (const auto& ball : rmc.balls) rmdp.actions.push_back({ball});
    return rmdp;
}

template <class Real> EnvPolicy<Real> nominal_policy(const RmcInstance<Real>& rmc) {
    EnvPolicy<Real> rho;
    rho.rows.reserve(rmc.n);
    for (const auto& ball : rmc.balls) rho.rows.push_back(ball.nominal);
    return rho;
}

/// True when `dist` lies in the ball and the simplex up to the given slack.
template <class Real>
bool in_ball(const LInfBall<Real>& ball, const std::vector<Real>& dist, const Real& eps_feas, const Real& eps_sum) {
    if (dist.size() != ball.size()) return false;
    Real mass(0);
    for (std::size_t j = 0; j < dist.size(); ++j) {
        if (dist[j] < -eps_feas) return false;
        if (detail::abs_value(Real(dist[j] - ball.nominal[j])) > ball.radius + eps_feas) return false;
        mass += dist[j];
    }
    return detail::abs_value(Real(mass - Real(1))) <= eps_sum;
}

/// Scatters each row of `rho` to a full n-vector: the Markov chain the RMC becomes under `rho`.
template <class Real>
TransitionMatrix<Real> realize(const RmcInstance<Real>& rmc, const EnvPolicy<Real>& rho,
                               const Tolerances<Real>& tol = {}) {
    if (rho.size() != rmc.n)
        throw StructuralError("environment policy covers " + std::to_string(rho.size()) + " states, expected " +
                              std::to_string(rmc.n));
    TransitionMatrix<Real> p(rmc.n, rmc.n);
    for (StateIndex s = 0; s < rmc.n; ++s) {
        const auto& ball = rmc.balls[s];
        if (!in_ball(ball, rho[s], tol.feas, tol.sum))
            throw FeasibilityError("environment policy at state " + std::to_string(s) +
                                   " lies outside its uncertainty set");
        for (std::size_t j = 0; j < ball.size(); ++j) p(s, ball.support[j]) = rho[s][j];
    }
    return p;
}

} // namespace rpi
