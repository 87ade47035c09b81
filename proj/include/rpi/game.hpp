#pragma once

#include "rpi/errors.hpp"
#include "rpi/model.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace rpi {

/**
 * Turn-based stochastic game. Player 1 (s1) minimizes cost, player 2 (s2)
 * maximizes it, and random states (sr) move by the dense distribution `p`.
 */
template <class Real> struct StochasticGame {
    std::size_t n = 0;
    std::vector<StateIndex> s1;
    std::vector<StateIndex> s2;
    std::vector<StateIndex> sr;
    std::vector<Real> cost;
    std::map<StateIndex, std::vector<StateIndex>> succ; ///< controlled states only
    std::map<StateIndex, std::vector<Real>> p;          ///< random states only, length n

    bool operator==(const StochasticGame&) const = default;
};

enum class GameRole { none, minimizer, maximizer, random };

namespace detail {

template <class Real> std::vector<GameRole> game_roles(const StochasticGame<Real>& game, ValidationReport& report) {
    std::vector<GameRole> roles(game.n, GameRole::none);
    auto assign = [&](const std::vector<StateIndex>& states, GameRole role, const char* name) {
        for (StateIndex s : states) {
            if (s >= game.n) {
                report.violations.push_back(std::string(name) + ": state " + std::to_string(s) + " out of range");
                continue;
            }
            if (roles[s] != GameRole::none)
                report.violations.push_back("state " + std::to_string(s) + " listed in more than one partition class");
            else
                roles[s] = role;
        }
    };
    assign(game.s1, GameRole::minimizer, "s1");
    assign(game.s2, GameRole::maximizer, "s2");
    assign(game.sr, GameRole::random, "sr");
    for (StateIndex s = 0; s < game.n; ++s)
        if (roles[s] == GameRole::none)
            report.violations.push_back("state " + std::to_string(s) + " belongs to no partition class");
    return roles;
}

} // namespace detail

/// Reports partition violations, bad successor sets and non-stochastic rows.
template <class Real>
ValidationReport validate_game(const StochasticGame<Real>& game, const Real& eps_sum = ScalarTraits<Real>::eps_sum()) {
    ValidationReport report;
    if (game.n == 0) report.violations.push_back("game has no states");
    detail::validate_costs(game.cost, game.n, report);
    const auto roles = detail::game_roles(game, report);

    for (StateIndex s = 0; s < game.n; ++s) {
        const std::string where = "state " + std::to_string(s);
        const bool controlled = roles[s] == GameRole::minimizer || roles[s] == GameRole::maximizer;
        const auto succ = game.succ.find(s);
        const auto row = game.p.find(s);
        if (controlled) {
            if (succ == game.succ.end() || succ->second.empty()) {
                report.violations.push_back(where + ": empty successor set");
            } else {
                auto sorted = succ->second;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                    report.violations.push_back(where + ": duplicate successor");
                if (sorted.back() >= game.n) report.violations.push_back(where + ": successor out of range");
            }
            if (row != game.p.end()) report.violations.push_back(where + ": controlled state has a probability row");
        } else if (roles[s] == GameRole::random) {
            if (row == game.p.end()) {
                report.violations.push_back(where + ": random state has no probability row");
                continue;
            }
            if (row->second.size() != game.n) {
                report.violations.push_back(where + ": probability row has " + std::to_string(row->second.size()) +
                                            " entries, expected " + std::to_string(game.n));
                continue;
            }
            Real mass(0);
            for (const Real& q : row->second) {
                if (!detail::is_finite(q) || q < Real(0))
                    report.violations.push_back(where + ": negative probability " + to_string(q));
                mass += q;
            }
            if (detail::abs_value(Real(mass - Real(1))) > eps_sum)
                report.violations.push_back(where + ": probability row sums to " + to_string(mass));
            if (succ != game.succ.end()) report.violations.push_back(where + ": random state has a successor set");
        }
    }
    for (const auto& [s, _] : game.succ)
        if (s >= game.n) report.violations.push_back("successor set for unknown state " + std::to_string(s));
    for (const auto& [s, _] : game.p)
        if (s >= game.n) report.violations.push_back("probability row for unknown state " + std::to_string(s));
    return report;
}

/**
 * Reduces a game to an L-infinity RMDP. Player-1 states get one zero-radius
 * action per successor (ascending order); random states get one zero-radius
 * action over the nonzero entries of their row; player-2 states get one action
 * of radius 1 with a uniform nominal, so the environment may pick any
 * successor.
 */
template <class Real> RobustMdpInstance<Real> game_to_rmdp(const StochasticGame<Real>& game) {
    const auto report = validate_game(game);
    if (!report.ok()) {
        std::string msg = "invalid game:";
        for (const auto& v : report.violations) msg += " " + v + ";";
        throw StructuralError(msg);
    }
    ValidationReport scratch;
    const auto roles = detail::game_roles(game, scratch);

    RobustMdpInstance<Real> rmdp;
    rmdp.n = game.n;
    rmdp.cost = game.cost;
    rmdp.actions.resize(game.n);
    for (StateIndex s = 0; s < game.n; ++s) {
        if (roles[s] == GameRole::random) {
            LInfBall<Real> ball;
            const auto& row = game.p.at(s);
            for (StateIndex t = 0; t < game.n; ++t)
                if (row[t] != Real(0)) {
                    ball.support.push_back(t);
                    ball.nominal.push_back(row[t]);
                }
            rmdp.actions[s].push_back(std::move(ball));
            continue;
        }
        auto succ = game.succ.at(s);
        std::sort(succ.begin(), succ.end());
        if (roles[s] == GameRole::minimizer) {
            for (StateIndex t : succ) rmdp.actions[s].push_back({{t}, {Real(1)}, Real(0)});
        } else {
            const Real share = Real(1) / Real(static_cast<long long>(succ.size()));
            LInfBall<Real> ball{succ, std::vector<Real>(succ.size(), share), Real(1)};
            if constexpr (!ScalarTraits<Real>::exact) {
                // make the nominal sum to 1 exactly in floating point
                Real rest(1);
                for (std::size_t j = 0; j + 1 < succ.size(); ++j) rest -= share;
                ball.nominal.back() = rest;
            }
            rmdp.actions[s].push_back(std::move(ball));
        }
    }
    return rmdp;
}

} // namespace rpi
