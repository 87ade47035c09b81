#pragma once

#include "rpi/errors.hpp"
#include "rpi/model.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace rpi {

template <class Real> struct InnerMaxResult {
    std::vector<Real> distribution; ///< indexed like the ball's support
    Real objective{0};
};

namespace detail {

/// Neumaier-compensated sum.
template <class Real> Real compensated_sum(std::span<const Real> xs) {
    Real sum(0);
    Real carry(0);
    for (const Real& x : xs) {
        Real t = sum + x;
        if (abs_value(sum) >= abs_value(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    return sum + carry;
}

template <class Real> Real dot(std::span<const Real> a, std::span<const Real> b, bool compensated) {
    std::vector<Real> terms(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) terms[i] = a[i] * b[i];
    if (compensated) return compensated_sum<Real>(terms);
    Real acc(0);
    for (const Real& t : terms) acc += t;
    return acc;
}

inline constexpr std::size_t kCompensatedSupport = 64;

} // namespace detail

/**
 * Homotopy (two-pointer) maximization of p.values over an L-infinity ball.
 *
 * Successors are sorted by value, descending, ties by ascending position.
 * Mass moves from the low end to the high end until the pointers meet; a
 * receiver is capped at min(1, nominal + radius) and a donor floored at
 * max(0, nominal - radius), both measured against the current (already
 * shifted) probability.
 */
template <class Real>
InnerMaxResult<Real> homotopy_maximize(const LInfBall<Real>& ball, std::span<const Real> values) {
    const std::size_t k = ball.size();
    if (values.size() != k)
        throw StructuralError("value vector has " + std::to_string(values.size()) + " entries, ball support has " +
                              std::to_string(k));
    InnerMaxResult<Real> result;
    result.distribution = ball.nominal;
    auto& p = result.distribution;
    const bool compensated = k > detail::kCompensatedSupport;

    if (ball.radius > Real(0) && k > 1) {
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

        std::size_t hi = 0;
        std::size_t lo = k - 1;
        while (hi < lo) {
            const std::size_t receiver = order[hi];
            const std::size_t donor = order[lo];
            const Real cap = ball.upper(receiver);
            const Real floor = ball.lower(donor);
            const Real room = cap - p[receiver];
            const Real available = p[donor] - floor;
            if (room < available) {
                p[receiver] = cap;
                p[donor] -= room;
                ++hi;
            } else {
                if (room == available)
                    p[receiver] = cap;
                else
                    p[receiver] += available;
                p[donor] = floor;
                --lo;
            }
        }

        if (compensated) {
            // absorb accumulated rounding into the coordinate where the pointers met
            Real residual = Real(1) - detail::compensated_sum<Real>(p);
            p[order[hi]] += residual;
        }
    }

    result.objective = detail::dot<Real>(p, values, compensated);
    return result;
}

/// Largest support the enumeration oracle accepts (3^12 patterns).
inline constexpr std::size_t kOracleMaxSupport = 12;

/**
 * Exhaustive bound-pattern oracle for max p.values over ball and simplex.
 *
 * Every coordinate is pinned to its upper bound, its lower bound, or left
 * free; at most one coordinate is free and it absorbs the residual mass.
 * Every vertex of the feasible polytope has this form, so the best feasible
 * pattern is the LP optimum. No sorting and no mass transfers: this is an
 * independent check of `homotopy_maximize`.
 */
template <class Real>
Real oracle_maximize(const LInfBall<Real>& ball, std::span<const Real> values,
                     const Real& eps = ScalarTraits<Real>::eps_feas()) {
    const std::size_t k = ball.size();
    if (k > kOracleMaxSupport)
        throw SizeError("oracle enumeration limited to support size " + std::to_string(kOracleMaxSupport) + ", got " +
                        std::to_string(k));
    if (values.size() != k) throw StructuralError("value vector does not match ball support");

    std::size_t patterns = 1;
    for (std::size_t i = 0; i < k; ++i) patterns *= 3;

    bool found = false;
    Real best(0);
    std::vector<int> digit(k);
    for (std::size_t code = 0; code < patterns; ++code) {
        std::size_t rest = code;
        int free_count = 0;
        std::size_t free_index = 0;
        for (std::size_t i = 0; i < k; ++i) {
            digit[i] = static_cast<int>(rest % 3);
            rest /= 3;
            if (digit[i] == 2) {
                ++free_count;
                free_index = i;
            }
        }
        if (free_count > 1) continue;

        Real mass(0);
        Real objective(0);
        for (std::size_t i = 0; i < k; ++i) {
            if (digit[i] == 2) continue;
            const Real x = digit[i] == 0 ? ball.upper(i) : ball.lower(i);
            mass += x;
            objective += x * values[i];
        }
        if (free_count == 1) {
            const Real x = Real(1) - mass;
            if (x < ball.lower(free_index) - eps || x > ball.upper(free_index) + eps) continue;
            objective += x * values[free_index];
        } else if (detail::abs_value(Real(mass - Real(1))) > eps) {
            continue;
        }
        if (!found || objective > best) {
            best = objective;
            found = true;
        }
    }
    if (!found) throw FeasibilityError("uncertainty set has no feasible distribution");
    return best;
}

/// Receivers (+radius), full donors (-radius), zeroed donors and the incomplete coordinate.
struct RdziDecomposition {
    std::vector<StateIndex> receivers;
    std::vector<StateIndex> full_donors;
    std::vector<StateIndex> zeroed_donors;
    std::vector<StateIndex> incomplete;
};

/**
 * Classifies each coordinate of a distribution produced by the homotopy
 * method. A zero radius yields all-empty sets. Throws ClassificationError when
 * a coordinate fits no class, StructuralError when more than one coordinate is
 * incomplete (the distribution is not homotopic).
 */
template <class Real>
RdziDecomposition decompose_rdzi(const LInfBall<Real>& ball, std::span<const Real> dist,
                                 const Real& eps = ScalarTraits<Real>::eps_feas()) {
    if (dist.size() != ball.size()) throw StructuralError("distribution does not match ball support");
    RdziDecomposition out;
    if (ball.radius == Real(0)) return out;

    using detail::abs_value;
    for (std::size_t j = 0; j < ball.size(); ++j) {
        const Real& p = dist[j];
        const Real high = ball.nominal[j] + ball.radius;
        const Real low = ball.nominal[j] - ball.radius;
        const StateIndex state = ball.support[j];
        if (abs_value(Real(p - high)) <= eps) {
            out.receivers.push_back(state);
        } else if (abs_value(p) <= eps && ball.nominal[j] <= ball.radius + eps) {
            out.zeroed_donors.push_back(state);
        } else if (abs_value(Real(p - low)) <= eps) {
            out.full_donors.push_back(state);
        } else if (p > low && p < high && p >= Real(0)) {
            out.incomplete.push_back(state);
        } else {
            throw ClassificationError("coordinate for state " + std::to_string(state) + " with probability " +
                                      to_string(p) + " matches no R/D/Z/I class");
        }
    }
    if (out.incomplete.size() > 1)
        throw StructuralError("distribution has " + std::to_string(out.incomplete.size()) +
                              " incomplete coordinates; at most one is homotopic");
    return out;
}

} // namespace rpi
