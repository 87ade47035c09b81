#pragma once

#include "rpi/errors.hpp"
#include "rpi/model.hpp"
#include "rpi/scalar.hpp"

#include <boost/multiprecision/integer.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace rpi {

/// Coefficient vectors are enumerated only up to this many.
inline constexpr std::uint64_t kMaxEnumeration = 100000000;

/**
 * A(X, C): the magnitudes |sum_x f(x) x| over all integer coefficient functions
 * with |f(x)| <= C. `x` is the deduplicated ascending set, `sums` ascending.
 */
struct SignedSumSet {
    std::vector<Rational> x;
    long long coeff = 1;
    std::vector<Rational> sums;
};

/// (2C+1)^k, saturating at the largest uint64.
inline std::uint64_t enumeration_size(std::size_t k, long long coeff) {
    if (coeff < 1) throw ParameterError("coefficient bound must be >= 1");
    const std::uint64_t base = 2 * static_cast<std::uint64_t>(coeff) + 1;
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (total > std::numeric_limits<std::uint64_t>::max() / base) return std::numeric_limits<std::uint64_t>::max();
        total *= base;
    }
    return total;
}

namespace detail {

using Int128 = __int128;

inline std::size_t bit_length(const BigInt& x) { return x == 0 ? 0 : boost::multiprecision::msb(x) + 1; }

inline std::size_t bit_length(Int128 x) {
    const auto u = static_cast<unsigned __int128>(x);
    const auto hi = static_cast<std::uint64_t>(u >> 64);
    const auto lo = static_cast<std::uint64_t>(u);
    if (hi != 0) return 128 - static_cast<std::size_t>(__builtin_clzll(hi));
    if (lo != 0) return 64 - static_cast<std::size_t>(__builtin_clzll(lo));
    return 0;
}

/// floor(log2(num/den)) for positive integers, from bit lengths and one shifted comparison.
template <class Int> long floor_log2_ratio(const Int& num, const Int& den) {
    const long e = static_cast<long>(bit_length(num)) - static_cast<long>(bit_length(den));
    const bool at_least = e >= 0 ? num >= (den << static_cast<unsigned>(e)) : (num << static_cast<unsigned>(-e)) >= den;
    return at_least ? e : e - 1;
}

inline Int128 to_int128(const BigInt& x) {
    const BigInt mask = (BigInt(1) << 64) - 1;
    const auto lo = static_cast<std::uint64_t>(x & mask);
    const auto hi = static_cast<std::uint64_t>(x >> 64);
    return static_cast<Int128>((static_cast<unsigned __int128>(hi) << 64) | lo);
}

inline BigInt to_bigint(Int128 x) {
    const auto u = static_cast<unsigned __int128>(x);
    return (BigInt(static_cast<std::uint64_t>(u >> 64)) << 64) | BigInt(static_cast<std::uint64_t>(u));
}

inline BigInt to_bigint(const BigInt& x) { return x; }

/// X over a common denominator: x_i = numerators[i] / denominator.
struct CommonDenominator {
    std::vector<BigInt> numerators;
    BigInt denominator{1};
};

inline CommonDenominator common_denominator(const std::vector<Rational>& xs) {
    CommonDenominator out;
    for (const auto& x : xs) {
        const BigInt d = boost::multiprecision::denominator(x);
        out.denominator = out.denominator / boost::multiprecision::gcd(out.denominator, d) * d;
    }
    for (const auto& x : xs)
        out.numerators.push_back(boost::multiprecision::numerator(x) *
                                 (out.denominator / boost::multiprecision::denominator(x)));
    return out;
}

/**
 * Nonnegative partial sums after the first `layers` elements. A(X,C) is
 * symmetric under negation, so folding each layer to magnitudes loses nothing:
 * |(+-s) + c x| = |s +- c x| and c ranges over a symmetric interval.
 */
template <class Int>
std::vector<Int> magnitude_layers(const std::vector<Int>& nums, long long coeff, std::size_t layers) {
    std::vector<Int> current{Int(0)};
    for (std::size_t i = 0; i < layers; ++i) {
        std::vector<Int> next;
        next.reserve(current.size() * static_cast<std::size_t>(coeff + 1));
        for (const Int& s : current)
            for (long long c = -coeff; c <= coeff; ++c) {
                Int t = s + Int(c) * nums[i];
                next.push_back(t < 0 ? Int(-t) : t);
            }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        current = std::move(next);
    }
    return current;
}

/// Distinct floor(log2) exponents of the nonzero sums; the last layer is streamed, never stored.
template <class Int>
std::size_t degree_of_sums(const std::vector<Int>& nums, const Int& den, long long coeff) {
    if (nums.empty()) return 0;
    const auto prefix = magnitude_layers(nums, coeff, nums.size() - 1);
    const Int& last = nums.back();
    std::set<long> exponents;
    for (const Int& s : prefix)
        for (long long c = -coeff; c <= coeff; ++c) {
            Int t = s + Int(c) * last;
            if (t < 0) t = -t;
            if (t != 0) exponents.insert(floor_log2_ratio(t, den));
        }
    return exponents.size();
}

/// Validates X and C, returning X sorted ascending without duplicates.
inline std::vector<Rational> canonical_set(std::span<const Rational> xs, long long coeff) {
    if (xs.empty()) throw ParameterError("signed sums need a nonempty set");
    if (coeff < 1) throw ParameterError("coefficient bound must be >= 1, got " + std::to_string(coeff));
    std::vector<Rational> out(xs.begin(), xs.end());
    for (const auto& x : out)
        if (x < 0) throw DomainError("signed sums need nonnegative elements, got " + to_string(x));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    const auto size = enumeration_size(out.size(), coeff);
    if (size > kMaxEnumeration)
        throw SizeError("enumeration of " + std::to_string(size) + " coefficient vectors exceeds " +
                        std::to_string(kMaxEnumeration));
    return out;
}

/// True when every partial sum fits comfortably in 128 bits: C * sum |N_i| < 2^125.
inline bool fits_int128(const CommonDenominator& cd, long long coeff) {
    BigInt total(0);
    for (const auto& n : cd.numerators) total += n;
    return bit_length(BigInt(total * coeff)) < 125 && bit_length(cd.denominator) < 125;
}

} // namespace detail

/// Exact floor(log2 y) for y > 0.
inline long floor_log2(const Rational& y) {
    if (!(y > 0)) throw DomainError("floor_log2 needs a positive argument, got " + to_string(y));
    return detail::floor_log2_ratio<BigInt>(boost::multiprecision::numerator(y), boost::multiprecision::denominator(y));
}

/// Number of distinct floor(log2 y) over a set of positive rationals.
inline std::size_t dyadic_degree(std::span<const Rational> ys) {
    std::set<long> exponents;
    for (const auto& y : ys) exponents.insert(floor_log2(y));
    return exponents.size();
}

/// 2(2k-1)(floor(log2(2kC+1)) + 2) + 1.
inline long long theorem4_bound(long long k, long long coeff) {
    if (k < 1 || coeff < 1) throw ParameterError("theorem4_bound needs k, C >= 1");
    const auto arg = static_cast<unsigned long long>(2 * k * coeff + 1);
    const long long log = 63 - __builtin_clzll(arg);
    return 2 * (2 * k - 1) * (log + 2) + 1;
}

/// Exact enumeration of A(X, C).
inline SignedSumSet signed_sums(std::span<const Rational> xs, long long coeff) {
    SignedSumSet out;
    out.x = detail::canonical_set(xs, coeff);
    out.coeff = coeff;
    const auto cd = detail::common_denominator(out.x);
    const auto sums = detail::magnitude_layers<BigInt>(cd.numerators, coeff, cd.numerators.size());
    out.sums.reserve(sums.size());
    for (const auto& s : sums) out.sums.emplace_back(s, cd.denominator);
    return out;
}

struct DyadicCheck {
    std::size_t degree = 0;
    long long bound = 0;
    bool holds = false;
};

/**
 * Degree of A(X,C) \ {0} against 2(2|X|-1)(floor(log2(2|X|C+1)) + 2) + 1.
 * |X| is counted after deduplication. The degree counts MSB classes of
 * nonzero magnitudes only, so it never exceeds the number of dyadic
 * intervals the bound covers.
 */
inline DyadicCheck check_dyadic_bound(std::span<const Rational> xs, long long coeff) {
    const auto set = detail::canonical_set(xs, coeff);
    const auto cd = detail::common_denominator(set);
    DyadicCheck out;
    if (detail::fits_int128(cd, coeff)) {
        std::vector<detail::Int128> nums;
        nums.reserve(cd.numerators.size());
        for (const auto& n : cd.numerators) nums.push_back(detail::to_int128(n));
        out.degree = detail::degree_of_sums<detail::Int128>(nums, detail::to_int128(cd.denominator), coeff);
    } else {
        out.degree = detail::degree_of_sums<BigInt>(cd.numerators, cd.denominator, coeff);
    }
    out.bound = theorem4_bound(static_cast<long long>(set.size()), coeff);
    out.holds = static_cast<long long>(out.degree) <= out.bound;
    return out;
}

/// {nominal entries} together with {radius, 1}, deduplicated: the discrepancy set of a state.
inline std::vector<Rational> discrepancy_set(const LInfBall<Rational>& ball) {
    std::vector<Rational> out(ball.nominal.begin(), ball.nominal.end());
    out.push_back(ball.radius);
    out.push_back(Rational(1));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace rpi
