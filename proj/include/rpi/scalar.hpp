#pragma once

#include "rpi/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

namespace rpi {

/// Exact rational scalar. Expression templates are disabled so that `auto`
/// and generic code see plain values.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;

/**
 * Numeric policy of a scalar type. Floating point solves carry slack for
 * instance data read from files; exact solves compare with zero tolerance.
 */
template <class Real> struct ScalarTraits;

template <> struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static double eps_sum() { return 1e-9; }
    static double eps_feas() { return 1e-12; }
    static double eps_tie() { return 1e-10; }
    static double eps_fix() { return 1e-9; }
};

template <> struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static Rational eps_sum() { return 0; }
    static Rational eps_feas() { return 0; }
    static Rational eps_tie() { return 0; }
    static Rational eps_fix() { return 0; }
};

/// Tolerances shared by validation, inner maximization and the solvers.
template <class Real> struct Tolerances {
    Real sum = ScalarTraits<Real>::eps_sum();   ///< nominal / row mass vs. 1
    Real feas = ScalarTraits<Real>::eps_feas(); ///< ball membership
    Real tie = ScalarTraits<Real>::eps_tie();   ///< action argmin ties
    Real fix = ScalarTraits<Real>::eps_fix();   ///< PI termination / residual
};

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

template <class Real> Real from_double(double x);
template <> inline double from_double<double>(double x) { return x; }

namespace detail {

/// Decimal digits (optionally signed) to BigInt. Leading zeros are dropped:
/// the string constructor would read them as an octal prefix.
inline BigInt decimal_bigint(std::string_view digits) {
    bool negative = false;
    if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
        negative = digits.front() == '-';
        digits.remove_prefix(1);
    }
    while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
    BigInt value{std::string(digits)};
    return negative ? BigInt(-value) : value;
}

} // namespace detail

/// Parses a decimal or fraction literal: "3", "-2/7", "0.125", "1e-3", "2.5E+2".
inline Rational parse_rational(std::string_view text) {
    auto fail = [&]() -> Rational {
        throw InputError("not a rational literal: '" + std::string(text) + "'");
    };
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    if (text.empty()) return fail();

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto num = trim(text.substr(0, slash));
        auto den = trim(text.substr(slash + 1));
        auto is_int = [](std::string_view s) {
            if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
            if (s.empty()) return false;
            for (char c : s)
                if (c < '0' || c > '9') return false;
            return true;
        };
        if (!is_int(num) || !is_int(den)) return fail();
        const BigInt p = detail::decimal_bigint(num);
        const BigInt q = detail::decimal_bigint(den);
        if (q == 0) throw DomainError("zero denominator in '" + std::string(text) + "'");
        return Rational(p, q);
    }

    bool negative = false;
    std::size_t pos = 0;
    if (text[pos] == '-' || text[pos] == '+') negative = text[pos++] == '-';
    std::string digits;
    long long exponent = 0;
    bool seen_digit = false;
    bool seen_point = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c >= '0' && c <= '9') {
            digits.push_back(c);
            seen_digit = true;
            if (seen_point) --exponent;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) return fail();
    if (pos < text.size()) {
        if (text[pos] != 'e' && text[pos] != 'E') return fail();
        ++pos;
        long long e = 0;
        std::string_view rest = text.substr(pos);
        if (!rest.empty() && rest.front() == '+') rest.remove_prefix(1);
        auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
        if (ec != std::errc{} || ptr != rest.data() + rest.size()) return fail();
        if (e > 4000 || e < -4000) return fail();
        exponent += e;
    }
    const BigInt mantissa = detail::decimal_bigint(digits);
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::llabs(exponent)));
    Rational value = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
    return negative ? Rational(-value) : value;
}

/// Shortest decimal that round-trips `x`, read back exactly. Recovers the
/// literal a human wrote in a JSON file ("0.1" -> 1/10).
inline Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw DomainError("non-finite number has no rational value");
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return parse_rational(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

template <> inline Rational from_double<Rational>(double x) { return rational_from_double(x); }

/// "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Rational& x) {
    auto num = boost::multiprecision::numerator(x);
    auto den = boost::multiprecision::denominator(x);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

/// Shortest round-trip decimal.
inline std::string to_string(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

/// Converts a parsed literal to the working scalar type.
template <class Real> Real from_rational(const Rational& r);
template <> inline double from_rational<double>(const Rational& r) { return to_double(r); }
template <> inline Rational from_rational<Rational>(const Rational& r) { return r; }

} // namespace rpi
