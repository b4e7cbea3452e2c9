#pragma once

// Exact rational scalars and the decimal conversions used by every text
// format in the project. All solver arithmetic goes through Rational; no
// floating-point value is ever produced on the decision path.

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lazyrelu {

/// Arbitrary-precision rational, always canonical (positive denominator,
/// lowest terms) after every arithmetic operation.
using Rational = mpq_class;

/// A variable bound; std::nullopt stands for -inf (lower) or +inf (upper).
using Bound = std::optional<Rational>;

inline Rational make_rational(long num, long den = 1) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

/// Parses a decimal literal (`-12`, `0.1`, `3.`, `.5`, `-3.2e-05`) into its
/// exact rational value. Returns nullopt on anything else.
inline std::optional<Rational> parse_decimal(std::string_view text) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    bool negative = false;
    if (i < n && (text[i] == '+' || text[i] == '-')) {
        negative = text[i] == '-';
        ++i;
    }
    std::string digits;
    long long scale = 0;  // value = digits * 10^(-scale)
    bool any_digit = false;
    while (i < n && text[i] >= '0' && text[i] <= '9') {
        digits.push_back(text[i++]);
        any_digit = true;
    }
    if (i < n && text[i] == '.') {
        ++i;
        while (i < n && text[i] >= '0' && text[i] <= '9') {
            digits.push_back(text[i++]);
            ++scale;
            any_digit = true;
        }
    }
    if (!any_digit) return std::nullopt;
    if (i < n && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool exp_negative = false;
        if (i < n && (text[i] == '+' || text[i] == '-')) {
            exp_negative = text[i] == '-';
            ++i;
        }
        if (i >= n) return std::nullopt;
        long long exponent = 0;
        while (i < n && text[i] >= '0' && text[i] <= '9') {
            exponent = exponent * 10 + (text[i++] - '0');
            if (exponent > 100000) return std::nullopt;
        }
        scale += exp_negative ? exponent : -exponent;
    }
    if (i != n) return std::nullopt;

    mpz_class numerator(digits, 10);
    mpz_class power;
    mpz_ui_pow_ui(power.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
    Rational value;
    if (scale >= 0) {
        value = Rational(numerator, power);
    } else {
        value = Rational(numerator * power, 1);
    }
    value.canonicalize();
    if (negative) value = -value;
    return value;
}

inline Rational parse_decimal_or_throw(std::string_view text) {
    auto r = parse_decimal(text);
    if (!r) throw std::invalid_argument("not a decimal literal: '" + std::string(text) + "'");
    return *r;
}

/// True iff the value has a finite decimal expansion (denominator of the
/// form 2^a 5^b).
inline bool has_finite_decimal(const Rational& r) {
    mpz_class den = r.get_den();
    while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) den /= 2;
    while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) den /= 5;
    return den == 1;
}

namespace detail {

// Renders |num| / 10^digits with the decimal point placed and trailing
// zeros stripped.
inline std::string place_point(const mpz_class& scaled, std::size_t digits, bool negative) {
    std::string s = scaled.get_str(10);
    if (digits > 0) {
        if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
        s.insert(s.size() - digits, ".");
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (negative && s != "0") s.insert(0, "-");
    return s;
}

}  // namespace detail

/// Exact decimal rendering; throws std::domain_error when the expansion does
/// not terminate.
inline std::string to_exact_decimal(const Rational& r) {
    if (!has_finite_decimal(r)) {
        throw std::domain_error("value " + r.get_str() + " has no finite decimal expansion");
    }
    mpz_class num = abs(r.get_num());
    const mpz_class& den = r.get_den();
    std::size_t digits = 0;
    mpz_class scale = 1;
    while (!mpz_divisible_p(mpz_class(num * scale).get_mpz_t(), den.get_mpz_t())) {
        scale *= 10;
        ++digits;
    }
    mpz_class scaled = num * scale / den;
    return detail::place_point(scaled, digits, sgn(r) < 0);
}

/// Decimal rendering rounded half away from zero to at most `max_digits`
/// fractional digits. Exact whenever the expansion fits.
inline std::string to_decimal(const Rational& r, std::size_t max_digits = 12) {
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, max_digits);
    mpz_class num = abs(r.get_num()) * scale;
    const mpz_class& den = r.get_den();
    mpz_class q, rem;
    mpz_tdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    if (2 * rem >= den) q += 1;
    return detail::place_point(q, max_digits, sgn(r) < 0);
}

/// `p/q` or `p` for integers.
inline std::string to_exact_string(const Rational& r) { return r.get_str(10); }

inline std::optional<Rational> parse_exact_string(std::string_view text) {
    try {
        Rational r;
        if (r.set_str(std::string(text), 10) != 0) return std::nullopt;
        if (r.get_den() == 0) return std::nullopt;
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

inline std::string bound_to_string(const Bound& b, bool is_lower) {
    if (!b) return is_lower ? "-inf" : "+inf";
    return to_exact_string(*b);
}

}  // namespace lazyrelu
