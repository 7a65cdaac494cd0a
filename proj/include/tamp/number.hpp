#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <compare>
#include <cstdint>
#include <string>

namespace tamp {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

// Positive link bandwidth; infinity is a distinguished value, never a large number.
class Bandwidth {
public:
    Bandwidth() = default;
    Bandwidth(const Rational& v) : value_(v) {}
    Bandwidth(long long v) : value_(v) {}

    static Bandwidth infinite() {
        Bandwidth b;
        b.inf_ = true;
        return b;
    }

    bool is_infinite() const { return inf_; }
    const Rational& value() const { return value_; }

    friend bool operator==(const Bandwidth& a, const Bandwidth& b) {
        return a.inf_ == b.inf_ && (a.inf_ || a.value_ == b.value_);
    }
    friend bool operator<(const Bandwidth& a, const Bandwidth& b) {
        if (a.inf_) return false;
        if (b.inf_) return true;
        return a.value_ < b.value_;
    }

    std::string str() const;

private:
    Rational value_{1};
    bool inf_ = false;
};

Bandwidth min(const Bandwidth& a, const Bandwidth& b);
Bandwidth scale(const Bandwidth& b, const Rational& c);

// count / w, with x / inf = 0. Caller must not pass a zero finite bandwidth.
Rational ratio(const Rational& count, const Bandwidth& w);

// Non-negative real stored through its exact square, so N / sqrt(sum w^2)
// stays exact and comparisons never touch floating point.
class Magnitude {
public:
    Magnitude() = default;

    static Magnitude of(const Rational& x);
    static Magnitude sqrt_of(const Rational& square);
    static Magnitude infinity();

    bool is_infinite() const { return inf_; }
    const Rational& square() const { return square_; }
    bool is_rational() const;
    Rational exact() const;  // requires is_rational()
    double to_double() const;

    Magnitude operator*(const Rational& c) const;  // c >= 0

    friend std::strong_ordering operator<=>(const Magnitude& a, const Magnitude& b);
    friend bool operator==(const Magnitude& a, const Magnitude& b) {
        return (a <=> b) == std::strong_ordering::equal;
    }

private:
    Rational square_{0};
    bool inf_ = false;
};

Magnitude max(const Magnitude& a, const Magnitude& b);
Magnitude min(const Magnitude& a, const Magnitude& b);

Integer floor(const Rational& x);
Integer ceil(const Rational& x);
Integer isqrt(const Integer& x);

// Smallest 2^k (k >= 0) with 2^k >= x.
Integer pow2_ceil(const Rational& x);
// Smallest 2^k (k >= 0) with 4^k >= square, i.e. 2^k >= sqrt(square).
Integer pow2_ceil_sqrt(const Rational& square);
bool is_pow2(const Integer& x);

// 12 significant digits, round-half-even; integers print without a point.
std::string render(const Rational& x, int digits = 12);
std::string render(const Magnitude& x, int digits = 12);

// "3", "1.25", "-2", "7/3", "inf" (inf only via parse_bandwidth).
Rational parse_rational(const std::string& text);
Bandwidth parse_bandwidth(const std::string& text);

}  // namespace tamp
