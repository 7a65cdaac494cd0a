#include "tamp/number.hpp"

#include <cmath>
#include <stdexcept>

namespace tamp {

std::string Bandwidth::str() const { return inf_ ? "inf" : render(value_); }

Bandwidth min(const Bandwidth& a, const Bandwidth& b) { return b < a ? b : a; }

Bandwidth scale(const Bandwidth& b, const Rational& c) {
    if (b.is_infinite()) return b;
    return Bandwidth(b.value() * c);
}

Rational ratio(const Rational& count, const Bandwidth& w) {
    if (w.is_infinite()) return Rational(0);
    if (w.value() <= 0) throw std::domain_error("ratio over non-positive bandwidth");
    return count / w.value();
}

Magnitude Magnitude::of(const Rational& x) {
    if (x < 0) throw std::domain_error("negative magnitude");
    Magnitude m;
    m.square_ = x * x;
    return m;
}

Magnitude Magnitude::sqrt_of(const Rational& square) {
    if (square < 0) throw std::domain_error("negative square");
    Magnitude m;
    m.square_ = square;
    return m;
}

Magnitude Magnitude::infinity() {
    Magnitude m;
    m.inf_ = true;
    return m;
}

bool Magnitude::is_rational() const {
    if (inf_) return false;
    Integer n = numerator(square_), d = denominator(square_);
    Integer rn = isqrt(n), rd = isqrt(d);
    return rn * rn == n && rd * rd == d;
}

Rational Magnitude::exact() const {
    if (!is_rational()) throw std::domain_error("magnitude is irrational");
    return Rational(isqrt(numerator(square_)), isqrt(denominator(square_)));
}

double Magnitude::to_double() const {
    if (inf_) return INFINITY;
    return std::sqrt(square_.convert_to<double>());
}

Magnitude Magnitude::operator*(const Rational& c) const {
    if (c < 0) throw std::domain_error("negative scale");
    if (inf_) return c == 0 ? Magnitude{} : *this;
    Magnitude m;
    m.square_ = square_ * c * c;
    return m;
}

std::strong_ordering operator<=>(const Magnitude& a, const Magnitude& b) {
    if (a.inf_ || b.inf_) return a.inf_ <=> b.inf_;
    if (a.square_ < b.square_) return std::strong_ordering::less;
    if (b.square_ < a.square_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Magnitude max(const Magnitude& a, const Magnitude& b) { return a < b ? b : a; }
Magnitude min(const Magnitude& a, const Magnitude& b) { return b < a ? b : a; }

Integer floor(const Rational& x) {
    Integer q = numerator(x) / denominator(x);  // truncates toward zero
    if (x < 0 && Rational(q) != x) q -= 1;
    return q;
}

Integer ceil(const Rational& x) { return -floor(-x); }

Integer isqrt(const Integer& x) {
    if (x < 0) throw std::domain_error("isqrt of negative");
    return boost::multiprecision::sqrt(x);
}

Integer pow2_ceil(const Rational& x) {
    Integer p = 1;
    while (Rational(p) < x) p <<= 1;
    return p;
}

Integer pow2_ceil_sqrt(const Rational& square) {
    Integer p = 1;
    while (Rational(p * p) < square) p <<= 1;
    return p;
}

bool is_pow2(const Integer& x) { return x > 0 && (x & (x - 1)) == 0; }

namespace {

Rational pow10(int e) {
    Integer p = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(std::abs(e)));
    return e >= 0 ? Rational(p) : Rational(Integer(1), p);
}

std::string layout(const Integer& mant, int digits, int e) {
    std::string s = mant.str();
    if (static_cast<int>(s.size()) > digits) {  // rounding overflowed to 10^digits
        s.pop_back();
        ++e;
    }
    std::string out;
    if (e < -7 || e >= 21) {
        out = s.substr(0, 1) + "." + s.substr(1);
        while (out.back() == '0') out.pop_back();
        if (out.back() == '.') out.pop_back();
        out += (e < 0 ? "e-" : "e+") + std::to_string(std::abs(e));
        return out;
    }
    int p = e + 1;
    if (p <= 0) {
        out = "0." + std::string(-p, '0') + s;
    } else if (p >= static_cast<int>(s.size())) {
        out = s + std::string(p - s.size(), '0');
    } else {
        out = s.substr(0, p) + "." + s.substr(p);
    }
    if (out.find('.') != std::string::npos) {
        while (out.back() == '0') out.pop_back();
        if (out.back() == '.') out.pop_back();
    }
    return out;
}

// Decimal exponent e with 10^(2e) <= sq < 10^(2e+2), sq > 0.
int exponent_of_square(const Rational& sq) {
    int e = static_cast<int>(std::floor(std::log10(sq.convert_to<double>()) / 2));
    while (sq < pow10(2 * e)) --e;
    while (sq >= pow10(2 * e + 2)) ++e;
    return e;
}

}  // namespace

std::string render(const Rational& x, int digits) {
    if (x == 0) return "0";
    if (x < 0) return "-" + render(-x, digits);
    int e = exponent_of_square(x * x);
    Rational y = x * pow10(digits - 1 - e);
    Integer q = floor(y);
    Rational frac = y - Rational(q);
    if (frac > Rational(1, 2) || (frac == Rational(1, 2) && (q & 1) != 0)) q += 1;
    return layout(q, digits, e);
}

std::string render(const Magnitude& x, int digits) {
    if (x.is_infinite()) return "inf";
    if (x.square() == 0) return "0";
    int e = exponent_of_square(x.square());
    Rational y2 = x.square() * pow10(2 * (digits - 1 - e));
    Integer q = isqrt(floor(y2));
    // compare y with q + 1/2 via (2q+1)^2 against 4*y^2
    Rational lhs = Rational((2 * q + 1) * (2 * q + 1));
    Rational rhs = 4 * y2;
    if (lhs < rhs || (lhs == rhs && (q & 1) != 0)) q += 1;
    return layout(q, digits, e);
}

Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty number");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rational n = parse_rational(text.substr(0, slash));
        Rational d = parse_rational(text.substr(slash + 1));
        if (d == 0) throw std::invalid_argument("zero denominator: " + text);
        return n / d;
    }
    std::size_t i = 0;
    bool neg = false;
    if (text[0] == '-' || text[0] == '+') {
        neg = text[0] == '-';
        i = 1;
    }
    Integer mant = 0;
    int scale = 0;
    bool seen_point = false, seen_digit = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            mant = mant * 10 + (c - '0');
            if (seen_point) ++scale;
            seen_digit = true;
        } else if ((c == 'e' || c == 'E') && seen_digit) {
            int exp = std::stoi(text.substr(i + 1));
            Rational r = Rational(mant) * pow10(exp - scale);
            return neg ? -r : r;
        } else {
            throw std::invalid_argument("not a decimal: " + text);
        }
    }
    if (!seen_digit) throw std::invalid_argument("not a decimal: " + text);
    Rational r = Rational(mant) * pow10(-scale);
    return neg ? -r : r;
}

Bandwidth parse_bandwidth(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF") return Bandwidth::infinite();
    Rational v = parse_rational(text);
    if (v <= 0) throw std::invalid_argument("bandwidth must be positive: " + text);
    return Bandwidth(v);
}

}  // namespace tamp
