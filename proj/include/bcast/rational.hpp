#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "bcast/errors.hpp"

namespace bcast {

using BigInt = boost::multiprecision::cpp_int;

// Exact rational number. Every quantity in the library (times, lengths,
// rates, works, flows) is one of these; there is no floating-point path.
// Stored in lowest terms with a positive denominator.
class Rational {
public:
    Rational() : v_(0) {}
    Rational(int n) : v_(n) {}
    Rational(long long n) : v_(static_cast<std::int64_t>(n)) {}
    Rational(const BigInt& n) : v_(n) {}

    Rational(const BigInt& num, const BigInt& den) {
        if (den == 0) {
            throw ParseError("rational with zero denominator");
        }
        BigInt n = num, d = den;
        if (d < 0) {
            n = -n;
            d = -d;
        }
        v_.assign(boost::multiprecision::cpp_rational(n, d));
    }

    static Rational of(long long num, long long den) {
        return Rational(BigInt(num), BigInt(den));
    }

    // Accepts "p/q" or "n" with an optional leading '-'. The denominator
    // must be a positive integer literal. Anything else yields nullopt.
    static std::optional<Rational> parse(std::string_view text) {
        auto digits = [](std::string_view s) {
            if (s.empty()) return false;
            for (char c : s) {
                if (c < '0' || c > '9') return false;
            }
            return true;
        };
        bool negative = false;
        if (!text.empty() && text.front() == '-') {
            negative = true;
            text.remove_prefix(1);
        }
        std::string_view num_part = text;
        std::string_view den_part;
        bool has_den = false;
        if (auto slash = text.find('/'); slash != std::string_view::npos) {
            num_part = text.substr(0, slash);
            den_part = text.substr(slash + 1);
            has_den = true;
        }
        if (!digits(num_part)) return std::nullopt;
        if (has_den && !digits(den_part)) return std::nullopt;
        BigInt num{std::string(num_part)};
        BigInt den = has_den ? BigInt{std::string(den_part)} : BigInt(1);
        if (den == 0) return std::nullopt;
        if (negative) num = -num;
        return Rational(num, den);
    }

    // Throwing variant of parse, for file readers.
    static Rational parse_or_throw(std::string_view text) {
        auto r = parse(text);
        if (!r) {
            throw ParseError("bad rational literal: \"" + std::string(text) + "\"");
        }
        return *r;
    }

    std::string str() const {
        std::string s = num().str();
        if (den() != 1) {
            s += '/';
            s += den().str();
        }
        return s;
    }

    BigInt num() const { return boost::multiprecision::numerator(v_); }
    BigInt den() const { return boost::multiprecision::denominator(v_); }

    bool is_zero() const { return v_ == 0; }
    bool is_integer() const { return den() == 1; }
    int sign() const { return v_ < 0 ? -1 : (v_ > 0 ? 1 : 0); }

    double approx() const { return static_cast<double>(v_); }

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw Error("rational division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { Rational r; r.v_ = -a.v_; return r; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

private:
    boost::multiprecision::cpp_rational v_;
};

inline Rational abs(const Rational& x) { return x.sign() < 0 ? -x : x; }

inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

// gcd extended to rationals: gcd(a/b, c/d) = gcd(a*d, c*b) / (b*d).
// Arguments are taken by absolute value; gcd(x, 0) = |x|.
inline Rational rational_gcd(const Rational& a, const Rational& b) {
    if (a.is_zero()) return abs(b);
    if (b.is_zero()) return abs(a);
    BigInt n = boost::multiprecision::gcd(BigInt(a.num() * b.den()), BigInt(b.num() * a.den()));
    if (n < 0) n = -n;
    return Rational(n, BigInt(a.den() * b.den()));
}

// True when x is an integer multiple of step (step > 0).
inline bool divides(const Rational& step, const Rational& x) {
    return (x / step).is_integer();
}

// x / step, which must be an exact integer.
inline BigInt exact_quotient(const Rational& x, const Rational& step) {
    Rational q = x / step;
    if (!q.is_integer()) {
        throw Error("quotient " + x.str() + " / " + step.str() + " is not integral");
    }
    return q.num();
}

// Decimal rendering with a fixed number of fraction digits, rounded half
// away from zero. Used only for report columns flagged as approximate.
inline std::string decimal_str(const Rational& x, int digits) {
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    BigInt n = x.num() * scale;
    BigInt d = x.den();
    bool neg = n < 0;
    if (neg) n = -n;
    BigInt q = (n + d / 2) / d;
    BigInt whole = q / scale;
    BigInt frac = q % scale;
    std::string f = frac.str();
    f.insert(f.begin(), digits - static_cast<int>(f.size()), '0');
    std::string out = whole.str() + "." + f;
    if (neg && (whole != 0 || frac != 0)) out.insert(out.begin(), '-');
    return out;
}

} // namespace bcast
