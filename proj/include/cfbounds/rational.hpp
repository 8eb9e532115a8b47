#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cfbounds {

// Exact rational arithmetic on 64-bit numerator/denominator.
// Intermediate products run through 128-bit integers; results that cannot
// be reduced back into 64 bits raise std::overflow_error instead of silently
// wrapping.
class Rational {
public:
    Rational() : num_(0), den_(1) {}

    Rational(std::int64_t num, std::int64_t den = 1) {
        if (den == 0) {
            throw std::invalid_argument("Rational denominator is zero");
        }
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        num_ = g == 0 ? 0 : num / (g == 0 ? 1 : g);
        den_ = g == 0 ? 1 : den / g;
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    // Parses a plain decimal literal ("0.25", "-1", "1e-3") exactly.
    static Rational from_decimal(const std::string& text) {
        std::size_t i = 0;
        const auto fail = [&text]() -> Rational {
            throw std::invalid_argument("Cannot parse decimal '" + text + "'");
        };
        if (text.empty()) return fail();
        bool neg = false;
        if (text[i] == '+' || text[i] == '-') {
            neg = text[i] == '-';
            ++i;
        }
        __int128 num = 0;
        int frac_digits = 0;
        bool any = false;
        for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
            num = num * 10 + (text[i] - '0');
            if (num > kMax128) return fail();
            any = true;
        }
        if (i < text.size() && text[i] == '.') {
            ++i;
            for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
                num = num * 10 + (text[i] - '0');
                if (num > kMax128) return fail();
                ++frac_digits;
                any = true;
            }
        }
        if (!any) return fail();
        int exp = 0;
        if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
            ++i;
            bool eneg = false;
            if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
                eneg = text[i] == '-';
                ++i;
            }
            if (i >= text.size()) return fail();
            for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
                exp = exp * 10 + (text[i] - '0');
                if (exp > 18) return fail();
            }
            if (eneg) exp = -exp;
        }
        if (i != text.size()) return fail();
        __int128 den = 1;
        int pow10 = frac_digits - exp;
        for (; pow10 > 0; --pow10) {
            den *= 10;
            if (den > kMax128) return fail();
        }
        for (; pow10 < 0; ++pow10) {
            num *= 10;
            if (num > kMax128) return fail();
        }
        if (neg) num = -num;
        return make_reduced(num, den);
    }

    // Accepts decimal literals or fractions ("3/4").
    static Rational parse(const std::string& text) {
        const std::size_t slash = text.find('/');
        if (slash == std::string::npos) return from_decimal(text);
        const Rational num = from_decimal(text.substr(0, slash));
        const Rational den = from_decimal(text.substr(slash + 1));
        if (den == Rational(0)) throw std::invalid_argument("Cannot parse fraction '" + text + "'");
        return num / den;
    }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    std::string to_string() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make_reduced(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                            static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make_reduced(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                            static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make_reduced(static_cast<__int128>(a.num_) * b.num_,
                            static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("Rational division by zero");
        return make_reduced(static_cast<__int128>(a.num_) * b.den_,
                            static_cast<__int128>(a.den_) * b.num_);
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    Rational& operator+=(const Rational& b) { return *this = *this + b; }
    Rational& operator-=(const Rational& b) { return *this = *this - b; }
    Rational& operator*=(const Rational& b) { return *this = *this * b; }
    Rational& operator/=(const Rational& b) { return *this = *this / b; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    static constexpr __int128 kMax128 = static_cast<__int128>(1) << 100;

    static Rational make_reduced(__int128 num, __int128 den) {
        if (den == 0) throw std::invalid_argument("Rational denominator is zero");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        __int128 a = num < 0 ? -num : num;
        __int128 b = den;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a != 0) {
            num /= a;
            den /= a;
        }
        constexpr __int128 lo = INT64_MIN;
        constexpr __int128 hi = INT64_MAX;
        if (num < lo || num > hi || den > hi) {
            throw std::overflow_error("Rational overflow");
        }
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }

    std::int64_t num_;
    std::int64_t den_;
};

}  // namespace cfbounds
