#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace taskspec {

// Exact fraction over int64. Transition and termination probabilities are
// ratios of small observation counts, so keeping them exact removes float
// drift from tests and file round trips. Multiplication cross-reduces before
// widening to 128 bits; overflow of the reduced result throws.
class Rational {
public:
    constexpr Rational() = default;

    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        if (den_ == 0) {
            throw std::invalid_argument("Rational: zero denominator");
        }
        normalize();
    }

    static constexpr Rational zero() { return Rational{}; }

    static Rational one() { return Rational{1, 1}; }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    // "3/4"; integers still carry the denominator ("1/1") so files stay
    // trivially parseable.
    std::string str() const {
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    Rational& operator*=(const Rational& o) {
        std::int64_t a = num_, b = den_, c = o.num_, d = o.den_;
        const std::int64_t g1 = gcd_abs(a, d);
        const std::int64_t g2 = gcd_abs(c, b);
        a /= g1;
        d /= g1;
        c /= g2;
        b /= g2;
        num_ = checked_mul(a, c);
        den_ = checked_mul(b, d);
        return *this;
    }

    Rational& operator+=(const Rational& o) {
        const std::int64_t g = gcd_abs(den_, o.den_);
        const std::int64_t lhs_scale = o.den_ / g;
        const std::int64_t rhs_scale = den_ / g;
        const std::int64_t n =
            checked_add(checked_mul(num_, lhs_scale), checked_mul(o.num_, rhs_scale));
        const std::int64_t d = checked_mul(den_, lhs_scale);
        num_ = n;
        den_ = d;
        normalize();
        return *this;
    }

    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator+(Rational a, const Rational& b) { return a += b; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ <
               static_cast<__int128>(b.num_) * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    static std::int64_t gcd_abs(std::int64_t a, std::int64_t b) {
        const std::int64_t g = std::gcd(a, b);
        return g == 0 ? 1 : g;
    }

    static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
        const __int128 r = static_cast<__int128>(a) * b;
        if (r > std::numeric_limits<std::int64_t>::max() ||
            r < std::numeric_limits<std::int64_t>::min()) {
            throw std::overflow_error("Rational: multiplication overflow");
        }
        return static_cast<std::int64_t>(r);
    }

    static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
        const __int128 r = static_cast<__int128>(a) + b;
        if (r > std::numeric_limits<std::int64_t>::max() ||
            r < std::numeric_limits<std::int64_t>::min()) {
            throw std::overflow_error("Rational: addition overflow");
        }
        return static_cast<std::int64_t>(r);
    }

    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        if (num_ == 0) {
            den_ = 1;
            return;
        }
        const std::int64_t g = gcd_abs(num_, den_);
        num_ /= g;
        den_ /= g;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace taskspec
