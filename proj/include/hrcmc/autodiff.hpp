#pragma once

// Hyper-dual numbers: a + b e1 + c e2 + d e1e2 with e1² = e2² = 0.
// Seeding e1 and e2 along two directions gives exact first and mixed second
// derivatives of any smooth expression built from the supported operations.

#include <cmath>

namespace hrcmc {

struct HyperDual {
    double f = 0, d1 = 0, d2 = 0, d12 = 0;

    constexpr HyperDual() = default;
    constexpr HyperDual(double v) : f(v) {}
    constexpr HyperDual(double v, double a, double b, double c) : f(v), d1(a), d2(b), d12(c) {}

    HyperDual& operator+=(const HyperDual& o) { f += o.f; d1 += o.d1; d2 += o.d2; d12 += o.d12; return *this; }
    HyperDual& operator-=(const HyperDual& o) { f -= o.f; d1 -= o.d1; d2 -= o.d2; d12 -= o.d12; return *this; }
    HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }
    HyperDual& operator/=(const HyperDual& o) { return *this = *this / o; }

    friend HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
    friend HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
    friend HyperDual operator-(const HyperDual& a) { return {-a.f, -a.d1, -a.d2, -a.d12}; }
    friend HyperDual operator*(const HyperDual& a, const HyperDual& b) {
        return {a.f * b.f, a.f * b.d1 + a.d1 * b.f, a.f * b.d2 + a.d2 * b.f,
                a.f * b.d12 + a.d1 * b.d2 + a.d2 * b.d1 + a.d12 * b.f};
    }
    friend HyperDual operator/(const HyperDual& a, const HyperDual& b) { return a * inv(b); }

    friend bool operator<(const HyperDual& a, const HyperDual& b) { return a.f < b.f; }
    friend bool operator>(const HyperDual& a, const HyperDual& b) { return a.f > b.f; }
    friend bool operator<=(const HyperDual& a, const HyperDual& b) { return a.f <= b.f; }
    friend bool operator>=(const HyperDual& a, const HyperDual& b) { return a.f >= b.f; }

    // Chain rule for a scalar function with value v, derivative p, second derivative q.
    static HyperDual chain(const HyperDual& x, double v, double p, double q) {
        return {v, p * x.d1, p * x.d2, p * x.d12 + q * x.d1 * x.d2};
    }

    friend HyperDual inv(const HyperDual& x) {
        double r = 1.0 / x.f;
        return chain(x, r, -r * r, 2 * r * r * r);
    }
};

inline double value(double x) { return x; }
inline double value(const HyperDual& x) { return x.f; }

inline HyperDual sin(const HyperDual& x) { return HyperDual::chain(x, std::sin(x.f), std::cos(x.f), -std::sin(x.f)); }
inline HyperDual cos(const HyperDual& x) { return HyperDual::chain(x, std::cos(x.f), -std::sin(x.f), -std::cos(x.f)); }
inline HyperDual exp(const HyperDual& x) { double e = std::exp(x.f); return HyperDual::chain(x, e, e, e); }
inline HyperDual log(const HyperDual& x) { return HyperDual::chain(x, std::log(x.f), 1 / x.f, -1 / (x.f * x.f)); }
inline HyperDual sinh(const HyperDual& x) { return HyperDual::chain(x, std::sinh(x.f), std::cosh(x.f), std::sinh(x.f)); }
inline HyperDual cosh(const HyperDual& x) { return HyperDual::chain(x, std::cosh(x.f), std::sinh(x.f), std::cosh(x.f)); }
inline HyperDual tanh(const HyperDual& x) {
    double t = std::tanh(x.f), d = 1 - t * t;
    return HyperDual::chain(x, t, d, -2 * t * d);
}
inline HyperDual sqrt(const HyperDual& x) {
    double r = std::sqrt(x.f);
    return HyperDual::chain(x, r, 0.5 / r, -0.25 / (r * x.f));
}
inline HyperDual atan2(const HyperDual& y, const HyperDual& x) {
    double r2 = x.f * x.f + y.f * y.f;
    double v = std::atan2(y.f, x.f);
    // gradient (-y, x)/r2 ; Hessian entries of atan2
    double gx = -y.f / r2, gy = x.f / r2;
    double hxx = 2 * x.f * y.f / (r2 * r2), hyy = -hxx, hxy = (y.f * y.f - x.f * x.f) / (r2 * r2);
    return {v, gx * x.d1 + gy * y.d1, gx * x.d2 + gy * y.d2,
            gx * x.d12 + gy * y.d12 + hxx * x.d1 * x.d2 + hyy * y.d1 * y.d2 +
                hxy * (x.d1 * y.d2 + y.d1 * x.d2)};
}

} // namespace hrcmc
