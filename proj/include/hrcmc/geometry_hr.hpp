#pragma once

// Ambient geometry of H^2 x R. The upper-half-plane chart (x, y, z), y > 0,
// carries the metric (dx^2 + dy^2)/y^2 + dz^2; the disc chart (xt, yt, z)
// is related to it by the Cayley-type map i -> inf, 0 -> i, -i -> 0.

#include "autodiff.hpp"
#include "core.hpp"

#include <array>
#include <cmath>
#include <type_traits>

namespace hrcmc {

struct UhpPoint {
    double x = 0, y = 1, z = 0;
};

struct BallPoint {
    double xt = 0, yt = 0, z = 0;
};

struct TangentVector {
    UhpPoint base;
    double vx = 0, vy = 0, vz = 0;
};

inline constexpr double unit_tolerance = 1e-10;

inline void check_point(const UhpPoint& p) {
    require(p.y > 0 && std::isfinite(p.y), ErrorKind::invalid_point, "y must be positive");
}

inline double metric_uhp(const UhpPoint& p, const TangentVector& v, const TangentVector& w) {
    check_point(p);
    return (v.vx * w.vx + v.vy * w.vy) / (p.y * p.y) + v.vz * w.vz;
}

inline double norm(const TangentVector& v) { return std::sqrt(metric_uhp(v.base, v, v)); }

inline UhpPoint ball_to_uhp(const BallPoint& b) {
    const double d = b.xt * b.xt + (b.yt - 1) * (b.yt - 1);
    require(d > 0, ErrorKind::out_of_chart, "disc point maps to infinity");
    const double y = (1 - b.xt * b.xt - b.yt * b.yt) / d;
    require(y > 0, ErrorKind::out_of_chart, "disc point on or beyond the ideal boundary");
    return {2 * b.xt / d, y, b.z};
}

inline BallPoint uhp_to_ball(const UhpPoint& p) {
    check_point(p);
    // inverse of w = i (1 + zeta)/(1 - zeta): zeta = (w - i)/(w + i)
    const double d = p.x * p.x + (p.y + 1) * (p.y + 1);
    return {2 * p.x / d, (p.x * p.x + p.y * p.y - 1) / d, p.z};
}

// Rm(X, Y, Z, W) with the sign convention Rm(X, Y, Y, X) = K |X ^ Y|^2.
inline double curvature_tensor(const UhpPoint& p, const TangentVector& X, const TangentVector& Y,
                               const TangentVector& Z, const TangentVector& W) {
    check_point(p);
    auto h = [&](const TangentVector& a, const TangentVector& b) {
        return (a.vx * b.vx + a.vy * b.vy) / (p.y * p.y);
    };
    return -(h(X, W) * h(Y, Z) - h(X, Z) * h(Y, W));
}

// Sectional curvature of the plane orthogonal to the unit vector nu.
inline double sectional_curvature(const TangentVector& nu) {
    const double n2 = metric_uhp(nu.base, nu, nu);
    require(std::abs(n2 - 1) <= unit_tolerance, ErrorKind::precondition, "normal must be unit");
    return -nu.vz * nu.vz;
}

inline double ricci(const TangentVector& nu) { return -1 - sectional_curvature(nu); }

// Sectional curvature of the plane spanned by two tangent vectors.
inline double sectional_curvature_of_plane(const TangentVector& a, const TangentVector& b) {
    const UhpPoint& p = a.base;
    const double aa = metric_uhp(p, a, a), bb = metric_uhp(p, b, b), ab = metric_uhp(p, a, b);
    const double area2 = aa * bb - ab * ab;
    require(area2 > 0, ErrorKind::precondition, "degenerate plane");
    return curvature_tensor(p, a, b, b, a) / area2;
}

struct Christoffel {
    // gamma[k][i][j] = Gamma^k_{ij}, indices 0 = x, 1 = y, 2 = z
    std::array<std::array<std::array<double, 3>, 3>, 3> gamma{};

    double operator()(int k, int i, int j) const { return gamma[k][i][j]; }
};

inline Christoffel christoffel(const UhpPoint& p) {
    check_point(p);
    Christoffel c;
    c.gamma[0][0][1] = c.gamma[0][1][0] = -1 / p.y;
    c.gamma[1][0][0] = 1 / p.y;
    c.gamma[1][1][1] = -1 / p.y;
    return c;
}

// Contraction Gamma(a, b)^k = Gamma^k_ij a^i b^j, templated for autodiff use.
template <class T>
std::array<T, 3> christoffel_contract(const T& y, const std::array<T, 3>& a, const std::array<T, 3>& b) {
    return {-(a[0] * b[1] + a[1] * b[0]) / y, (a[0] * b[0] - a[1] * b[1]) / y, T(0.0)};
}

// Geodesic through (x0, y0, z0) with initial velocity (vx, vy, vz), evaluated
// at parameter t. The horizontal part is moved to the unit speed geodesic
// through i by a translation and dilation, where the closed form
//   x = u1 (e^{2tau} - 1) / (2D), y = e^{tau} / D, D = (1+u2)/2 + (1-u2)/2 e^{2tau}
// holds for the unit direction (u1, u2).
template <class T>
std::array<T, 3> exp_map_t(const T& x0, const T& y0, const T& z0, const T& vx, const T& vy, const T& vz,
                           const T& t) {
    using std::exp;
    using std::sqrt;
    const T ux = vx / y0, uy = vy / y0;
    const T sigma2 = ux * ux + uy * uy;
    if constexpr (std::is_same_v<T, double>)
        if (t == 0.0) return {x0, y0, z0};
    const T z = z0 + vz * t;
    if (value(sigma2) == 0.0) return {x0, y0, z};
    const T sigma = sqrt(sigma2);
    const T u1 = ux / sigma, u2 = uy / sigma;
    const T tau = sigma * t;
    T xt, yt;
    if (value(tau) >= 0) {
        const T e2 = exp(-2.0 * tau);
        const T D = (1.0 + u2) / 2.0 * e2 + (1.0 - u2) / 2.0;
        xt = u1 * (1.0 - e2) / (2.0 * D);
        yt = exp(-tau) / D;
    } else {
        const T e2 = exp(2.0 * tau);
        const T D = (1.0 + u2) / 2.0 + (1.0 - u2) / 2.0 * e2;
        xt = u1 * (e2 - 1.0) / (2.0 * D);
        yt = exp(tau) / D;
    }
    return {x0 + y0 * xt, y0 * yt, z};
}

inline UhpPoint exp_map(const UhpPoint& p, const TangentVector& v, double t) {
    check_point(p);
    auto r = exp_map_t<double>(p.x, p.y, p.z, v.vx, v.vy, v.vz, t);
    return {r[0], r[1], r[2]};
}

// Velocity of the geodesic at parameter t (parallel transport of v along it).
inline TangentVector geodesic_velocity(const UhpPoint& p, const TangentVector& v, double t) {
    HyperDual T(t, 1, 0, 0);
    auto r = exp_map_t<HyperDual>(p.x, p.y, p.z, v.vx, v.vy, v.vz, T);
    return {{r[0].f, r[1].f, r[2].f}, r[0].d1, r[1].d1, r[2].d1};
}

enum class IsometryKind { parabolic, dilation, rotation, inversion };

template <class T>
std::array<T, 3> isometry_t(IsometryKind kind, double a, const T& x, const T& y, const T& z) {
    switch (kind) {
    case IsometryKind::parabolic:
        return {x + a, y, z};
    case IsometryKind::dilation:
        return {a * x, a * y, z};
    case IsometryKind::rotation: {
        // elliptic rotation about i: w -> (cos(a/2) w + sin(a/2)) / (-sin(a/2) w + cos(a/2))
        const double c = std::cos(a / 2), s = std::sin(a / 2);
        const T nr = c * x + s, ni = c * y;
        const T dr = -s * x + c, di = -s * y;
        const T d = dr * dr + di * di;
        return {(nr * dr + ni * di) / d, (ni * dr - nr * di) / d, z};
    }
    case IsometryKind::inversion: {
        const T r2 = x * x + y * y;
        return {x / r2, y / r2, z};
    }
    }
    return {x, y, z};
}

inline UhpPoint isometry(IsometryKind kind, double a, const UhpPoint& p) {
    check_point(p);
    if (kind == IsometryKind::dilation)
        require(a > 0, ErrorKind::precondition, "dilation factor must be positive");
    auto r = isometry_t<double>(kind, a, p.x, p.y, p.z);
    require(std::isfinite(r[0]) && std::isfinite(r[1]) && r[1] > 0, ErrorKind::out_of_chart,
            "image leaves the chart");
    return {r[0], r[1], r[2]};
}

// Differential of an isometry applied to a tangent vector.
inline TangentVector push_forward(IsometryKind kind, double a, const TangentVector& v) {
    const UhpPoint q = isometry(kind, a, v.base);
    const UhpPoint& p = v.base;
    auto r = isometry_t<HyperDual>(kind, a, HyperDual(p.x, v.vx, 0, 0), HyperDual(p.y, v.vy, 0, 0),
                                   HyperDual(p.z, v.vz, 0, 0));
    return {q, r[0].d1, r[1].d1, r[2].d1};
}

} // namespace hrcmc
