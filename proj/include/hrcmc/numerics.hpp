#pragma once

#include "core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace hrcmc {

// Finite-difference weights for the m-th derivative at x0 from nodes xs
// (Fornberg's recursion). Returns w[j] for j over xs.
inline std::vector<double> fornberg_weights(double x0, const std::vector<double>& xs, int m) {
    const int n = static_cast<int>(xs.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1, c4 = xs[0] - x0;
    c[0][0] = 1;
    for (int i = 1; i < n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1, c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k > 0; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k > 0; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) w[j] = c[j][m];
    return w;
}

// Dense matrix of the m-th derivative on a uniform grid of n points with
// spacing h. Centered stencils where they fit, shifted one-sided stencils of
// the same order near the ends.
inline Eigen::MatrixXd fd_matrix(int n, double h, int m, int order = 4) {
    const int half = order / 2;
    const int centered = 2 * half + 1;
    const int sided = order + m;
    require(n >= sided, ErrorKind::precondition, "grid too small for stencil");
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        int width, lo;
        if (i - half >= 0 && i + half < n) {
            width = centered;
            lo = i - half;
        } else {
            width = sided;
            lo = (i - half < 0) ? 0 : n - sided;
        }
        std::vector<double> xs(width);
        for (int k = 0; k < width; ++k) xs[k] = (lo + k - i) * h;
        auto w = fornberg_weights(0.0, xs, m);
        for (int k = 0; k < width; ++k) D(i, lo + k) = w[k];
    }
    return D;
}

// Spectral differentiation on the periodic grid theta_j = 2*pi*j/n, n even.
inline Eigen::MatrixXd fourier_d1(int n) {
    require(n % 2 == 0 && n >= 4, ErrorKind::precondition, "periodic grid size must be even");
    const double h = 2 * pi / n;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            int k = i - j;
            double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            D(i, j) = 0.5 * sgn / std::tan(k * h / 2);
        }
    return D;
}

inline Eigen::MatrixXd fourier_d2(int n) {
    require(n % 2 == 0 && n >= 4, ErrorKind::precondition, "periodic grid size must be even");
    const double h = 2 * pi / n;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) {
                D(i, j) = -pi * pi / (3 * h * h) - 1.0 / 6.0;
                continue;
            }
            int k = i - j;
            double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            double sn = std::sin(k * h / 2);
            D(i, j) = -0.5 * sgn / (sn * sn);
        }
    return D;
}

using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// Adaptive Dormand-Prince 5(4) from t0 to t1 (either direction).
inline Eigen::VectorXd rk45(const OdeRhs& f, double t0, Eigen::VectorXd y, double t1, double rtol,
                            double atol = 1e-14, int max_steps = 1000000) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    if (t1 == t0) return y;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    double t = t0;
    double h = dir * std::min(std::abs(t1 - t0), 1e-2);
    Eigen::VectorXd k1 = f(t, y);
    for (int step = 0; step < max_steps; ++step) {
        if (dir * (t + h - t1) > 0) h = t1 - t;
        Eigen::VectorXd k2 = f(t + c2 * h, y + h * a21 * k1);
        Eigen::VectorXd k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        Eigen::VectorXd k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        Eigen::VectorXd k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Eigen::VectorXd k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Eigen::VectorXd yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Eigen::VectorXd k7 = f(t + h, yn);
        Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
            en = std::max(en, std::abs(err[i]) / sc);
        }
        if (!std::isfinite(en)) {
            h *= 0.25;
            continue;
        }
        if (en <= 1.0) {
            t += h;
            y = yn;
            k1 = k7;
            if (dir * (t - t1) >= 0) return y;
        }
        double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h *= fac;
    }
    throw Error(ErrorKind::numerical, "rk45 exceeded step budget");
}

inline Eigen::VectorXd rk4_step(const OdeRhs& f, double t, const Eigen::VectorXd& y, double h) {
    Eigen::VectorXd k1 = f(t, y);
    Eigen::VectorXd k2 = f(t + h / 2, y + h / 2 * k1);
    Eigen::VectorXd k3 = f(t + h / 2, y + h / 2 * k2);
    Eigen::VectorXd k4 = f(t + h, y + h * k3);
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// m_k = int_0^1 exp(-rho*xi) xi^k dxi for k = 0..3.
inline std::array<double, 4> exp_moments(double rho) {
    std::array<double, 4> m{};
    if (std::abs(rho) < 1.0) {
        for (int k = 0; k < 4; ++k) {
            double term = 1.0, sum = 0.0;
            for (int j = 0; j < 40; ++j) {
                sum += term / (k + j + 1);
                term *= -rho / (j + 1);
            }
            m[k] = sum;
        }
    } else {
        double e = std::exp(-rho);
        m[0] = (1 - e) / rho;
        for (int k = 1; k < 4; ++k) m[k] = (k * m[k - 1] - e) / rho;
    }
    return m;
}

// Weights w_j with int_0^1 exp(-rho*xi) p(xi) dxi = sum_j w_j p(a + j), where
// p is the cubic through the four integer nodes a, a+1, a+2, a+3.
inline std::array<double, 4> exp_cubic_weights(double rho, int a) {
    auto m = exp_moments(rho);
    std::array<double, 4> w{};
    for (int j = 0; j < 4; ++j) {
        // monomial coefficients of the Lagrange basis polynomial for node a+j
        std::array<double, 4> c{1, 0, 0, 0};
        double denom = 1;
        int deg = 0;
        for (int k = 0; k < 4; ++k) {
            if (k == j) continue;
            double xk = a + k;
            for (int d = deg + 1; d > 0; --d) c[d] = c[d - 1] - xk * c[d];
            c[0] = -xk * c[0];
            ++deg;
            denom *= (a + j) - xk;
        }
        double s = 0;
        for (int d = 0; d < 4; ++d) s += c[d] * m[d];
        w[j] = s / denom;
    }
    return w;
}

// J_i = int_{s_i}^{inf} exp(-r (t - s_i)) f(t) dt on a uniform grid, with the
// value beyond the last node supplied as J_last.
inline Eigen::VectorXd exp_conv_backward(const Eigen::VectorXd& f, double h, double r, double J_last) {
    const Eigen::Index n = f.size();
    require(n >= 4, ErrorKind::precondition, "need at least four samples");
    Eigen::VectorXd J(n);
    J[n - 1] = J_last;
    const double decay = std::exp(-r * h);
    auto w_first = exp_cubic_weights(r * h, 0);
    auto w_mid = exp_cubic_weights(r * h, -1);
    auto w_last = exp_cubic_weights(r * h, -2);
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        double I;
        if (i == 0)
            I = w_first[0] * f[0] + w_first[1] * f[1] + w_first[2] * f[2] + w_first[3] * f[3];
        else if (i == n - 2)
            I = w_last[0] * f[i - 2] + w_last[1] * f[i - 1] + w_last[2] * f[i] + w_last[3] * f[i + 1];
        else
            I = w_mid[0] * f[i - 1] + w_mid[1] * f[i] + w_mid[2] * f[i + 1] + w_mid[3] * f[i + 2];
        J[i] = decay * J[i + 1] + h * I;
    }
    return J;
}

// K_i = int_{s_0}^{s_i} exp(-r (s_i - t)) g(t) dt on a uniform grid.
inline Eigen::VectorXd exp_conv_forward(const Eigen::VectorXd& g, double h, double r) {
    const Eigen::Index n = g.size();
    require(n >= 4, ErrorKind::precondition, "need at least four samples");
    Eigen::VectorXd rev = g.reverse();
    // K_{i+1} = e^{-rh} K_i + h int_0^1 e^{-r h xi} g(s_{i+1} - xi h) dxi
    Eigen::VectorXd K(n);
    K[0] = 0;
    const double decay = std::exp(-r * h);
    auto w_first = exp_cubic_weights(r * h, 0);
    auto w_mid = exp_cubic_weights(r * h, -1);
    auto w_last = exp_cubic_weights(r * h, -2);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        Eigen::Index j = n - 1 - (i + 1); // index of s_{i+1} in the reversed array
        double I;
        if (j == 0)
            I = w_first[0] * rev[0] + w_first[1] * rev[1] + w_first[2] * rev[2] + w_first[3] * rev[3];
        else if (j == n - 2)
            I = w_last[0] * rev[j - 2] + w_last[1] * rev[j - 1] + w_last[2] * rev[j] + w_last[3] * rev[j + 1];
        else
            I = w_mid[0] * rev[j - 1] + w_mid[1] * rev[j] + w_mid[2] * rev[j + 1] + w_mid[3] * rev[j + 2];
        K[i + 1] = decay * K[i] + h * I;
    }
    return K;
}

// Cumulative integral int_{x_0}^{x_i} f on a uniform grid. Simpson on pairs
// of intervals, with the 3/8 rule closing odd-indexed nodes.
inline Eigen::VectorXd cumulative_simpson(const Eigen::VectorXd& f, double h) {
    const Eigen::Index n = f.size();
    require(n >= 4, ErrorKind::precondition, "need at least four samples");
    Eigen::VectorXd I = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 2; i < n; i += 2) I[i] = I[i - 2] + h / 3 * (f[i - 2] + 4 * f[i - 1] + f[i]);
    I[1] = h / 24 * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
    for (Eigen::Index i = 3; i < n; i += 2)
        I[i] = I[i - 3] + 3 * h / 8 * (f[i - 3] + 3 * f[i - 2] + 3 * f[i - 1] + f[i]);
    return I;
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace hrcmc
