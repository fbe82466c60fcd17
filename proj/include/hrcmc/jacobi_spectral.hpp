#pragma once

// The Jacobi operator L = d_s^2 + d_theta^2 + 2 sech^2 s + alpha^{-2} E on the
// (s, theta) cylinder and the spectrum of its cross-sectional part
// A = d_theta^2 + alpha^{-2} E.
//
// With a(theta) = 1 + alpha^{-2} cos^2 theta, A is self-adjoint for the
// weight a^{-1/2}, and T = a^{-1/4} A a^{1/4} is self-adjoint in L^2. The
// eigenfunctions are psi_n = a^{1/4} sum_j c_{jn} e_j over an orthonormal trig
// basis e_j of the symmetry class.

#include "catenoid.hpp"
#include "core.hpp"
#include "numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace hrcmc {

// Even class: psi(pi - theta) = psi(theta), spanned by 1, cos(n theta) for
// even n and sin(n theta) for odd n. Odd class: the complement.
enum class Symmetry { even, odd };

inline int trig_frequency(Symmetry sym, int j) { return sym == Symmetry::even ? j : j + 1; }

// Orthonormal trig basis member j of the class, with derivatives up to order 2.
inline std::array<double, 3> trig_basis(Symmetry sym, int j, double theta) {
    const int n = trig_frequency(sym, j);
    if (n == 0) return {1.0 / std::sqrt(2 * pi), 0.0, 0.0};
    const double c = 1.0 / std::sqrt(pi);
    const bool use_cos = (sym == Symmetry::even) == (n % 2 == 0);
    const double cn = std::cos(n * theta), sn = std::sin(n * theta);
    if (use_cos) return {c * cn, -c * n * sn, -c * n * n * cn};
    return {c * sn, c * n * cn, -c * n * n * sn};
}

struct SpectralBasis {
    CatenoidParams params;
    double beta = 0; // coefficient of E; alpha^{-2}, or 0 for the flat model
    Symmetry symmetry = Symmetry::even;
    int n_modes = 0;
    std::vector<double> lambdas, gammas;
    Eigen::MatrixXd coeffs;     // column n holds c_{.n}
    Eigen::MatrixXd t_matrix;   // assembled Galerkin matrix (before symmetrisation)
    double asymmetry = 0;       // max |T - T^T| / max |T|

    double a(double theta) const { double c = std::cos(theta); return 1 + beta * c * c; }
    double weight(double theta) const { return 1.0 / std::sqrt(a(theta)); }

    double eval(int n, double theta) const {
        double s = 0;
        for (int j = 0; j < n_modes; ++j) s += coeffs(j, n) * trig_basis(symmetry, j, theta)[0];
        return std::pow(a(theta), 0.25) * s;
    }

    // Rows over theta, columns over modes.
    Eigen::MatrixXd sample(const std::vector<double>& theta) const {
        Eigen::MatrixXd E(theta.size(), n_modes);
        Eigen::MatrixXd B(theta.size(), n_modes);
        for (size_t k = 0; k < theta.size(); ++k)
            for (int j = 0; j < n_modes; ++j) B(k, j) = trig_basis(symmetry, j, theta[k])[0];
        E = B * coeffs;
        for (size_t k = 0; k < theta.size(); ++k) E.row(k) *= std::pow(a(theta[k]), 0.25);
        return E;
    }
};

// Galerkin assembly with trapezoid quadrature at 4x oversampling.
inline SpectralBasis assemble_cross_section(const CatenoidParams& p, int n_modes, Symmetry sym = Symmetry::even,
                                            bool flat = false) {
    require(n_modes >= 8, ErrorKind::precondition, "need at least 8 modes");
    SpectralBasis b;
    b.params = p;
    b.beta = flat ? 0.0 : p.inv_alpha2();
    b.symmetry = sym;
    b.n_modes = n_modes;
    const int M = 8 * (n_modes + 1);
    const double w = 2 * pi / M;
    const double beta = b.beta;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n_modes, n_modes);
    std::vector<std::array<double, 3>> e(n_modes);
    for (int k = 0; k < M; ++k) {
        const double th = w * k;
        const double c = std::cos(th), s2 = std::sin(2 * th), c2 = std::cos(2 * th);
        const double a = 1 + beta * c * c, a1 = -beta * s2, a2 = -2 * beta * c2;
        const double m = std::pow(a, 0.25);
        const double m1 = 0.25 * std::pow(a, -0.75) * a1;
        const double m2 = -3.0 / 16.0 * std::pow(a, -1.75) * a1 * a1 + 0.25 * std::pow(a, -0.75) * a2;
        const double inv_m = 1.0 / m;
        for (int j = 0; j < n_modes; ++j) e[j] = trig_basis(sym, j, th);
        for (int j = 0; j < n_modes; ++j) {
            const double f = m * e[j][0];
            const double f1 = m1 * e[j][0] + m * e[j][1];
            const double f2 = m2 * e[j][0] + 2 * m1 * e[j][1] + m * e[j][2];
            const double Af = a * f2 + 0.5 * a1 * f1 + beta * c2 * f;
            const double g = w * inv_m * Af;
            for (int i = 0; i < n_modes; ++i) T(i, j) += e[i][0] * g;
        }
    }
    b.t_matrix = T;
    b.asymmetry = (T - T.transpose()).cwiseAbs().maxCoeff() / T.cwiseAbs().maxCoeff();
    require(b.asymmetry < 1e-10, ErrorKind::numerical, "assembled operator is not symmetric");
    Eigen::MatrixXd S = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    require(es.info() == Eigen::Success, ErrorKind::numerical, "eigen-solver failure");
    std::vector<int> order(n_modes);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return es.eigenvalues()[x] > es.eigenvalues()[y]; });
    b.coeffs.resize(n_modes, n_modes);
    b.lambdas.resize(n_modes);
    b.gammas.resize(n_modes);
    for (int n = 0; n < n_modes; ++n) {
        b.lambdas[n] = es.eigenvalues()[order[n]];
        b.gammas[n] = std::sqrt(std::abs(b.lambdas[n]));
        Eigen::VectorXd v = es.eigenvectors().col(order[n]);
        // positive weighted inner product with the unperturbed e_n:
        // <psi_n, e_n>_w = sum_j c_j int a^{-1/4} e_j e_n
        double ip = 0;
        for (int k = 0; k < M; ++k) {
            const double th = w * k;
            double psi = 0;
            for (int j = 0; j < n_modes; ++j) psi += v[j] * trig_basis(sym, j, th)[0];
            ip += w * std::pow(b.a(th), -0.25) * psi * trig_basis(sym, n, th)[0];
        }
        if (ip < 0) v = -v;
        b.coeffs.col(n) = v;
    }
    return b;
}

inline SpectralBasis flat_basis(int n_modes, Symmetry sym = Symmetry::even) {
    return assemble_cross_section(CatenoidParams::from_alpha(1.0), n_modes, sym, true);
}

// gamma_n = sqrt|lambda_n| with the ordering 0 = g0 < g1 < 2 < g2 < ... and
// g_n > n for 2 <= n <= n_check.
inline std::vector<double> indicial_roots(const SpectralBasis& b, int n_check = 10) {
    const auto& g = b.gammas;
    n_check = std::min(n_check, b.n_modes / 2);
    bool ok = g.size() >= 3 && std::abs(g[0]) < 1e-6 && g[0] < g[1] && g[1] < 2 && g[2] > 2;
    for (int n = 2; ok && n <= n_check; ++n) ok = g[n] > n && g[n] > g[n - 1];
    if (b.symmetry == Symmetry::even && !ok)
        throw Error(ErrorKind::spectral_accuracy, "indicial root ordering violated; increase n_modes");
    return g;
}

// ---------------------------------------------------------------------------
// Periodic angular operators.

inline Eigen::VectorXd apply_E(const Eigen::VectorXd& f) {
    const int n = static_cast<int>(f.size());
    Eigen::MatrixXd D1 = fourier_d1(n), D2 = fourier_d2(n);
    Eigen::VectorXd f1 = D1 * f, f2 = D2 * f;
    Eigen::VectorXd out(n);
    for (int k = 0; k < n; ++k) {
        const double th = 2 * pi * k / n;
        out[k] = (std::cos(2 * th) + 1) / 2 * f2[k] - std::sin(2 * th) / 2 * f1[k] + std::cos(2 * th) * f[k];
    }
    return out;
}

// Projection onto the eigenbasis by weighted discrete least squares.
struct ModeProjection {
    Eigen::VectorXd coefficients; // all modes
    Eigen::VectorXd high() const {
        Eigen::VectorXd h = coefficients;
        h.head(std::min<Eigen::Index>(2, h.size())).setZero();
        return h;
    }
    double low0() const { return coefficients[0]; }
    double low1() const { return coefficients[1]; }
};

class ModeProjector {
public:
    ModeProjector(const SpectralBasis& b, const std::vector<double>& theta) : theta_(theta) {
        Psi_ = b.sample(theta);
        W_.resize(theta.size());
        const double dth = 2 * pi / theta.size();
        for (size_t k = 0; k < theta.size(); ++k) W_[k] = dth * b.weight(theta[k]);
        Eigen::MatrixXd G = Psi_.transpose() * W_.asDiagonal() * Psi_;
        solver_ = G.ldlt();
    }

    // Coefficients of a theta-sampled function (or of each row of a field).
    Eigen::VectorXd coefficients(const Eigen::VectorXd& f) const {
        return solver_.solve(Psi_.transpose() * (W_.asDiagonal() * f));
    }
    Eigen::MatrixXd coefficients_rows(const Eigen::MatrixXd& F) const {
        // F is ns x ntheta; result ns x modes
        Eigen::MatrixXd R = Psi_.transpose() * W_.asDiagonal() * F.transpose();
        return solver_.solve(R).transpose();
    }
    Eigen::VectorXd synthesize(const Eigen::VectorXd& c) const { return Psi_ * c; }
    Eigen::MatrixXd synthesize_rows(const Eigen::MatrixXd& C) const { return C * Psi_.transpose(); }

    const Eigen::MatrixXd& samples() const { return Psi_; }
    const std::vector<double>& theta() const { return theta_; }

private:
    std::vector<double> theta_;
    Eigen::MatrixXd Psi_;
    Eigen::VectorXd W_;
    Eigen::LDLT<Eigen::MatrixXd> solver_;
};

inline double symmetry_defect(const Eigen::VectorXd& f) {
    const int n = static_cast<int>(f.size());
    double d = 0;
    for (int k = 0; k < n; ++k) {
        int r = ((n / 2 - k) % n + n) % n; // index of pi - theta_k
        d = std::max(d, std::abs(f[k] - f[r]));
    }
    return d;
}

inline ModeProjection project_high(const ModeProjector& P, const Eigen::VectorXd& phi) {
    require(symmetry_defect(phi) <= 1e-8 * std::max(1.0, phi.cwiseAbs().maxCoeff()), ErrorKind::symmetry,
            "boundary data is not symmetric under theta -> pi - theta");
    return {P.coefficients(phi)};
}

// ---------------------------------------------------------------------------
// Cylinder grids and the operator L.

struct CylinderGrid {
    std::vector<double> s, theta;
    double hs = 0;
    Eigen::MatrixXd Ds1, Ds2, Dt1, Dt2;

    Eigen::Index ns() const { return static_cast<Eigen::Index>(s.size()); }
    Eigen::Index nt() const { return static_cast<Eigen::Index>(theta.size()); }

    Eigen::MatrixXd d_s(const Eigen::MatrixXd& u) const { return Ds1 * u; }
    Eigen::MatrixXd d_ss(const Eigen::MatrixXd& u) const { return Ds2 * u; }
    Eigen::MatrixXd d_t(const Eigen::MatrixXd& u) const { return u * Dt1.transpose(); }
    Eigen::MatrixXd d_tt(const Eigen::MatrixXd& u) const { return u * Dt2.transpose(); }

    template <class F>
    Eigen::MatrixXd sample(F&& f) const {
        Eigen::MatrixXd u(ns(), nt());
        for (Eigen::Index i = 0; i < ns(); ++i)
            for (Eigen::Index j = 0; j < nt(); ++j) u(i, j) = f(s[i], theta[j]);
        return u;
    }
};

inline CylinderGrid make_cylinder_grid(double s0, double s1, int ns, int nt, int order = 4) {
    CylinderGrid g;
    g.s = uniform_grid(s0, s1, ns);
    g.theta = periodic_grid(nt);
    g.hs = (s1 - s0) / (ns - 1);
    g.Ds1 = fd_matrix(ns, g.hs, 1, order);
    g.Ds2 = fd_matrix(ns, g.hs, 2, order);
    g.Dt1 = fourier_d1(nt);
    g.Dt2 = fourier_d2(nt);
    return g;
}

// u_ss + u_tt + beta E u, plus 2 sech^2(s) u when include_sech is set.
inline Eigen::MatrixXd apply_L(double beta, const CylinderGrid& g, const Eigen::MatrixXd& u, bool include_sech) {
    Eigen::MatrixXd ut = g.d_t(u), utt = g.d_tt(u);
    Eigen::MatrixXd out = g.d_ss(u) + utt;
    for (Eigen::Index j = 0; j < g.nt(); ++j) {
        const double th = g.theta[j];
        const double c2 = std::cos(2 * th), s2 = std::sin(2 * th);
        out.col(j) += beta * ((c2 + 1) / 2 * utt.col(j) - s2 / 2 * ut.col(j) + c2 * u.col(j));
    }
    if (include_sech)
        for (Eigen::Index i = 0; i < g.ns(); ++i) {
            const double sh = sech(g.s[i]);
            out.row(i) += 2 * sh * sh * u.row(i);
        }
    return out;
}

inline Eigen::MatrixXd apply_L(const CatenoidParams& p, const CylinderGrid& g, const Eigen::MatrixXd& u,
                               bool include_sech) {
    return apply_L(p.inv_alpha2(), g, u, include_sech);
}

// alpha^2 (alpha - phi')^2 / cosh^2 s, the factor relating L to the geometric Jacobi operator.
inline double jacobi_prefactor(const CatenoidParams& p, double s, double theta) {
    const double am = p.alpha - phi_prime_of_theta(p, theta);
    const double ch = std::cosh(s);
    return p.alpha * p.alpha * am * am / (ch * ch);
}

// ---------------------------------------------------------------------------
// Jacobi fields on the low modes.

// Solutions of v'' + (2 sech^2 s - k^2) v = 0, k = 1 + eps.
// v_minus decays like e^{-k s} as s -> inf: v_minus = (k + tanh s) e^{-k s} / k.
// v_plus(s) = v_minus(-s) grows like e^{k s}.
inline double v_minus_closed(double k, double s) { return (k + std::tanh(s)) * std::exp(-k * s) / k; }
inline double v_plus_closed(double k, double s) { return v_minus_closed(k, -s); }

struct JacobiFieldSamples {
    std::vector<double> s;
    std::vector<double> v_minus, v_plus; // ODE-integrated
};

inline JacobiFieldSamples integrate_v(double eps, const std::vector<double>& s, double tol = 1e-12) {
    const double k = 1 + eps;
    OdeRhs rhs = [k](double t, const Eigen::VectorXd& y) {
        Eigen::VectorXd d(2);
        const double sh = sech(t);
        d[0] = y[1];
        d[1] = -(2 * sh * sh - k * k) * y[0];
        return d;
    };
    JacobiFieldSamples out;
    out.s = s;
    auto run = [&](double sign) {
        // y(0) = 1, y'(0) = sign (1 - k^2)/k; sign = -1 mirrors to the growing solution
        std::vector<double> vals(s.size());
        Eigen::VectorXd y0(2);
        y0 << 1.0, sign * (1 - k * k) / k;
        for (size_t i = 0; i < s.size(); ++i) vals[i] = rk45(rhs, 0.0, y0, s[i], tol, tol * 1e-4)[0];
        return vals;
    };
    out.v_minus = run(1.0);
    out.v_plus = run(-1.0);
    return out;
}

struct JacobiField {
    const char* name;
    std::function<double(double, double)> f;
};

inline std::vector<JacobiField> jacobi_fields(const CatenoidParams& p) {
    const double beta = p.inv_alpha2();
    const double k = 1 + p.epsilon;
    auto root_a = [beta](double th) { double c = std::cos(th); return std::sqrt(1 + beta * c * c); };
    return {
        {"sqrt(a) tanh s", [=](double s, double th) { return root_a(th) * std::tanh(s); }},
        {"sqrt(a) (s tanh s - 1)", [=](double s, double th) { return root_a(th) * (s * std::tanh(s) - 1); }},
        {"cos(theta)/cosh s", [](double s, double th) { return std::cos(th) / std::cosh(s); }},
        {"(s/cosh s + sinh s) cos(theta)",
         [](double s, double th) { return (s / std::cosh(s) + std::sinh(s)) * std::cos(th); }},
        {"v_minus(s) sin(theta)", [=](double s, double th) { return v_minus_closed(k, s) * std::sin(th); }},
        {"v_plus(s) sin(theta)", [=](double s, double th) { return v_plus_closed(k, s) * std::sin(th); }},
    };
}

// ---------------------------------------------------------------------------
// Kernel scan of L on [-L, L] x S^1 with zero boundary values, mode by mode
// in both symmetry classes.

struct KernelScanMode {
    Symmetry symmetry;
    int mode;
    double lambda;
    double min_singular;
    Eigen::VectorXd profile; // singular vector on the interior nodes
};

inline std::vector<KernelScanMode> kernel_scan(const CatenoidParams& p, double L = 10, int ns = 601,
                                               int modes_per_class = 4, int n_modes = 32) {
    std::vector<KernelScanMode> out;
    const double h = 2 * L / (ns - 1);
    const int m = ns - 2;
    // symmetric 5-point stencil with zero ghost values beyond the ends
    Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(m, m);
    const double c0 = -30.0 / (12 * h * h), c1 = 16.0 / (12 * h * h), c2 = -1.0 / (12 * h * h);
    for (int i = 0; i < m; ++i) {
        D2(i, i) = c0;
        if (i + 1 < m) D2(i, i + 1) = D2(i + 1, i) = c1;
        if (i + 2 < m) D2(i, i + 2) = D2(i + 2, i) = c2;
    }
    for (Symmetry sym : {Symmetry::even, Symmetry::odd}) {
        SpectralBasis b = assemble_cross_section(p, n_modes, sym);
        for (int n = 0; n < modes_per_class; ++n) {
            Eigen::MatrixXd A = D2;
            for (int i = 0; i < m; ++i) {
                const double s = -L + (i + 1) * h, sh = sech(s);
                A(i, i) += b.lambdas[n] + 2 * sh * sh;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
            Eigen::Index best = 0;
            es.eigenvalues().cwiseAbs().minCoeff(&best);
            out.push_back({sym, n, b.lambdas[n], std::abs(es.eigenvalues()[best]), es.eigenvectors().col(best)});
        }
    }
    return out;
}

} // namespace hrcmc
