#pragma once

// Fermi coordinates off the catenoid: the tubular surfaces
// Sigma_t = {exp_X(t nu(X))}, their principal curvatures via the Riccati
// flow S' = S^2 + R, normal graphs over the catenoid and their numerical mean
// curvature, and the nonlinear remainder of the mean curvature operator.

#include "catenoid.hpp"
#include "core.hpp"
#include "geometry_hr.hpp"
#include "jacobi_spectral.hpp"
#include "numerics.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace hrcmc {

inline constexpr double tube_radius = 0.25;

// ---------------------------------------------------------------------------
// Riccati flow along a normal geodesic.

// Parallel orthonormal frame of the normal space of a geodesic with velocity
// T: e1 along the projection of d_z, e2 horizontal. Falls back to a
// horizontal frame when T is vertical.
struct GeodesicFrame {
    TangentVector e1, e2;
    double vertical_angle; // <T, d_z>
};

inline GeodesicFrame normal_frame(const TangentVector& T) {
    const UhpPoint& p = T.base;
    const double c = T.vz;
    const double th = std::sqrt(std::max(0.0, 1 - c * c)); // |T_h|
    GeodesicFrame f;
    f.vertical_angle = c;
    if (th < 1e-12) {
        f.e1 = {p, p.y, 0, 0};
        f.e2 = {p, 0, p.y, 0};
        return f;
    }
    f.e1 = {p, -c * T.vx / th, -c * T.vy / th, (1 - c * c) / th};
    f.e2 = {p, -T.vy / th, T.vx / th, 0};
    return f;
}

// R_ij = Rm(e_i, T, T, e_j) in the frame above.
inline Eigen::Matrix2d curvature_operator(const TangentVector& T, const GeodesicFrame& f) {
    const UhpPoint& p = T.base;
    Eigen::Matrix2d R;
    R(0, 0) = curvature_tensor(p, f.e1, T, T, f.e1);
    R(1, 1) = curvature_tensor(p, f.e2, T, T, f.e2);
    R(0, 1) = R(1, 0) = curvature_tensor(p, f.e1, T, T, f.e2);
    return R;
}

struct TubularState {
    double s = 0, theta = 0, t = 0;
    double kappa1_t = 0, kappa2_t = 0;
    double rho1 = 0, rho2 = 0;       // sectional curvatures of (T, eigenvector_i)
    double sigma1 = 0, sigma2 = 0;   // eigenvalues of R at t
    double vertical_angle = 0;       // <T, d_z> at t
};

// Fixed step RK4 for S' = S^2 + R(t), returning S(t).
template <class RFun>
Eigen::Matrix2d integrate_riccati(Eigen::Matrix2d S, RFun&& R, double t, double step = 1e-3) {
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) / step - 1e-12)));
    const double h = t / n;
    auto f = [&](double tt, const Eigen::Matrix2d& X) -> Eigen::Matrix2d { return X * X + R(tt); };
    double tt = 0;
    for (int k = 0; k < n; ++k) {
        Eigen::Matrix2d k1 = f(tt, S);
        Eigen::Matrix2d k2 = f(tt + h / 2, S + h / 2 * k1);
        Eigen::Matrix2d k3 = f(tt + h / 2, S + h / 2 * k2);
        Eigen::Matrix2d k4 = f(tt + h, S + h * k3);
        S += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        tt += h;
        if (!S.allFinite() || S.cwiseAbs().maxCoeff() > 1e8)
            throw Error(ErrorKind::blowup, "principal curvature escapes before t = " + std::to_string(tt));
    }
    return S;
}

// Shape operator of the catenoid at (s, theta) in the frame (e1, e2) at t = 0.
inline Eigen::Matrix2d initial_shape(const LocalGeometry& lg, const GeodesicFrame& f) {
    const double y = lg.point.y;
    const Sym2& I = lg.first;
    Eigen::Matrix2d G;
    G << I.ss, I.st, I.st, I.tt;
    Eigen::Matrix2d II;
    II << lg.second.ss, lg.second.st, lg.second.st, lg.second.tt;
    auto coords = [&](const TangentVector& e) {
        std::array<double, 3> v{e.vx, e.vy, e.vz};
        Eigen::Vector2d r(dot_g(y, v, lg.Xs), dot_g(y, v, lg.Xt));
        return Eigen::Vector2d(G.ldlt().solve(r));
    };
    Eigen::Matrix2d C;
    C.col(0) = coords(f.e1);
    C.col(1) = coords(f.e2);
    return C.transpose() * II * C;
}

inline TubularState tubular_curvatures(const CatenoidParams& p, double s, double theta, double t,
                                       double step = 1e-3) {
    require(std::abs(t) <= tube_radius + 1e-15, ErrorKind::precondition, "|t| must not exceed 1/4");
    const LocalGeometry lg = catenoid_geometry(p, s, theta);
    const TangentVector& nu = lg.normal;
    auto frame_at = [&](double tt) {
        TangentVector T = geodesic_velocity(lg.point, nu, tt);
        return std::pair{T, normal_frame(T)};
    };
    auto [T0, F0] = frame_at(0.0);
    Eigen::Matrix2d S0 = initial_shape(lg, F0);
    Eigen::Matrix2d S = integrate_riccati(
        S0, [&](double tt) {
            auto [T, F] = frame_at(tt);
            return curvature_operator(T, F);
        },
        t, step);
    auto [Tt, Ft] = frame_at(t);
    Eigen::Matrix2d R = curvature_operator(Tt, Ft);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (S + S.transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> er(R);
    TubularState st;
    st.s = s;
    st.theta = theta;
    st.t = t;
    st.kappa1_t = es.eigenvalues()[1];
    st.kappa2_t = es.eigenvalues()[0];
    // rho_i from the sectional curvature of the plane (T, v_i)
    auto rho = [&](const Eigen::Vector2d& v) {
        TangentVector w{Tt.base, v[0] * Ft.e1.vx + v[1] * Ft.e2.vx, v[0] * Ft.e1.vy + v[1] * Ft.e2.vy,
                        v[0] * Ft.e1.vz + v[1] * Ft.e2.vz};
        return sectional_curvature_of_plane(Tt, w);
    };
    st.rho1 = rho(es.eigenvectors().col(1));
    st.rho2 = rho(es.eigenvectors().col(0));
    st.sigma1 = er.eigenvalues()[1];
    st.sigma2 = er.eigenvalues()[0];
    st.vertical_angle = Tt.vz;
    return st;
}

struct Comparison {
    double upper, lower;
};

// Solutions of k' = k^2 (upper) and k' = k^2 - 1 (lower) with k(0) = kappa0.
inline Comparison riccati_comparison(double kappa0, double t) {
    require(std::abs(t) <= tube_radius + 1e-15, ErrorKind::precondition, "|t| must not exceed 1/4");
    const double du = 1 - kappa0 * t;
    const double e = std::exp(2 * t);
    const double dl = kappa0 + 1 - (kappa0 - 1) * e;
    // the solutions must exist on the whole interval between 0 and t
    // both denominators equal their t = 0 values 1 and 2 and are monotone in t
    if (du <= 0 || dl <= 0)
        throw Error(ErrorKind::comparison_breakdown, "comparison solution blows up before t");
    return {kappa0 / du, (kappa0 + 1 + (kappa0 - 1) * e) / dl};
}

// ---------------------------------------------------------------------------
// Fermi chart F(s, theta, t) = exp_X(t nu).

template <class T>
std::array<T, 3> fermi_point(const CatenoidParams& p, double s, double theta, const T& t) {
    const LocalGeometry lg = catenoid_geometry(p, s, theta);
    const TangentVector& n = lg.normal;
    return exp_map_t<T>(T(n.base.x), T(n.base.y), T(n.base.z), T(n.vx), T(n.vy), T(n.vz), t);
}

struct FermiMetricReport {
    Sym2 g_tilde, g, h, gamma3, dgdt;
    double linear_residual = 0;   // max |g~ - (g - 2 h t)|
    double remainder_ratio = 0;   // linear_residual / t^2
    double christoffel_residual = 0; // max |Gamma^3 + dg~/dt / 2|
    double gamma_at_zero_residual = 0; // max |Gamma^3(t=0) - h|
};

inline FermiMetricReport fermi_metric_check(const CatenoidParams& p, double s, double theta, double t,
                                            double delta = 2e-3) {
    require(std::abs(t) <= tube_radius + 1e-15, ErrorKind::precondition, "|t| must not exceed 1/4");
    auto F = [&](double a, double b, double c) {
        auto r = fermi_point<double>(p, a, b, c);
        return Eigen::Vector3d(r[0], r[1], r[2]);
    };
    // Richardson-extrapolated central differences in (s, theta, t)
    auto d1 = [&](int axis, double a, double b, double c) {
        auto cd = [&](double h) {
            Eigen::Vector3d e = Eigen::Vector3d::Zero();
            e[axis] = h;
            return Eigen::Vector3d((F(a + e[0], b + e[1], c + e[2]) - F(a - e[0], b - e[1], c - e[2])) / (2 * h));
        };
        return Eigen::Vector3d((4 * cd(delta / 2) - cd(delta)) / 3);
    };
    auto d2 = [&](int i, int j, double a, double b, double c) {
        auto cd = [&](double h) {
            Eigen::Vector3d ei = Eigen::Vector3d::Zero(), ej = Eigen::Vector3d::Zero();
            ei[i] = h;
            ej[j] = h;
            auto at = [&](const Eigen::Vector3d& o) { return F(a + o[0], b + o[1], c + o[2]); };
            return Eigen::Vector3d((at(ei + ej) - at(ei - ej) - at(ej - ei) + at(-ei - ej)) / (4 * h * h));
        };
        return Eigen::Vector3d((4 * cd(delta / 2) - cd(delta)) / 3);
    };
    auto frame = [&](double tt) {
        const Eigen::Vector3d X = F(s, theta, tt);
        const double y = X[1];
        auto ip = [&](const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
            return (u[0] * v[0] + u[1] * v[1]) / (y * y) + u[2] * v[2];
        };
        Eigen::Vector3d Fs = d1(0, s, theta, tt), Ft = d1(1, s, theta, tt), Fn = d1(2, s, theta, tt);
        Sym2 g{ip(Fs, Fs), ip(Fs, Ft), ip(Ft, Ft)};
        auto cov = [&](const Eigen::Vector3d& d2v, const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
            auto G = christoffel_contract<double>(y, {u[0], u[1], u[2]}, {v[0], v[1], v[2]});
            return ip(d2v + Eigen::Vector3d(G[0], G[1], G[2]), Fn);
        };
        Sym2 gam{cov(d2(0, 0, s, theta, tt), Fs, Fs), cov(d2(0, 1, s, theta, tt), Fs, Ft),
                 cov(d2(1, 1, s, theta, tt), Ft, Ft)};
        return std::pair{g, gam};
    };
    const LocalGeometry lg = catenoid_geometry(p, s, theta);
    FermiMetricReport r;
    r.g = lg.first;
    r.h = lg.second;
    auto [gt, gam] = frame(t);
    r.g_tilde = gt;
    r.gamma3 = gam;
    // dg~/dt by Richardson differences in t of the metric itself
    auto metric_at = [&](double tt) { return frame(tt).first; };
    auto dt = [&](double h) {
        Sym2 a = metric_at(t + h), b = metric_at(t - h);
        return Sym2{(a.ss - b.ss) / (2 * h), (a.st - b.st) / (2 * h), (a.tt - b.tt) / (2 * h)};
    };
    Sym2 D1 = dt(delta), D2 = dt(delta / 2);
    r.dgdt = {(4 * D2.ss - D1.ss) / 3, (4 * D2.st - D1.st) / 3, (4 * D2.tt - D1.tt) / 3};
    r.linear_residual = std::max({std::abs(gt.ss - (r.g.ss - 2 * r.h.ss * t)),
                                  std::abs(gt.st - (r.g.st - 2 * r.h.st * t)),
                                  std::abs(gt.tt - (r.g.tt - 2 * r.h.tt * t))});
    r.remainder_ratio = t != 0 ? r.linear_residual / (t * t) : 0.0;
    r.christoffel_residual = std::max({std::abs(gam.ss + r.dgdt.ss / 2), std::abs(gam.st + r.dgdt.st / 2),
                                       std::abs(gam.tt + r.dgdt.tt / 2)});
    auto [g0, gam0] = frame(0.0);
    r.gamma_at_zero_residual = std::max({std::abs(gam0.ss - r.h.ss), std::abs(gam0.st - r.h.st),
                                         std::abs(gam0.tt - r.h.tt)});
    return r;
}

// ---------------------------------------------------------------------------
// Sampled immersions and their numerical mean curvature.

struct ImmersionGrid {
    std::vector<double> u, v;   // parameter grids (uniform)
    bool periodic_v = true;     // v periodic on [0, 2 pi)
    Eigen::MatrixXd X, Y, Z;    // rows over u, columns over v
};

struct NormalGraphField {
    CylinderGrid grid;
    Eigen::MatrixXd w;
};

inline ImmersionGrid catenoid_immersion(const CatenoidParams& p, const std::vector<double>& s,
                                        const std::vector<double>& theta) {
    ImmersionGrid g{s, theta, true, {}, {}, {}};
    const auto ns = static_cast<Eigen::Index>(s.size()), nt = static_cast<Eigen::Index>(theta.size());
    g.X.resize(ns, nt);
    g.Y.resize(ns, nt);
    g.Z.resize(ns, nt);
    for (Eigen::Index i = 0; i < ns; ++i)
        for (Eigen::Index j = 0; j < nt; ++j) {
            auto r = immerse_uhp_t<double>(p, s[i], theta[j]);
            g.X(i, j) = r[0];
            g.Y(i, j) = r[1];
            g.Z(i, j) = r[2];
        }
    return g;
}

// Y(s, theta) = exp_X(w nu) over the catenoid.
inline ImmersionGrid normal_graph_immerse(const CatenoidParams& p, const NormalGraphField& f) {
    const CylinderGrid& cg = f.grid;
    require(f.w.rows() == cg.ns() && f.w.cols() == cg.nt(), ErrorKind::precondition, "field shape mismatch");
    require(f.w.cwiseAbs().maxCoeff() < tube_radius, ErrorKind::out_of_tube, "|w| must stay below 1/4");
    ImmersionGrid g{cg.s, cg.theta, true, {}, {}, {}};
    g.X.resize(cg.ns(), cg.nt());
    g.Y.resize(cg.ns(), cg.nt());
    g.Z.resize(cg.ns(), cg.nt());
    for (Eigen::Index i = 0; i < cg.ns(); ++i)
        for (Eigen::Index j = 0; j < cg.nt(); ++j) {
            const LocalGeometry lg = catenoid_geometry(p, cg.s[i], cg.theta[j]);
            const TangentVector& n = lg.normal;
            // base point from the same evaluation as catenoid_immersion, so w = 0 reproduces it exactly
            const auto b = immerse_uhp_t<double>(p, cg.s[i], cg.theta[j]);
            auto r = exp_map_t<double>(b[0], b[1], b[2], n.vx, n.vy, n.vz, f.w(i, j));
            g.X(i, j) = r[0];
            g.Y(i, j) = r[1];
            g.Z(i, j) = r[2];
        }
    return g;
}

inline void export_immersion(const ImmersionGrid& g, MeshFormat fmt, Model model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot open " + path);
    const auto nu = static_cast<Eigen::Index>(g.u.size()), nv = static_cast<Eigen::Index>(g.v.size());
    char buf[512];
    if (fmt == MeshFormat::obj) {
        for (Eigen::Index i = 0; i < nu; ++i)
            for (Eigen::Index j = 0; j < nv; ++j) {
                auto c = model_coords({g.X(i, j), g.Y(i, j), g.Z(i, j)}, model);
                std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", c[0], c[1], c[2]);
                out << buf;
            }
        auto id = [&](Eigen::Index i, Eigen::Index j) { return i * nv + j + 1; };
        for (Eigen::Index i = 0; i + 1 < nu; ++i)
            for (Eigen::Index j = 0; j + 1 < nv + (g.periodic_v ? 1 : 0); ++j) {
                const Eigen::Index jn = (j + 1) % nv;
                out << "f " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, jn) << '\n';
                out << "f " << id(i, j) << ' ' << id(i + 1, jn) << ' ' << id(i, jn) << '\n';
            }
    } else {
        out << "u,v,x,y,z\n";
        for (Eigen::Index i = 0; i < nu; ++i)
            for (Eigen::Index j = 0; j < nv; ++j) {
                auto c = model_coords({g.X(i, j), g.Y(i, j), g.Z(i, j)}, model);
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", g.u[i], g.v[j], c[0], c[1], c[2]);
                out << buf;
            }
    }
    if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

// H = trace(g^{-1} h)/2 from 4th-order differences in u and spectral (or
// 4th-order) differences in v.
inline Eigen::MatrixXd numerical_mean_curvature(const ImmersionGrid& g) {
    const auto nu = static_cast<int>(g.u.size()), nv = static_cast<int>(g.v.size());
    const double hu = (g.u.back() - g.u.front()) / (nu - 1);
    Eigen::MatrixXd Du1 = fd_matrix(nu, hu, 1), Du2 = fd_matrix(nu, hu, 2);
    Eigen::MatrixXd Dv1, Dv2;
    if (g.periodic_v) {
        Dv1 = fourier_d1(nv);
        Dv2 = fourier_d2(nv);
    } else {
        const double hv = (g.v.back() - g.v.front()) / (nv - 1);
        Dv1 = fd_matrix(nv, hv, 1);
        Dv2 = fd_matrix(nv, hv, 2);
    }
    std::array<const Eigen::MatrixXd*, 3> C{&g.X, &g.Y, &g.Z};
    std::array<Eigen::MatrixXd, 3> Cu, Cv, Cuu, Cuv, Cvv;
    for (int k = 0; k < 3; ++k) {
        Cu[k] = Du1 * (*C[k]);
        Cuu[k] = Du2 * (*C[k]);
        Cv[k] = (*C[k]) * Dv1.transpose();
        Cvv[k] = (*C[k]) * Dv2.transpose();
        Cuv[k] = Cu[k] * Dv1.transpose();
    }
    Eigen::MatrixXd H(nu, nv);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            auto at = [&](const std::array<Eigen::MatrixXd, 3>& M) {
                return std::array<double, 3>{M[0](i, j), M[1](i, j), M[2](i, j)};
            };
            std::array<double, 3> X{g.X(i, j), g.Y(i, j), g.Z(i, j)};
            H(i, j) = local_geometry_from_derivatives(X, at(Cu), at(Cv), at(Cuu), at(Cuv), at(Cvv)).mean_curvature;
        }
    return H;
}

// Q(w) = H(w) - H(0) - J w / 2 with J = prefactor * (L + 2 sech^2). The
// factor 1/2 reflects H = trace/2; subtracting the discrete H(0) removes the
// discretisation bias of the base surface so that Q(0) = 0 exactly.
class RemainderEvaluator {
public:
    RemainderEvaluator(const CatenoidParams& p, const CylinderGrid& g) : p_(p), g_(g) {
        H0_ = numerical_mean_curvature(catenoid_immersion(p, g.s, g.theta));
        pref_.resize(g.ns(), g.nt());
        for (Eigen::Index i = 0; i < g.ns(); ++i)
            for (Eigen::Index j = 0; j < g.nt(); ++j) pref_(i, j) = jacobi_prefactor(p, g.s[i], g.theta[j]);
    }

    Eigen::MatrixXd mean_curvature(const Eigen::MatrixXd& w) const {
        return numerical_mean_curvature(normal_graph_immerse(p_, {g_, w}));
    }

    Eigen::MatrixXd operator()(const Eigen::MatrixXd& w) const {
        Eigen::MatrixXd Jw = pref_.cwiseProduct(apply_L(p_, g_, w, true));
        return mean_curvature(w) - H0_ - 0.5 * Jw;
    }

    const Eigen::MatrixXd& base_mean_curvature() const { return H0_; }
    const Eigen::MatrixXd& prefactor() const { return pref_; }
    const CylinderGrid& grid() const { return g_; }
    const CatenoidParams& params() const { return p_; }

private:
    CatenoidParams p_;
    CylinderGrid g_;
    Eigen::MatrixXd H0_, pref_;
};

inline Eigen::MatrixXd nonlinear_remainder_Q(const CatenoidParams& p, const NormalGraphField& w) {
    return RemainderEvaluator(p, w.grid)(w.w);
}

} // namespace hrcmc
