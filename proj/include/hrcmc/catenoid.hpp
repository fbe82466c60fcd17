#pragma once

// Horizontal catenoids of constant mean curvature 1/2 in H^2 x R, indexed by
// alpha > 0 (equivalently the necksize epsilon = alpha_*/alpha - 1).

#include "autodiff.hpp"
#include "core.hpp"
#include "geometry_hr.hpp"
#include "numerics.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hrcmc {

struct CatenoidParams {
    double alpha = 1, alpha_star = std::sqrt(2.0), epsilon = std::sqrt(2.0) - 1;

    static CatenoidParams from_alpha(double alpha) {
        require(alpha > 0 && std::isfinite(alpha), ErrorKind::precondition, "alpha must be positive");
        double as = std::sqrt(alpha * alpha + 1);
        // alpha_*/alpha - 1 = 1/(alpha (alpha_* + alpha)), without cancellation
        return {alpha, as, 1.0 / (alpha * (as + alpha))};
    }

    static CatenoidParams from_epsilon(double eps) {
        require(eps > 0 && std::isfinite(eps), ErrorKind::precondition, "epsilon must be positive");
        // (1+eps)^2 = 1 + alpha^{-2}
        return from_alpha(1.0 / std::sqrt(eps * (2 + eps)));
    }

    double inv_alpha2() const { return 1.0 / (alpha * alpha); }
};

template <class T>
T phi_prime_t(const CatenoidParams& p, const T& theta) {
    using std::cos;
    using std::sqrt;
    const T c = cos(theta);
    return -sqrt(p.alpha * p.alpha + c * c);
}

inline double phi_prime_of_theta(const CatenoidParams& p, double theta) { return phi_prime_t(p, theta); }

template <class T>
std::array<T, 3> immerse_uhp_t(const CatenoidParams& p, const T& s, const T& theta) {
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::sin;
    const double a = p.alpha, as = p.alpha_star, e = p.epsilon;
    const T pp = phi_prime_t(p, theta);
    const T sn = sin(theta), cs = cos(theta);
    const T ch = cosh(s);
    // e^{-s} cosh s = (1 + e^{-2s})/2 stays bounded for large s
    const T decay = (1.0 + exp(-2.0 * s)) / 2.0;
    const T omega = 1.0 / (1.0 + sn * sn / (as * (a + as) * (a - pp) * (as - pp)) * decay);
    const T y = exp(e * s) * omega;
    const T x = sn / (as * (a - pp)) * ch * y;
    const T z = cs * ch / (a * (a - pp));
    return {x, y, z};
}

inline UhpPoint immerse_uhp(const CatenoidParams& p, double s, double theta) {
    auto r = immerse_uhp_t<double>(p, s, theta);
    return {r[0], r[1], r[2]};
}

inline double omega(const CatenoidParams& p, double s, double theta) {
    const double pp = phi_prime_of_theta(p, theta), sn = std::sin(theta);
    const double a = p.alpha, as = p.alpha_star;
    return 1.0 / (1.0 + sn * sn / (as * (a + as) * (a - pp) * (as - pp)) * (1 + std::exp(-2 * s)) / 2);
}

struct Sym2 {
    double ss = 0, st = 0, tt = 0;

    double det() const { return ss * tt - st * st; }
    double trace() const { return ss + tt; }
};

inline Sym2 metric_closed_form(const CatenoidParams& p, double s, double theta) {
    const double pp = phi_prime_of_theta(p, theta);
    const double ch = std::cosh(s);
    const double gss = ch * ch / (p.alpha * p.alpha * (p.alpha - pp) * (p.alpha - pp));
    return {gss, 0.0, gss * p.alpha * p.alpha / (pp * pp)};
}

inline double ambient_sectional(double s, double theta) {
    const double c = std::cos(theta), ch = std::cosh(s);
    return -c * c / (ch * ch);
}

inline double intrinsic_curvature(const CatenoidParams& p, double s, double theta) {
    const double pp = phi_prime_of_theta(p, theta);
    const double a = p.alpha, am = a - pp;
    const double c = std::cos(theta), sn = std::sin(theta);
    const double sech2 = 1.0 / (std::cosh(s) * std::cosh(s));
    return -a * a * am * am * sech2 *
           (sech2 + p.inv_alpha2() * (sn * sn * c * c / (am * am) - pp / am * (2 * c * c - 1)));
}

// Roots of k^2 - k + (K_Sigma - K_amb) = 0, larger first.
inline std::pair<double, double> principal_curvatures(const CatenoidParams& p, double s, double theta) {
    const double d = intrinsic_curvature(p, s, theta) - ambient_sectional(s, theta);
    const double disc = 1 - 4 * d;
    require(disc >= 0, ErrorKind::complex_curvature, "negative discriminant");
    const double r = std::sqrt(disc);
    return {(1 + r) / 2, (1 - r) / 2};
}

inline double truncation_S(double eps) {
    require(eps > 0 && eps < 1, ErrorKind::precondition, "truncation needs 0 < epsilon < 1");
    return std::acosh(1.0 / eps);
}

// Exact local geometry of a parametrised surface at one parameter point.
struct LocalGeometry {
    UhpPoint point;
    std::array<double, 3> Xs{}, Xt{};
    Sym2 first, second;
    TangentVector normal;
    double mean_curvature = 0;
    double kappa1 = 0, kappa2 = 0;
};

inline double dot_g(double y, const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return (a[0] * b[0] + a[1] * b[1]) / (y * y) + a[2] * b[2];
}

// Geometry from first and second coordinate derivatives. The normal is
// G^{-1}(X_s x X_t) normalised, which gives H = +1/2 on the catenoid.
inline LocalGeometry local_geometry_from_derivatives(const std::array<double, 3>& X, const std::array<double, 3>& Xs,
                                                     const std::array<double, 3>& Xt, const std::array<double, 3>& Xss,
                                                     const std::array<double, 3>& Xst,
                                                     const std::array<double, 3>& Xtt) {
    LocalGeometry g;
    const double y = X[1];
    require(y > 0, ErrorKind::invalid_point, "surface point leaves the half plane");
    g.point = {X[0], X[1], X[2]};
    g.Xs = Xs;
    g.Xt = Xt;
    g.first = {dot_g(y, Xs, Xs), dot_g(y, Xs, Xt), dot_g(y, Xt, Xt)};
    require(g.first.det() > 0, ErrorKind::degenerate_immersion, "induced metric is degenerate");
    std::array<double, 3> c{Xs[1] * Xt[2] - Xs[2] * Xt[1], Xs[2] * Xt[0] - Xs[0] * Xt[2],
                            Xs[0] * Xt[1] - Xs[1] * Xt[0]};
    std::array<double, 3> n{c[0] * y * y, c[1] * y * y, c[2]};
    const double nn = std::sqrt(dot_g(y, n, n));
    for (auto& v : n) v /= nn;
    g.normal = {g.point, n[0], n[1], n[2]};
    auto cov = [&](const std::array<double, 3>& d2, const std::array<double, 3>& a, const std::array<double, 3>& b) {
        auto G = christoffel_contract<double>(y, a, b);
        std::array<double, 3> v{d2[0] + G[0], d2[1] + G[1], d2[2] + G[2]};
        return dot_g(y, v, n);
    };
    g.second = {cov(Xss, Xs, Xs), cov(Xst, Xs, Xt), cov(Xtt, Xt, Xt)};
    const Sym2& I = g.first;
    const Sym2& II = g.second;
    const double det = I.det();
    // shape operator S = I^{-1} II
    const double a11 = (I.tt * II.ss - I.st * II.st) / det;
    const double a12 = (I.tt * II.st - I.st * II.tt) / det;
    const double a21 = (-I.st * II.ss + I.ss * II.st) / det;
    const double a22 = (-I.st * II.st + I.ss * II.tt) / det;
    const double tr = a11 + a22, dt = a11 * a22 - a12 * a21;
    g.mean_curvature = tr / 2;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - dt));
    g.kappa1 = tr / 2 + disc;
    g.kappa2 = tr / 2 - disc;
    return g;
}

// Exact derivatives via hyper-dual evaluation of a templated immersion F(T s, T t).
template <class F>
LocalGeometry local_geometry(F&& f, double s, double t) {
    auto ss = f(HyperDual(s, 1, 1, 0), HyperDual(t));
    auto tt = f(HyperDual(s), HyperDual(t, 1, 1, 0));
    auto st = f(HyperDual(s, 1, 0, 0), HyperDual(t, 0, 1, 0));
    std::array<double, 3> X, Xs, Xt, Xss, Xst, Xtt;
    for (int k = 0; k < 3; ++k) {
        X[k] = ss[k].f;
        Xs[k] = ss[k].d1;
        Xss[k] = ss[k].d12;
        Xt[k] = tt[k].d1;
        Xtt[k] = tt[k].d12;
        Xst[k] = st[k].d12;
    }
    return local_geometry_from_derivatives(X, Xs, Xt, Xss, Xst, Xtt);
}

inline LocalGeometry catenoid_geometry(const CatenoidParams& p, double s, double theta) {
    return local_geometry([&](auto a, auto b) { return immerse_uhp_t(p, a, b); }, s, theta);
}

// ---------------------------------------------------------------------------
// Profile curves of the ball-model parametrisation.

struct ProfileSample {
    double u = 0, phi = 0, phi_star = 0, f = 0;
};

inline double profile_f(const CatenoidParams& p, double phi, double phi_star) {
    const double c = std::cos(phi), cs = std::cos(phi_star);
    return (p.alpha * cs - p.alpha_star * c) / (p.alpha * c * cs * cs);
}

inline OdeRhs profile_rhs(const CatenoidParams& p) {
    return [p](double, const Eigen::VectorXd& y) {
        Eigen::VectorXd d(2);
        const double c = std::cos(y[0]), cs = std::cos(y[1]);
        d[0] = -std::sqrt(p.alpha * p.alpha + c * c);
        d[1] = -std::sqrt(p.alpha_star * p.alpha_star - cs * cs);
        return d;
    };
}

inline ProfileSample make_profile_sample(const CatenoidParams& p, double u, const Eigen::VectorXd& y) {
    const double c = std::cos(y[0]), cs = std::cos(y[1]);
    if (std::abs(c) < 1e-10 || std::abs(cs) < 1e-10)
        throw Error(ErrorKind::singular_profile, "cos(phi) vanishes near u = " + std::to_string(u));
    return {u, y[0], y[1], profile_f(p, y[0], y[1])};
}

// Samples at n uniformly spaced u in [-u_max, u_max].
inline std::vector<ProfileSample> integrate_profile(const CatenoidParams& p, double u_max, double tol = 1e-10,
                                                    int n = 201) {
    require(u_max > 0 && tol > 0 && n >= 3, ErrorKind::precondition, "invalid profile request");
    auto rhs = profile_rhs(p);
    std::vector<ProfileSample> out(n);
    const int mid = (n - 1) / 2;
    const double du = 2 * u_max / (n - 1);
    for (int dir : {1, -1}) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(2);
        double u = -u_max + mid * du;
        // integrate outward from the node closest to 0, starting exactly at 0
        y = rk45(rhs, 0.0, y, u, tol, tol * 1e-3);
        out[mid] = make_profile_sample(p, u, y);
        for (int i = mid + dir; i >= 0 && i < n; i += dir) {
            double un = -u_max + i * du;
            y = rk45(rhs, u, y, un, tol, tol * 1e-3);
            u = un;
            out[i] = make_profile_sample(p, u, y);
        }
    }
    return out;
}

inline ProfileSample profile_at(const CatenoidParams& p, double u, double tol = 1e-12) {
    Eigen::VectorXd y = rk45(profile_rhs(p), 0.0, Eigen::VectorXd::Zero(2), u, tol, tol * 1e-3);
    return make_profile_sample(p, u, y);
}

struct BallImmersion {
    double X1, X2, X3;
    BallPoint point;
};

inline BallImmersion immerse_ball_detail(const CatenoidParams& p, double u, double v) {
    const ProfileSample q = profile_at(p, u);
    const double a = p.alpha, as = p.alpha_star;
    const double ca = std::cosh(a * v), sa = std::sinh(a * v);
    const double cs = std::cosh(as * v), ss = std::sinh(as * v);
    const double F = q.f + as / a;
    BallImmersion r;
    r.X1 = ca * std::sin(q.phi_star) * q.f;
    r.X2 = ca * ss * F - cs * sa;
    r.X3 = ca * cs * F - ss * sa;
    require(1 + r.X3 > 0, ErrorKind::out_of_chart, "1 + X3 must be positive");
    const double pp = -std::sqrt(a * a + std::cos(q.phi) * std::cos(q.phi));
    const double z = std::cos(q.phi) * ca / (a * (a - pp));
    r.point = {r.X1 / (1 + r.X3), r.X2 / (1 + r.X3), z};
    return r;
}

inline BallPoint immerse_ball(const CatenoidParams& p, double u, double v) {
    return immerse_ball_detail(p, u, v).point;
}

// ---------------------------------------------------------------------------
// Sampled surfaces.

struct SurfaceGrid {
    CatenoidParams params;
    std::vector<double> s_values, theta_values;
    std::vector<UhpPoint> points;
    std::vector<Sym2> first_form, second_form;
    std::vector<TangentVector> normal;
    std::vector<double> kappa1, kappa2, K_sigma, K_ambient;

    size_t ns() const { return s_values.size(); }
    size_t nt() const { return theta_values.size(); }
    size_t index(size_t i, size_t j) const { return i * nt() + j; }
};

inline std::vector<double> uniform_grid(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

inline std::vector<double> periodic_grid(int n) {
    std::vector<double> v(n);
    for (int j = 0; j < n; ++j) v[j] = 2 * pi * j / n;
    return v;
}

inline SurfaceGrid build_surface_grid(const CatenoidParams& p, std::vector<double> s_values,
                                      std::vector<double> theta_values) {
    SurfaceGrid g;
    g.params = p;
    g.s_values = std::move(s_values);
    g.theta_values = std::move(theta_values);
    const size_t n = g.ns() * g.nt();
    g.points.resize(n);
    g.first_form.resize(n);
    g.second_form.resize(n);
    g.normal.resize(n);
    g.kappa1.resize(n);
    g.kappa2.resize(n);
    g.K_sigma.resize(n);
    g.K_ambient.resize(n);
    for (size_t i = 0; i < g.ns(); ++i)
        for (size_t j = 0; j < g.nt(); ++j) {
            const double s = g.s_values[i], t = g.theta_values[j];
            const size_t k = g.index(i, j);
            LocalGeometry lg = catenoid_geometry(p, s, t);
            g.points[k] = lg.point;
            g.first_form[k] = lg.first;
            g.second_form[k] = lg.second;
            g.normal[k] = lg.normal;
            auto [k1, k2] = principal_curvatures(p, s, t);
            g.kappa1[k] = k1;
            g.kappa2[k] = k2;
            g.K_sigma[k] = intrinsic_curvature(p, s, t);
            g.K_ambient[k] = ambient_sectional(s, t);
        }
    return g;
}

// Length of the theta = 0 curve from the neck s = 0 to the boundary s = S_eps.
inline double neck_to_boundary_distance(const CatenoidParams& p) {
    const double S = truncation_S(p.epsilon);
    const int n = 2001;
    Eigen::VectorXd f(n);
    const double h = S / (n - 1);
    for (int i = 0; i < n; ++i) f[i] = std::sqrt(metric_closed_form(p, i * h, 0.0).ss);
    return cumulative_simpson(f, h)[n - 1];
}

// ---------------------------------------------------------------------------
// The end as a horizontal graph y = g(r, gamma), x = r sin(gamma), z = r cos(gamma).

struct HorizontalGraphSamples {
    std::vector<double> r_values, gamma_values;
    Eigen::MatrixXd g, s, theta; // rows over r, columns over gamma
};

inline std::pair<double, double> invert_xz(const CatenoidParams& p, double r, double gamma) {
    const double tx = r * std::sin(gamma), tz = r * std::cos(gamma);
    double s = std::acosh(std::max(1.0, r / p.epsilon)), th = gamma;
    auto resid = [&](double a, double b) {
        auto X = immerse_uhp_t<double>(p, a, b);
        return std::array<double, 2>{X[0] - tx, X[2] - tz};
    };
    auto rn = resid(s, th);
    double nrm = std::hypot(rn[0], rn[1]);
    for (int it = 0; it < 60 && nrm > 1e-14 * std::max(1.0, r); ++it) {
        auto Ds = immerse_uhp_t<HyperDual>(p, HyperDual(s, 1, 0, 0), HyperDual(th));
        auto Dt = immerse_uhp_t<HyperDual>(p, HyperDual(s), HyperDual(th, 1, 0, 0));
        const double j11 = Ds[0].d1, j12 = Dt[0].d1, j21 = Ds[2].d1, j22 = Dt[2].d1;
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-14 * (std::abs(j11 * j22) + std::abs(j12 * j21)))
            throw Error(ErrorKind::extraction, "patch is not a horizontal graph near r = " + std::to_string(r));
        const double ds = (j22 * rn[0] - j12 * rn[1]) / det;
        const double dt = (-j21 * rn[0] + j11 * rn[1]) / det;
        double lam = 1;
        for (int k = 0; k < 30; ++k, lam /= 2) {
            auto rt = resid(s - lam * ds, th - lam * dt);
            double nt = std::hypot(rt[0], rt[1]);
            if (nt < nrm || k == 29) {
                s -= lam * ds;
                th -= lam * dt;
                rn = rt;
                nrm = nt;
                break;
            }
        }
    }
    if (!(nrm <= 1e-10 * std::max(1.0, r)) || s <= 0)
        throw Error(ErrorKind::extraction, "Newton inversion failed at r = " + std::to_string(r));
    return {s, th};
}

inline HorizontalGraphSamples horizontal_graph_extract(const CatenoidParams& p, const std::vector<double>& r_values,
                                                       const std::vector<double>& gamma_values) {
    HorizontalGraphSamples out;
    out.r_values = r_values;
    out.gamma_values = gamma_values;
    const auto nr = static_cast<Eigen::Index>(r_values.size());
    const auto ng = static_cast<Eigen::Index>(gamma_values.size());
    out.g.resize(nr, ng);
    out.s.resize(nr, ng);
    out.theta.resize(nr, ng);
    for (Eigen::Index i = 0; i < nr; ++i)
        for (Eigen::Index j = 0; j < ng; ++j) {
            auto [s, th] = invert_xz(p, r_values[i], gamma_values[j]);
            out.s(i, j) = s;
            out.theta(i, j) = th;
            out.g(i, j) = immerse_uhp(p, s, th).y;
        }
    return out;
}

// Leading-order horocylinder limit 1 - eps log eps + eps log 2r.
inline double horocylinder_limit(double eps, double r) { return 1 - eps * std::log(eps) + eps * std::log(2 * r); }

// ---------------------------------------------------------------------------
// Mesh export.

enum class MeshFormat { obj, csv };
enum class Model { uhp, ball };

inline std::array<double, 3> model_coords(const UhpPoint& p, Model m) {
    if (m == Model::uhp) return {p.x, p.y, p.z};
    BallPoint b = uhp_to_ball(p);
    return {b.xt, b.yt, b.z};
}

inline void export_mesh(const SurfaceGrid& g, MeshFormat fmt, Model model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot open " + path);
    char buf[512];
    if (fmt == MeshFormat::obj) {
        for (const auto& p : g.points) {
            auto c = model_coords(p, model);
            std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", c[0], c[1], c[2]);
            out << buf;
        }
        // close the seam when theta covers a full period
        const size_t nt = g.nt();
        const bool wrap = nt > 2 && std::abs(g.theta_values[nt - 1] + (g.theta_values[1] - g.theta_values[0]) -
                                             g.theta_values[0] - 2 * pi) < 1e-9;
        for (size_t i = 0; i + 1 < g.ns(); ++i)
            for (size_t j = 0; j + 1 < nt + (wrap ? 1 : 0); ++j) {
                const size_t jn = (j + 1) % nt;
                size_t a = g.index(i, j) + 1, b = g.index(i + 1, j) + 1;
                size_t c = g.index(i + 1, jn) + 1, d = g.index(i, jn) + 1;
                out << "f " << a << ' ' << b << ' ' << c << '\n';
                out << "f " << a << ' ' << c << ' ' << d << '\n';
            }
    } else {
        out << "s,theta,x,y,z,kappa1,kappa2,K_sigma\n";
        for (size_t i = 0; i < g.ns(); ++i)
            for (size_t j = 0; j < g.nt(); ++j) {
                size_t k = g.index(i, j);
                auto c = model_coords(g.points[k], model);
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", g.s_values[i],
                              g.theta_values[j], c[0], c[1], c[2], g.kappa1[k], g.kappa2[k], g.K_sigma[k]);
                out << buf;
            }
    }
    if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

// Rows of a CSV written by export_mesh (header skipped).
inline std::vector<std::array<double, 8>> read_mesh_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path);
    std::vector<std::array<double, 8>> rows;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<double, 8> r{};
        std::stringstream ss(line);
        std::string cell;
        for (int k = 0; k < 8; ++k) {
            if (!std::getline(ss, cell, ',')) throw Error(ErrorKind::io, "short CSV row");
            r[k] = std::strtod(cell.c_str(), nullptr);
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace hrcmc
