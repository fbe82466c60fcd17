#pragma once

// Verification suites: each runs a module's invariants and worked examples and
// records one line per check. Reports are deterministic for a given config.

#include "catenoid.hpp"
#include "core.hpp"
#include "end_solver.hpp"
#include "fermi.hpp"
#include "geometry_hr.hpp"
#include "graph_solver.hpp"
#include "jacobi_spectral.hpp"
#include "numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace hrcmc {

// All tolerances and defaults in one place.
struct VerifyConfig {
    double alpha = 4;            // geometry, catenoid, fermi, spectral
    double epsilon = 0.05;       // linear, end, graph
    int modes = 32;              // cross-sectional Galerkin size
    int grid = 128;              // surface grid per direction
    double s_max_offset = 8;     // end grid is [S, S + s_max_offset]
    int end_ns = 257, end_nt = 64;
    double end_tol = 1e-7;
    int graph_n = 128;           // graph grid spacing r / graph_n
    unsigned seed = 20240611;
    bool timing = false;         // runtime in reports breaks byte-identical output

    // acceptance thresholds
    double tol_cmc = 1e-5;
    double tol_closed_form = 1e-5;
    double tol_gauss_equation = 1e-6;
    double tol_lambda0 = 1e-10;
    double tol_lambda1 = 1e-8;
    double bound_alpha4 = 2.0;   // alpha^4 |lambda_n + n^2 + n^2 alpha^{-2}/2|, n = 2..4
    double tol_jacobi = 1e-7;
    double tol_exponent = 1e-3;
    double tol_linear = 1e-7;
    double tol_closed_green = 1e-8;
    double tol_flat_oracle = 1e-8;
    double tol_end_H = 1e-4;
    double max_contraction = 0.5;
    int max_end_iterations = 20;
    double tol_graph = 1e-8;
    double tol_sigma = 1e-8;
    double bound_horocylinder = 10;

#define HRCMC_CONFIG_FIELDS(X)                                                                                  \
    X(alpha) X(epsilon) X(modes) X(grid) X(s_max_offset) X(end_ns) X(end_nt) X(end_tol) X(graph_n) X(seed)      \
    X(timing) X(tol_cmc) X(tol_closed_form) X(tol_gauss_equation) X(tol_lambda0) X(tol_lambda1) X(bound_alpha4) \
    X(tol_jacobi) X(tol_exponent) X(tol_linear) X(tol_closed_green) X(tol_flat_oracle) X(tol_end_H)             \
    X(max_contraction) X(max_end_iterations) X(tol_graph) X(tol_sigma) X(bound_horocylinder)

    // Missing keys keep their defaults; unknown keys are rejected.
    static VerifyConfig from_json(const nlohmann::json& j) {
        require(j.is_object(), ErrorKind::config, "config must be a JSON object");
        VerifyConfig c;
        static const std::vector<std::string> known{
#define HRCMC_NAME(name) #name,
            HRCMC_CONFIG_FIELDS(HRCMC_NAME)
#undef HRCMC_NAME
        };
        for (const auto& [k, v] : j.items())
            require(std::find(known.begin(), known.end(), k) != known.end(), ErrorKind::config, "unknown config key " + k);
        try {
#define HRCMC_GET(name) \
    if (j.contains(#name)) j.at(#name).get_to(c.name);
            HRCMC_CONFIG_FIELDS(HRCMC_GET)
#undef HRCMC_GET
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::config, std::string("bad config value: ") + e.what());
        }
        return c;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
#define HRCMC_PUT(name) j[#name] = name;
        HRCMC_CONFIG_FIELDS(HRCMC_PUT)
#undef HRCMC_PUT
        return j;
    }
#undef HRCMC_CONFIG_FIELDS

    EndConfig end_config() const {
        EndConfig e;
        e.n_modes = modes;
        e.ns = end_ns;
        e.nt = end_nt;
        e.s_max_offset = s_max_offset;
        e.tol = end_tol;
        return e;
    }
};

struct CheckRecord {
    std::string tag;       // short name of the property checked
    std::string quantity;
    double computed = 0;
    double bound = 0;      // expected value or bound
    std::string relation;  // "<=", ">=", "in", "=="
    bool pass = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckRecord> checks;
    double runtime = 0;
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
    void le(std::string tag, std::string q, double v, double b) {
        checks.push_back({std::move(tag), std::move(q), v, b, "<=", std::isfinite(v) && v <= b});
    }
    void ge(std::string tag, std::string q, double v, double b) {
        checks.push_back({std::move(tag), std::move(q), v, b, ">=", std::isfinite(v) && v >= b});
    }
    void truth(std::string tag, std::string q, bool ok) {
        checks.push_back({std::move(tag), std::move(q), ok ? 1.0 : 0.0, 1.0, "==", ok});
    }
    void fail(std::string tag, const std::string& what) {
        checks.push_back({std::move(tag), "error: " + what, std::nan(""), 0, "==", false});
    }
};

inline nlohmann::ordered_json to_json(const SuiteReport& r, bool timing = false) {
    nlohmann::ordered_json j;
    j["suite"] = r.suite;
    j["pass"] = r.pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
        nlohmann::ordered_json x;
        x["tag"] = c.tag;
        x["quantity"] = c.quantity;
        x["computed"] = std::isfinite(c.computed) ? nlohmann::ordered_json(c.computed) : nlohmann::ordered_json();
        x["relation"] = c.relation;
        x["bound"] = c.bound;
        x["pass"] = c.pass;
        arr.push_back(x);
    }
    j["checks"] = arr;
    if (timing) j["runtime_s"] = r.runtime;
    return j;
}

// ---------------------------------------------------------------------------
// Shared computations, also used by the sweeps and the acceptance harness.

struct CatenoidGridErrors {
    double H = 0;            // max |H - 1/2| over interior rows
    double metric = 0;       // relative, FD metric vs closed form
    double gauss_fd = 0;     // relative, Brioschi K from the closed-form metric vs K_Sigma
    double ambient = 0;      // |K_amb closed form - sectional curvature of the tangent plane|
    double gauss_equation = 0;
    double kappa_sum = 0;
};

// Brioschi formula for the Gauss curvature from E, F, G and their derivatives
// up to second order, taken by fourth-order central differences.
inline double brioschi(const std::function<Sym2(double, double)>& m, double s, double t, double h = 1e-2) {
    auto d = [&](auto f, int ds, int dt) {
        auto val = [&](double a, double b) { return f(m(a, b)); };
        const double c[5] = {1.0 / 12, -2.0 / 3, 0, 2.0 / 3, -1.0 / 12};
        const double c2[5] = {-1.0 / 12, 4.0 / 3, -2.5, 4.0 / 3, -1.0 / 12};
        double v = 0;
        if (ds == 1 && dt == 0)
            for (int k = 0; k < 5; ++k) v += c[k] * val(s + (k - 2) * h, t) / h;
        else if (ds == 0 && dt == 1)
            for (int k = 0; k < 5; ++k) v += c[k] * val(s, t + (k - 2) * h) / h;
        else if (ds == 2)
            for (int k = 0; k < 5; ++k) v += c2[k] * val(s + (k - 2) * h, t) / (h * h);
        else if (dt == 2)
            for (int k = 0; k < 5; ++k) v += c2[k] * val(s, t + (k - 2) * h) / (h * h);
        else
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b) v += c[a] * c[b] * val(s + (a - 2) * h, t + (b - 2) * h) / (h * h);
        return v;
    };
    auto E = [](const Sym2& x) { return x.ss; };
    auto F = [](const Sym2& x) { return x.st; };
    auto G = [](const Sym2& x) { return x.tt; };
    const Sym2 g = m(s, t);
    const double Eu = d(E, 1, 0), Ev = d(E, 0, 1), Fu = d(F, 1, 0), Fv = d(F, 0, 1), Gu = d(G, 1, 0),
                 Gv = d(G, 0, 1);
    const double Evv = d(E, 0, 2), Guu = d(G, 2, 0), Fuv = d(F, 1, 1);
    Eigen::Matrix3d A, B;
    A << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev, Fv - 0.5 * Gu, g.ss, g.st, 0.5 * Gv, g.st, g.tt;
    B << 0, 0.5 * Ev, 0.5 * Gu, 0.5 * Ev, g.ss, g.st, 0.5 * Gu, g.st, g.tt;
    const double det = g.ss * g.tt - g.st * g.st;
    return (A.determinant() - B.determinant()) / (det * det);
}

inline CatenoidGridErrors catenoid_grid_errors(const CatenoidParams& p, int n, double s_half = 3) {
    CatenoidGridErrors e;
    std::vector<double> s = uniform_grid(-s_half, s_half, n), th = periodic_grid(n);
    ImmersionGrid ig = catenoid_immersion(p, s, th);
    Eigen::MatrixXd H = numerical_mean_curvature(ig);
    e.H = (H.middleRows(2, n - 4).array() - 0.5).abs().maxCoeff();
    // FD metric: fourth-order in s, spectral in theta
    const double hs = s[1] - s[0];
    Eigen::MatrixXd Ds = fd_matrix(n, hs, 1), Dt = fourier_d1(n).transpose();
    Eigen::MatrixXd Xs = Ds * ig.X, Ys = Ds * ig.Y, Zs = Ds * ig.Z;
    Eigen::MatrixXd Xt = ig.X * Dt, Yt = ig.Y * Dt, Zt = ig.Z * Dt;
    for (int i = 2; i < n - 2; ++i)
        for (int j = 0; j < n; ++j) {
            const double y = ig.Y(i, j);
            const double E = (Xs(i, j) * Xs(i, j) + Ys(i, j) * Ys(i, j)) / (y * y) + Zs(i, j) * Zs(i, j);
            const double F = (Xs(i, j) * Xt(i, j) + Ys(i, j) * Yt(i, j)) / (y * y) + Zs(i, j) * Zt(i, j);
            const double G = (Xt(i, j) * Xt(i, j) + Yt(i, j) * Yt(i, j)) / (y * y) + Zt(i, j) * Zt(i, j);
            const Sym2 c = metric_closed_form(p, s[i], th[j]);
            const double scale = std::max({std::abs(c.ss), std::abs(c.tt), 1e-300});
            e.metric = std::max({e.metric, std::abs(E - c.ss) / scale, std::abs(F - c.st) / scale,
                                 std::abs(G - c.tt) / scale});
        }
    // curvature identities on a coarser subset of nodes
    auto metric = [&](double a, double b) { return metric_closed_form(p, a, b); };
    for (int i = 4; i < n - 4; i += 4)
        for (int j = 0; j < n; j += 4) {
            const LocalGeometry lg = catenoid_geometry(p, s[i], th[j]);
            const double K = intrinsic_curvature(p, s[i], th[j]);
            const double Kb = brioschi(metric, s[i], th[j]);
            e.gauss_fd = std::max(e.gauss_fd, std::abs(Kb - K) / std::max(1.0, std::abs(K)));
            TangentVector a{lg.point, lg.Xs[0], lg.Xs[1], lg.Xs[2]}, b{lg.point, lg.Xt[0], lg.Xt[1], lg.Xt[2]};
            const double Ka = sectional_curvature_of_plane(a, b);
            e.ambient = std::max(e.ambient, std::abs(Ka - ambient_sectional(s[i], th[j])));
            e.gauss_equation = std::max(e.gauss_equation, std::abs(K - (Ka + lg.kappa1 * lg.kappa2)));
            e.kappa_sum = std::max(e.kappa_sum, std::abs(lg.kappa1 + lg.kappa2 - 1));
        }
    return e;
}

// max over r in [1/2, 2] and a few directions of |g - limit| / (eps log eps)^2
inline double horocylinder_ratio(double eps) {
    const CatenoidParams p = CatenoidParams::from_epsilon(eps);
    std::vector<double> r = uniform_grid(0.5, 2.0, 7), gam = {0.3, 0.8, 1.3};
    HorizontalGraphSamples hg = horizontal_graph_extract(p, r, gam);
    double m = 0;
    const double scale = std::pow(eps * std::log(eps), 2);
    for (size_t i = 0; i < r.size(); ++i)
        for (size_t j = 0; j < gam.size(); ++j)
            m = std::max(m, std::abs(hg.g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                     horocylinder_limit(eps, r[i])) /
                                scale);
    return m;
}

inline double scaled_lambda_residual(const SpectralBasis& b, int n) {
    const double a2 = b.params.inv_alpha2();
    return std::abs(b.lambdas[n] + n * n + 0.5 * n * n * a2) / (a2 * a2);
}

// Sandwich check; for t < 0 the two comparison solutions swap roles.
inline bool comparison_sandwich(double kappa, const Comparison& c, double t, double slack = 1e-9) {
    const double lo = t >= 0 ? c.lower : c.upper, hi = t >= 0 ? c.upper : c.lower;
    return kappa >= lo - slack && kappa <= hi + slack;
}

struct RiccatiSummary {
    int nodes = 0, sandwich_ok = 0;
    double sigma1 = 0, sigma2_variation = 0;
};

inline RiccatiSummary riccati_nodes(const CatenoidParams& p, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> us(0, 4), ut(0, 2 * pi), uT(-tube_radius, tube_radius);
    const double S = truncation_S(p.epsilon);
    RiccatiSummary out;
    for (int k = 0; k < count; ++k) {
        const double s = S + us(rng), th = ut(rng), t = uT(rng);
        const TubularState st0 = tubular_curvatures(p, s, th, 0.0);
        const TubularState st = tubular_curvatures(p, s, th, t);
        const Comparison c1 = riccati_comparison(st0.kappa1_t, t), c2 = riccati_comparison(st0.kappa2_t, t);
        ++out.nodes;
        if (comparison_sandwich(st.kappa1_t, c1, t) && comparison_sandwich(st.kappa2_t, c2, t)) ++out.sandwich_ok;
        out.sigma1 = std::max({out.sigma1, std::abs(st.sigma1), std::abs(st0.sigma1)});
        out.sigma2_variation = std::max(out.sigma2_variation, std::abs(st.sigma2 - st0.sigma2));
    }
    return out;
}

// max over the six fields of the interior residual of L_eps, relative to the
// field's magnitude on the grid
inline double jacobi_field_residual(const CatenoidParams& p, int ns = 481, int nt = 64, double half = 3) {
    CylinderGrid g = make_cylinder_grid(-half, half, ns, nt);
    double worst = 0;
    for (const auto& f : jacobi_fields(p)) {
        Eigen::MatrixXd u = g.sample(f.f);
        Eigen::MatrixXd r = apply_L(p, g, u, true);
        const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
        worst = std::max(worst, r.middleRows(4, ns - 8).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

// log-slope fits of the integrated v_minus and v_plus on [6, 12]
inline std::pair<double, double> v_exponents(double eps) {
    std::vector<double> s = uniform_grid(6, 12, 25);
    JacobiFieldSamples js = integrate_v(eps, s);
    std::vector<double> lm, lp;
    for (size_t i = 0; i < s.size(); ++i) {
        lm.push_back(std::log(std::abs(js.v_minus[i])));
        lp.push_back(std::log(std::abs(js.v_plus[i])));
    }
    // the sech^2 term adds a relative correction of order e^{-2s}
    return {fit_slope(s, lm), fit_slope(s, lp)};
}

struct LinearChecks {
    double closed_form = 0, l_residual = 0, green_trace = 0, poisson_trace = 0, flat_oracle = 0;
};

inline LinearChecks linear_checks(const CatenoidParams& p, const EndConfig& cfg) {
    LinearChecks out;
    EndProblem ep(p, cfg);
    const CylinderGrid& g = ep.grid();
    const Eigen::MatrixXd& Psi = ep.projector().samples();
    for (int n : {2, 3, 5}) {
        Eigen::MatrixXd f(g.ns(), g.nt());
        for (Eigen::Index i = 0; i < g.ns(); ++i) f.row(i) = std::exp(-2 * g.s[i]) * Psi.col(n).transpose();
        GreenResult G = green_op_detail(ep, f);
        for (Eigen::Index i = 0; i < g.ns(); ++i)
            out.closed_form = std::max(
                out.closed_form, std::abs(G.modes(i, n) - green_exponential_closed(ep.basis().gammas[n], ep.S(), g.s[i])));
    }
    // general right-hand side mixing several modes
    Eigen::MatrixXd f(g.ns(), g.nt());
    for (Eigen::Index i = 0; i < g.ns(); ++i)
        for (Eigen::Index j = 0; j < g.nt(); ++j) {
            const double s = g.s[i], th = g.theta[j], sh = sech(s);
            f(i, j) = sh * sh * (0.3 + std::cos(2 * th) + 0.5 * std::sin(th) * std::sin(th) * std::cos(4 * th)) *
                      (1 + 0.2 * std::sin(s));
        }
    GreenResult G = green_op_detail(ep, f);
    Eigen::MatrixXd r = apply_L(p, g, G.u.values, false) - f;
    out.l_residual = r.middleRows(4, g.ns() - 8).cwiseAbs().maxCoeff();
    out.green_trace = G.modes.row(0).tail(ep.basis().n_modes - 2).cwiseAbs().maxCoeff();
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(ep.basis().n_modes);
    phi[2] = 1e-3;
    phi[3] = -4e-4;
    phi[6] = 2e-4;
    WeightedField w = poisson_op(ep, phi);
    out.poisson_trace = (w.values.row(0).transpose() - boundary_samples(ep, phi)).cwiseAbs().maxCoeff();
    // flat model against the literal double-integral formulas
    EndConfig fc = cfg;
    fc.mu = -1.5;
    EndProblem fp = EndProblem::flat(p, fc);
    const CylinderGrid& fg = fp.grid();
    for (int n = 0; n < 5; ++n) {
        Eigen::VectorXd fn(fg.ns());
        Eigen::MatrixXd F(fg.ns(), fg.nt());
        for (Eigen::Index i = 0; i < fg.ns(); ++i) {
            fn[i] = std::exp(-2 * fg.s[i]) * std::cos(3 * fg.s[i]);
            F.row(i) = fn[i] * fp.projector().samples().col(n).transpose();
        }
        GreenResult Gf = green_op_detail(fp, F);
        Eigen::VectorXd o = flat_green_oracle(fn, n, -1.5, fg.s[0], fg.hs, 2.0);
        out.flat_oracle = std::max(out.flat_oracle, (Gf.modes.col(n) - o).cwiseAbs().maxCoeff());
    }
    return out;
}

inline Eigen::VectorXd psi2_boundary_data(const EndProblem& ep, double eps) {
    const double n2 = boundary_norm(ep.projector().samples().col(2));
    return mode_coefficients(ep, 2, eps * eps / n2);
}

struct GraphChecks {
    double const_exact = 0;      // max |M(c) - 1| over several constants
    double jacobian_vs_laplacian = 0;
    int annulus_newton_steps = 0;
    double annulus_residual = 0;
    double quadratic_constant = 0; // max r_{k+1} / r_k^2 over steps above the roundoff floor
    bool max_principle = false;
    double seed_difference = 0;
    double harmonic_dn = 0;
    double linearization = 0;
    double catenoid_patch = 0;
};

inline double sparse_max_abs(const Eigen::SparseMatrix<double>& A) {
    double m = 0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

inline GraphChecks graph_checks(double eps, int n) {
    GraphChecks out;
    const double r = 1, rin = 0.3;
    PlanarDomain d(r, {{0.0, rin}}, r / n);
    for (double c : {0.05, 0.3, 1.7}) {
        // boundary values are stored as 1 + psi; the constant must be the same double
        const double psi = c - 1;
        GraphStencils st(d, DirichletData::constant(psi, {psi}));
        Eigen::VectorXd g = Eigen::VectorXd::Constant(d.unknowns(), 1 + psi);
        out.const_exact = std::max(out.const_exact, (mean_curvature_graph(st, g).array() - 1).abs().maxCoeff());
    }
    {
        GraphStencils st(d, DirichletData::constant(0, {0.0}));
        out.jacobian_vs_laplacian =
            sparse_max_abs(graph_jacobian(st, Eigen::VectorXd::Ones(d.unknowns())) - st.laplacian());
    }
    const double psi_out = eps * std::abs(std::log(eps));
    const DirichletData data = DirichletData::constant(psi_out, {0.0});
    GraphSolution sol = solve_dirichlet(d, data);
    out.annulus_newton_steps = sol.newton_steps;
    out.annulus_residual = sol.residuals.back();
    for (size_t k = 1; k < sol.residuals.size(); ++k)
        if (sol.residuals[k] > 1e-8)
            out.quadratic_constant = std::max(out.quadratic_constant, sol.residuals[k] / std::pow(sol.residuals[k - 1], 2));
    out.max_principle = sol.gf.g.minCoeff() >= 1 - 1e-12 && sol.gf.g.maxCoeff() <= 1 + psi_out + 1e-12;
    GraphConfig cc;
    cc.seed = GraphSeed::constant;
    out.seed_difference = (solve_dirichlet(d, data, cc).gf.g - sol.gf.g).cwiseAbs().maxCoeff();
    // harmonic oracle: 1 + psi_out log(rho / rin) / log(r / rin) on a finer grid
    {
        PlanarDomain df(r, {{0.0, rin}}, r / (2 * n));
        GraphFunction hf{&df, harmonic_seed(df, data), data};
        const double B = psi_out / std::log(r / rin);
        for (int c = 0; c < 2; ++c) {
            const double exact = c == 0 ? -B / r : B / rin;
            for (double v : boundary_derivative(hf, c).value) out.harmonic_dn = std::max(out.harmonic_dn, std::abs(v - exact));
        }
    }
    // (M(1 + t x^2) - 1)/t = 2 + O(t^2) at an interior point, Richardson in t^2
    {
        const double h = 1e-2;
        auto D = [&](double t) {
            Eigen::MatrixXd g(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int k = 0; k < 3; ++k) {
                    const double x = 0.3 + (i - 1) * h;
                    g(i, k) = 1 + t * x * x;
                }
            return (mean_curvature_patch(g, h)(1, 1) - 1) / t;
        };
        const double t = 1e-2;
        out.linearization = std::abs((4 * D(t / 2) - D(t)) / 3 - 2);
    }
    // a patch of the catenoid written as a horizontal graph
    {
        const CatenoidParams p = CatenoidParams::from_epsilon(eps);
        const int m = 21;
        const double h = 0.01;
        Eigen::MatrixXd g(m, m);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                const double x = 0.6 + h * (i - 10), z = 0.5 + h * (k - 10);
                auto [s, th] = invert_xz(p, std::hypot(x, z), std::atan2(x, z));
                g(i, k) = immerse_uhp(p, s, th).y;
            }
        Eigen::MatrixXd M = mean_curvature_patch(g, h);
        out.catenoid_patch = (M.block(1, 1, m - 2, m - 2).array() - 1).abs().maxCoeff();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Suites.

inline void suite_geometry(SuiteReport& rep, const VerifyConfig& cfg) {
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1, 1);
    double exp_err = 0, speed_err = 0, iso_err = 0, round_err = 0, ric_err = 0;
    bool range_ok = true;
    for (int k = 0; k < 8; ++k) {
        UhpPoint p{u(rng), 1.5 + u(rng), u(rng)};
        TangentVector v{p, u(rng), u(rng), u(rng)};
        // geodesic equation with the Christoffel symbols
        OdeRhs rhs = [](double, const Eigen::VectorXd& y) {
            const Christoffel G = christoffel({y[0], y[1], y[2]});
            Eigen::VectorXd d(6);
            for (int k = 0; k < 3; ++k) {
                d[k] = y[3 + k];
                double acc = 0;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) acc -= G(k, i, j) * y[3 + i] * y[3 + j];
                d[3 + k] = acc;
            }
            return d;
        };
        Eigen::VectorXd y0(6);
        y0 << p.x, p.y, p.z, v.vx, v.vy, v.vz;
        Eigen::VectorXd y = rk45(rhs, 0, y0, 1.3, 1e-12, 1e-14);
        UhpPoint q = exp_map(p, v, 1.3);
        exp_err = std::max({exp_err, std::abs(q.x - y[0]), std::abs(q.y - y[1]), std::abs(q.z - y[2])});
        speed_err = std::max(speed_err, std::abs(norm(geodesic_velocity(p, v, 1.3)) - norm(v)));
        for (auto kind : {IsometryKind::parabolic, IsometryKind::dilation, IsometryKind::rotation,
                          IsometryKind::inversion}) {
            const double a = kind == IsometryKind::dilation ? 1.7 : 0.4;
            TangentVector w = push_forward(kind, a, v);
            iso_err = std::max(iso_err, std::abs(norm(w) - norm(v)) / norm(v));
        }
        BallPoint b = uhp_to_ball(p);
        UhpPoint pb = ball_to_uhp(b);
        round_err = std::max({round_err, std::abs(pb.x - p.x), std::abs(pb.y - p.y), std::abs(pb.z - p.z)});
        TangentVector w{p, u(rng), u(rng), u(rng)};
        const double K = sectional_curvature_of_plane(v, w);
        range_ok = range_ok && K >= -1 - 1e-12 && K <= 1e-12;
        const double nn = norm(v);
        TangentVector nu{p, v.vx / nn, v.vy / nn, v.vz / nn};
        ric_err = std::max(ric_err, std::abs(ricci(nu) - (-1 + nu.vz * nu.vz)));
    }
    rep.le("exp-map-geodesic-ode", "max |exp_map - RK45 geodesic|", exp_err, 1e-8);
    rep.le("exp-map-speed", "max | |gamma'(t)| - |v| |", speed_err, 1e-10);
    rep.le("isometry-norms", "max relative change of |v| under isometries", iso_err, 1e-12);
    rep.le("ball-uhp-roundtrip", "max |ball_to_uhp(uhp_to_ball(p)) - p|", round_err, 1e-12);
    rep.truth("sectional-range", "-1 <= K(plane) <= 0 at random planes", range_ok);
    rep.le("ricci-normal", "max |Ric(nu) - (nu_z^2 - 1)|", ric_err, 1e-12);
}

inline void suite_catenoid(SuiteReport& rep, const VerifyConfig& cfg) {
    const CatenoidParams p = CatenoidParams::from_alpha(cfg.alpha);
    const CatenoidGridErrors e = catenoid_grid_errors(p, cfg.grid);
    rep.le("cmc-half", "max |H_FD - 1/2| interior, grid " + std::to_string(cfg.grid), e.H, cfg.tol_cmc);
    rep.le("metric-closed-form", "relative |g_FD - g_closed|", e.metric, cfg.tol_closed_form);
    rep.le("gauss-curvature-brioschi", "relative |K_Brioschi - K_Sigma|", e.gauss_fd, cfg.tol_closed_form);
    rep.le("ambient-sectional", "|K(T Sigma) - K_amb closed form|", e.ambient, cfg.tol_closed_form);
    rep.le("gauss-equation", "|K_Sigma - K_amb - kappa1 kappa2|", e.gauss_equation, cfg.tol_gauss_equation);
    rep.le("principal-sum", "|kappa1 + kappa2 - 1|", e.kappa_sum, 1e-10);
    // profile identities
    const double umax = 1 / cfg.alpha;
    double id = 0;
    for (const auto& ps : integrate_profile(p, umax)) {
        const double dphi = std::sqrt(p.alpha * p.alpha + std::pow(std::cos(ps.phi), 2));
        id = std::max(id, std::abs(dphi * std::cos(ps.phi_star) - p.alpha_star * std::cos(ps.phi)));
    }
    rep.le("profile-identity", "max |phi' cos phi* + alpha* cos phi|", id, 1e-8);
    const CatenoidParams pe = CatenoidParams::from_epsilon(cfg.epsilon);
    rep.le("horocylinder-limit", "|g - (1 - eps log eps + eps log 2r)| / (eps log eps)^2", horocylinder_ratio(pe.epsilon),
           cfg.bound_horocylinder);
}

inline void suite_fermi(SuiteReport& rep, const VerifyConfig& cfg) {
    const CatenoidParams p = CatenoidParams::from_alpha(cfg.alpha);
    const RiccatiSummary rs = riccati_nodes(p, 100, cfg.seed);
    rep.ge("riccati-sandwich", "fraction of 100 random end nodes inside the comparison bounds",
           static_cast<double>(rs.sandwich_ok) / rs.nodes, 1.0);
    rep.le("curvature-operator-sigma1", "max |sigma_1|", rs.sigma1, cfg.tol_sigma);
    rep.le("curvature-operator-sigma2", "max |sigma_2(t) - sigma_2(0)|", rs.sigma2_variation, cfg.tol_sigma);
    const double S = truncation_S(p.epsilon);
    double lin = 0, chr = 0, g0 = 0, ratio = 0;
    for (double s : {0.3, 1.1, S + 0.5})
        for (double th : {0.4, 2.0}) {
            FermiMetricReport fr = fermi_metric_check(p, s, th, 0.05);
            chr = std::max(chr, fr.christoffel_residual);
            g0 = std::max(g0, fr.gamma_at_zero_residual);
            ratio = std::max(ratio, fr.remainder_ratio);
            lin = std::max(lin, fr.linear_residual);
        }
    rep.le("fermi-christoffel", "max |Gamma^3_ij + (1/2) d g~_ij / dt|", chr, 1e-6);
    rep.le("fermi-second-form", "max |Gamma^3_ij(t=0) - h_ij|", g0, 1e-6);
    rep.le("fermi-linear-expansion", "max |g~ - (g - 2 h t)| / t^2 at t = 0.05", ratio, 50);
    CylinderGrid g = make_cylinder_grid(-2, 2, 81, 32);
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(g.ns(), g.nt());
    rep.le("remainder-at-zero", "max |Q(0)|", nonlinear_remainder_Q(p, {g, zero}).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::MatrixXd w = g.sample([](double s, double th) { return 1e-3 * sech(s) * std::cos(2 * th); });
    const double q1 = nonlinear_remainder_Q(p, {g, w}).middleRows(4, g.ns() - 8).cwiseAbs().maxCoeff();
    const double q2 = nonlinear_remainder_Q(p, {g, 0.5 * w}).middleRows(4, g.ns() - 8).cwiseAbs().maxCoeff();
    rep.checks.push_back({"remainder-quadratic", "|Q(w)| / |Q(w/2)|", q1 / q2, 4, "in [3.5, 4.5]",
                          q1 / q2 >= 3.5 && q1 / q2 <= 4.5});
}

inline void suite_spectral(SuiteReport& rep, const VerifyConfig& cfg) {
    const CatenoidParams p = CatenoidParams::from_alpha(cfg.alpha);
    const SpectralBasis b = assemble_cross_section(p, cfg.modes);
    rep.le("lambda0", "|lambda_0|", std::abs(b.lambdas[0]), cfg.tol_lambda0);
    rep.le("lambda1", "|lambda_1 + (1 + eps)^2|", std::abs(b.lambdas[1] + std::pow(1 + p.epsilon, 2)), cfg.tol_lambda1);
    for (int n : {2, 3, 4})
        rep.le("lambda-asymptotics", "alpha^4 |lambda_" + std::to_string(n) + " + n^2 + n^2 alpha^-2 / 2|",
               scaled_lambda_residual(b, n), cfg.bound_alpha4);
    bool ordered = b.gammas[0] <= std::sqrt(cfg.tol_lambda0) && b.gammas[1] > 0 && b.gammas[1] < 2 && b.gammas[2] > 2 &&
                   std::abs(b.gammas[1] - (1 + p.epsilon)) < 1e-8;
    for (int n = 2; n <= 10; ++n) ordered = ordered && b.gammas[n] > n && b.gammas[n] < b.gammas[n + 1];
    rep.truth("indicial-ordering", "0 < 1 + eps < 2 < gamma_2 < gamma_3 < ..., gamma_n > n for n <= 10", ordered);
    rep.le("galerkin-symmetry", "max |T - T^t| / max |T|", b.asymmetry, 1e-12);
    const SpectralBasis bo = assemble_cross_section(p, cfg.modes, Symmetry::odd);
    rep.le("odd-ground", "|lambda_0(odd) + 1|", std::abs(bo.lambdas[0] + 1), 1e-10);
    {
        const int n = 64;
        Eigen::VectorXd f(n), target(n);
        for (int j = 0; j < n; ++j) {
            f[j] = std::sin(2 * pi * j / n);
            target[j] = -f[j];
        }
        rep.le("E-sin", "max |E sin + sin|", (apply_E(f) - target).cwiseAbs().maxCoeff(), 1e-12);
    }
    rep.le("jacobi-fields", "relative interior residual of L on the six fields", jacobi_field_residual(p), cfg.tol_jacobi);
    auto [em, ep] = v_exponents(p.epsilon);
    rep.le("v-minus-exponent", "|slope log v_minus + (1 + eps)|", std::abs(em + 1 + p.epsilon), cfg.tol_exponent);
    rep.le("v-plus-exponent", "|slope log v_plus - (1 + eps)|", std::abs(ep - 1 - p.epsilon), cfg.tol_exponent);
    int near_zero = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& m : kernel_scan(p, 10, 401)) {
        if (m.min_singular < 1e-6) ++near_zero;
        else gap = std::min(gap, m.min_singular);
    }
    rep.truth("kernel-scan", "exactly one near-zero singular value on [-10, 10] (cos theta / cosh s)", near_zero == 1);
    rep.ge("kernel-gap", "smallest other singular value", gap, 1e-3);
}

inline void suite_linear(SuiteReport& rep, const VerifyConfig& cfg) {
    const CatenoidParams p = CatenoidParams::from_epsilon(cfg.epsilon);
    const LinearChecks lc = linear_checks(p, cfg.end_config());
    rep.le("green-closed-form", "max |G e^{-2s} psi_n - closed form|", lc.closed_form, cfg.tol_closed_green);
    rep.le("green-inverse", "max interior |L G f - f|", lc.l_residual, cfg.tol_linear);
    rep.le("green-trace", "max_{n >= 2} |(G f)_n(S)|", lc.green_trace, cfg.tol_linear);
    rep.le("poisson-trace", "max |P phi (S) - phi|", lc.poisson_trace, cfg.tol_linear);
    rep.le("flat-oracle", "max |G_flat f - double-integral oracle|", lc.flat_oracle, cfg.tol_flat_oracle);
    std::vector<double> le, la;
    for (double eps : {0.1, 0.05, 0.025}) {
        EndProblem ep(CatenoidParams::from_epsilon(eps), cfg.end_config());
        le.push_back(std::log(eps));
        la.push_back(std::log(green_amplification(ep)));
    }
    const double slope = fit_slope(le, la);
    rep.checks.push_back({"green-amplification", "fitted exponent of ||G|| vs eps", slope, -1, "in [-1.2, -0.8]",
                          slope >= -1.2 && slope <= -0.8});
}

inline void suite_end(SuiteReport& rep, const VerifyConfig& cfg) {
    const CatenoidParams p = CatenoidParams::from_epsilon(cfg.epsilon);
    EndProblem ep(p, cfg.end_config());
    EndSolution zero = solve_cmc_end(ep, Eigen::VectorXd::Zero(cfg.modes));
    rep.le("end-zero-data", "sup |w| for phi = 0", zero.w.values.cwiseAbs().maxCoeff(), 1e-14);
    EndSolution sol = solve_cmc_end(ep, psi2_boundary_data(ep, p.epsilon));
    rep.le("end-iterations", "Picard iterations", sol.iterations, cfg.max_end_iterations);
    rep.le("end-contraction", "max recorded contraction factor", sol.max_contraction(), cfg.max_contraction);
    rep.le("end-mean-curvature", "interior sup |H - 1/2|", sol.final_H_deviation, cfg.tol_end_H);
    rep.le("end-leakage", "max(|u_0(S)|, |u_1(S)|) / |phi|", std::max(std::abs(sol.leakage0), std::abs(sol.leakage1)) / (p.epsilon * p.epsilon), 1e-2);
    rep.le("end-ball", "||w|| / ||P phi||", sol.w_norm / sol.w0_norm, 1.5);
}

inline void suite_graph(SuiteReport& rep, const VerifyConfig& cfg) {
    const GraphChecks gc = graph_checks(cfg.epsilon, cfg.graph_n);
    rep.le("graph-constants", "max |M(c) - 1| over constants", gc.const_exact, 0);
    rep.le("graph-jacobian", "max |J(1) - Laplacian|", gc.jacobian_vs_laplacian, 1e-12);
    rep.le("graph-annulus-residual", "sup |M(g) - 1|", gc.annulus_residual, cfg.tol_graph);
    rep.le("graph-annulus-steps", "Newton steps", gc.annulus_newton_steps, 6);
    rep.le("graph-quadratic", "max r_{k+1} / r_k^2", gc.quadratic_constant, 10);
    rep.truth("graph-max-principle", "1 <= g <= 1 + psi_out", gc.max_principle);
    rep.le("graph-uniqueness", "max |g(harmonic seed) - g(constant seed)|", gc.seed_difference, 1e-9);
    rep.le("graph-harmonic-dn", "max |d_n u - analytic| (log-radial harmonic)", gc.harmonic_dn, 1e-4);
    rep.le("graph-linearization", "|Richardson (M(1 + t x^2) - 1)/t - 2|", gc.linearization, 1e-6);
    rep.le("graph-catenoid-patch", "max |M - 1| on an extracted catenoid patch", gc.catenoid_patch, 1e-3);
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"geometry", "catenoid", "fermi", "spectral", "linear", "end", "graph"};
    return names;
}

inline SuiteReport run_suite(const std::string& name, const VerifyConfig& cfg) {
    static const std::map<std::string, void (*)(SuiteReport&, const VerifyConfig&)> table{
        {"geometry", suite_geometry}, {"catenoid", suite_catenoid}, {"fermi", suite_fermi},
        {"spectral", suite_spectral}, {"linear", suite_linear},     {"end", suite_end},
        {"graph", suite_graph}};
    SuiteReport rep;
    rep.suite = name;
    const auto t0 = std::chrono::steady_clock::now();
    if (name == "all") {
        for (const auto& n : suite_names()) {
            SuiteReport sub = run_suite(n, cfg);
            for (auto& c : sub.checks) {
                c.tag = n + "/" + c.tag;
                rep.checks.push_back(c);
            }
        }
    } else {
        auto it = table.find(name);
        require(it != table.end(), ErrorKind::config, "unknown suite " + name);
        try {
            it->second(rep, cfg);
        } catch (const std::exception& e) {
            rep.fail(name, e.what());
        }
    }
    std::stable_sort(rep.checks.begin(), rep.checks.end(),
                     [](const CheckRecord& x, const CheckRecord& y) { return x.tag < y.tag; });
    rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// Sweeps: one row per parameter value.

struct SweepTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string csv() const {
        std::ostringstream os;
        os.precision(10);
        for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << "\n";
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << "\n";
        }
        return os.str();
    }
    std::vector<double> column(const std::string& name) const {
        const auto k = static_cast<size_t>(std::find(columns.begin(), columns.end(), name) - columns.begin());
        require(k < columns.size(), ErrorKind::config, "no column " + name);
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r[k]);
        return v;
    }
};

inline SweepTable sweep(const std::string& parameter, const std::vector<double>& values, const std::string& suite,
                        const VerifyConfig& base = {}) {
    require(std::is_sorted(values.begin(), values.end()) || std::is_sorted(values.rbegin(), values.rend()),
            ErrorKind::config, "sweep values must be sorted");
    require(parameter == "alpha" || parameter == "epsilon", ErrorKind::config, "sweep parameter is alpha or epsilon");
    SweepTable t;
    for (double v : values) {
        const CatenoidParams p = parameter == "alpha" ? CatenoidParams::from_alpha(v) : CatenoidParams::from_epsilon(v);
        std::vector<std::pair<std::string, double>> row{{"alpha", p.alpha}, {"epsilon", p.epsilon}};
        if (suite == "spectral") {
            const SpectralBasis b = assemble_cross_section(p, base.modes);
            row.push_back({"lambda0", b.lambdas[0]});
            row.push_back({"lambda1_plus_k2", b.lambdas[1] + std::pow(1 + p.epsilon, 2)});
            for (int n : {2, 3, 4}) row.push_back({"scaled_residual_n" + std::to_string(n), scaled_lambda_residual(b, n)});
            row.push_back({"gamma2", b.gammas[2]});
        } else if (suite == "end") {
            EndProblem ep(p, base.end_config());
            EndSolution s = solve_cmc_end(ep, psi2_boundary_data(ep, p.epsilon));
            row.push_back({"leading_contraction", s.leading_contraction()});
            row.push_back({"max_contraction", s.max_contraction()});
            row.push_back({"contraction_over_eps", s.leading_contraction() / p.epsilon});
            row.push_back({"iterations", s.iterations});
            row.push_back({"final_H_deviation", s.final_H_deviation});
            row.push_back({"amplification", green_amplification(ep)});
        } else if (suite == "linear") {
            EndProblem ep(p, base.end_config());
            row.push_back({"amplification", green_amplification(ep)});
            row.push_back({"amplification_times_eps", green_amplification(ep) * p.epsilon});
        } else if (suite == "catenoid") {
            row.push_back({"horocylinder_ratio", horocylinder_ratio(p.epsilon)});
            row.push_back({"S_eps", truncation_S(p.epsilon)});
        } else {
            throw Error(ErrorKind::config, "no sweep defined for suite " + suite);
        }
        if (t.columns.empty())
            for (auto& [k, x] : row) t.columns.push_back(k);
        std::vector<double> r;
        for (auto& [k, x] : row) r.push_back(x);
        t.rows.push_back(r);
    }
    return t;
}

} // namespace hrcmc
