#pragma once

// Boundary value problems for L = d_s^2 + d_theta^2 + alpha^{-2} E on the
// truncated end [S_eps, inf) x S^1, solved mode by mode in the eigenbasis of
// the cross-sectional operator, and the fixed-point construction of cmc 1/2
// normal graphs over the end.
//
// Fields are sampled on [S, s_max]. Beyond s_max each mode carries an analytic
// tail u_n(s) = P_n e^{-2(s - s_max)} + R_n e^{-gamma_n (s - s_max)}, which is
// where the slow relaxation of the n = 2 mode lives when gamma_2 is close to 2.

#include "catenoid.hpp"
#include "core.hpp"
#include "fermi.hpp"
#include "jacobi_spectral.hpp"
#include "numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace hrcmc {

struct ModeTail {
    double P = 0, R = 0, gamma = 0;
};

struct WeightedField {
    std::shared_ptr<const CylinderGrid> grid;
    Eigen::MatrixXd values;          // ns x ntheta
    double mu = -2;
    int k = 0;                       // derivative order in the norm
    std::vector<ModeTail> tail;      // empty when no tail is attached
    std::shared_ptr<const Eigen::MatrixXd> tail_psi; // ntheta x modes, eigenfunction samples

    WeightedField with_order(int order) const {
        WeightedField w = *this;
        w.k = order;
        return w;
    }
};

inline WeightedField operator-(const WeightedField& a, const WeightedField& b) {
    WeightedField r = a;
    r.values = a.values - b.values;
    if (!a.tail.empty() && !b.tail.empty()) {
        for (size_t n = 0; n < r.tail.size(); ++n) {
            r.tail[n].P -= b.tail[n].P;
            r.tail[n].R -= b.tail[n].R;
        }
    } else if (!b.tail.empty()) {
        r.tail = b.tail;
        r.tail_psi = b.tail_psi;
        for (auto& t : r.tail) {
            t.P = -t.P;
            t.R = -t.R;
        }
    }
    return r;
}

inline double log_cosh(double s) {
    const double a = std::abs(s);
    return a + std::log1p(std::exp(-2 * a)) - std::log(2.0);
}

// sup over s of (cosh s)^{-mu} times the max over theta of |u| and, for
// k >= 1, 2, its first and second derivatives. Tail samples beyond s_max are
// evaluated analytically in log scale.
inline double weighted_norm(const WeightedField& u) {
    const CylinderGrid& g = *u.grid;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> rows; // (s, log of local max)
    std::vector<Eigen::MatrixXd> comps{u.values.cwiseAbs()};
    if (u.k >= 1) {
        comps.push_back(g.d_s(u.values).cwiseAbs());
        comps.push_back(g.d_t(u.values).cwiseAbs());
    }
    if (u.k >= 2) {
        comps.push_back(g.d_ss(u.values).cwiseAbs());
        comps.push_back(g.d_t(g.d_s(u.values)).cwiseAbs());
        comps.push_back(g.d_tt(u.values).cwiseAbs());
    }
    for (Eigen::Index i = 0; i < g.ns(); ++i) {
        double m = 0;
        for (const auto& c : comps) m = std::max(m, c.row(i).maxCoeff());
        rows.emplace_back(g.s[i], m > 0 ? std::log(m) : neg_inf);
    }
    if (!u.tail.empty() && u.tail_psi) {
        const Eigen::MatrixXd& Psi = *u.tail_psi;
        const int nt = static_cast<int>(Psi.rows());
        Eigen::MatrixXd Psi1 = Psi, Psi2 = Psi;
        if (u.k >= 1) Psi1 = fourier_d1(nt) * Psi;
        if (u.k >= 2) Psi2 = fourier_d2(nt) * Psi;
        double slowest = std::numeric_limits<double>::infinity();
        for (const auto& t : u.tail)
            if (t.R != 0 && t.gamma > 2) slowest = std::min(slowest, t.gamma - 2);
        const double dmax = std::clamp(40.0 / slowest, 8.0, 1e6);
        std::vector<double> ds;
        for (double d = 0.25; d <= 4.0; d += 0.25) ds.push_back(d);
        for (double d = 8.0; d <= dmax * 2; d *= 2) ds.push_back(d);
        const double smax = g.s.back();
        for (double d : ds) {
            // coefficients of e^{-2d}: a_n (value), b_n (d/ds), c_n (d2/ds2)
            Eigen::VectorXd a(u.tail.size()), b(u.tail.size()), c(u.tail.size());
            for (size_t n = 0; n < u.tail.size(); ++n) {
                const auto& t = u.tail[n];
                const double r = t.R == 0 ? 0.0 : t.R * std::exp(-(t.gamma - 2) * d);
                a[n] = t.P + r;
                b[n] = -2 * t.P - t.gamma * r;
                c[n] = 4 * t.P + t.gamma * t.gamma * r;
            }
            double m = (Psi * a).cwiseAbs().maxCoeff();
            if (u.k >= 1) m = std::max({m, (Psi * b).cwiseAbs().maxCoeff(), (Psi1 * a).cwiseAbs().maxCoeff()});
            if (u.k >= 2)
                m = std::max({m, (Psi * c).cwiseAbs().maxCoeff(), (Psi1 * b).cwiseAbs().maxCoeff(),
                              (Psi2 * a).cwiseAbs().maxCoeff()});
            rows.emplace_back(smax + d, m > 0 ? std::log(m) - 2 * d : neg_inf);
        }
    }
    double best = neg_inf;
    for (const auto& [s, lm] : rows)
        if (lm != neg_inf) best = std::max(best, -u.mu * log_cosh(s) + lm);
    return best == neg_inf ? 0.0 : std::exp(best);
}

// C^k norm of boundary data sampled on the periodic theta grid.
inline double boundary_norm(const Eigen::VectorXd& phi, int k = 2) {
    const int n = static_cast<int>(phi.size());
    double m = phi.cwiseAbs().maxCoeff();
    if (k >= 1) m = std::max(m, (fourier_d1(n) * phi).cwiseAbs().maxCoeff());
    if (k >= 2) m = std::max(m, (fourier_d2(n) * phi).cwiseAbs().maxCoeff());
    return m;
}

// ---------------------------------------------------------------------------

struct EndConfig {
    int n_modes = 32;
    int ns = 257;
    int nt = 64;
    double s_max_offset = 8;
    double mu = -2;
    double tol = 1e-7;             // weighted C^2 step; the roundoff floor sits near 1e-8
    int max_iter = 50;
    double relaxation = 1.0;   // 1 = pure Picard
    double epsilon0 = 0.2;     // largest necksize accepted by solve_cmc_end
    bool enforce_phi_bound = true;
    double remainder_margin = 1e3; // Q resolved down to this multiple of machine epsilon
};

class EndProblem {
public:
    EndProblem(const CatenoidParams& p, const EndConfig& cfg = {}) : EndProblem(p, cfg, false) {}

    static EndProblem flat(const CatenoidParams& p, const EndConfig& cfg = {}) { return EndProblem(p, cfg, true); }

    const CatenoidParams& params() const { return p_; }
    const EndConfig& config() const { return cfg_; }
    const SpectralBasis& basis() const { return basis_; }
    const CylinderGrid& grid() const { return *grid_; }
    std::shared_ptr<const CylinderGrid> grid_ptr() const { return grid_; }
    const ModeProjector& projector() const { return *proj_; }
    std::shared_ptr<const Eigen::MatrixXd> psi() const { return psi_; }
    double S() const { return S_; }
    double s_max() const { return grid_->s.back(); }

    WeightedField field(const Eigen::MatrixXd& v, int k = 0) const { return {grid_, v, cfg_.mu, k, {}, nullptr}; }

private:
    EndProblem(const CatenoidParams& p, const EndConfig& cfg, bool flat_model) : p_(p), cfg_(cfg) {
        S_ = truncation_S(p.epsilon);
        basis_ = flat_model ? flat_basis(cfg.n_modes) : assemble_cross_section(p, cfg.n_modes);
        if (!flat_model) indicial_roots(basis_);
        grid_ = std::make_shared<CylinderGrid>(make_cylinder_grid(S_, S_ + cfg.s_max_offset, cfg.ns, cfg.nt));
        proj_ = std::make_shared<ModeProjector>(basis_, grid_->theta);
        psi_ = std::make_shared<Eigen::MatrixXd>(proj_->samples());
    }

    CatenoidParams p_;
    EndConfig cfg_;
    SpectralBasis basis_;
    std::shared_ptr<const CylinderGrid> grid_;
    std::shared_ptr<const ModeProjector> proj_;
    std::shared_ptr<const Eigen::MatrixXd> psi_;
    double S_ = 0;
};

// u = sum_{n >= 2} phi_n e^{-gamma_n (s - S)} psi_n.
inline WeightedField poisson_op(const EndProblem& ep, const Eigen::VectorXd& phi) {
    const SpectralBasis& b = ep.basis();
    require(phi.size() == b.n_modes, ErrorKind::precondition, "coefficient vector has wrong length");
    const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
    require(std::abs(phi[0]) <= 1e-12 * scale && std::abs(phi[1]) <= 1e-12 * scale, ErrorKind::projection,
            "boundary data has low-mode content");
    const CylinderGrid& g = ep.grid();
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(g.ns(), b.n_modes);
    std::vector<ModeTail> tail(b.n_modes);
    for (int n = 2; n < b.n_modes; ++n) {
        if (phi[n] == 0) continue;
        for (Eigen::Index i = 0; i < g.ns(); ++i) C(i, n) = phi[n] * std::exp(-b.gammas[n] * (g.s[i] - ep.S()));
        tail[n] = {0.0, phi[n] * std::exp(-b.gammas[n] * (ep.s_max() - ep.S())), b.gammas[n]};
    }
    for (int n = 0; n < b.n_modes; ++n) tail[n].gamma = b.gammas[n];
    WeightedField u = ep.field(ep.projector().synthesize_rows(C), 2);
    u.tail = tail;
    u.tail_psi = ep.psi();
    return u;
}

struct GreenResult {
    WeightedField u;
    Eigen::MatrixXd modes; // ns x n_modes coefficient functions
    double leakage0 = 0, leakage1 = 0; // u_0(S), u_1(S)
};

// Mode-wise variation of parameters. With J_n(t) = int_t^inf e^{-gamma(tau - t)} f_n:
//   n >= 2:   u_n(s) = -int_S^s e^{-gamma (s - t)} J_n(t) dt      (u_n(S) = 0)
//   n = 0, 1: u_n(s) =  int_s^inf e^{gamma (t - s)} J_n(t) dt
// Integrals beyond s_max assume f_n(tau) = f_n(s_max) e^{-2(tau - s_max)}.
inline GreenResult green_op_detail(const EndProblem& ep, const Eigen::MatrixXd& f) {
    const SpectralBasis& b = ep.basis();
    const CylinderGrid& g = ep.grid();
    require(f.rows() == g.ns() && f.cols() == g.nt(), ErrorKind::precondition, "field shape mismatch");
    // weighted-norm divergence check at mu = -2: (cosh s)^2 |f| must not grow across the grid
    {
        const Eigen::Index n = g.ns();
        double head = 0;
        for (Eigen::Index i = 0; i <= n / 2; ++i)
            head = std::max(head, f.row(i).cwiseAbs().maxCoeff() * std::exp(2 * log_cosh(g.s[i])));
        const double last = f.row(n - 1).cwiseAbs().maxCoeff() * std::exp(2 * log_cosh(g.s[n - 1]));
        require(!(last > 10 * std::max(head, 1e-300)) || last < 1e-200, ErrorKind::weight,
                "right-hand side decays slower than e^{-2s}");
    }
    Eigen::MatrixXd F = ep.projector().coefficients_rows(f);
    Eigen::MatrixXd U(g.ns(), b.n_modes);
    std::vector<ModeTail> tail(b.n_modes);
    const double h = g.hs;
    for (int n = 0; n < b.n_modes; ++n) {
        const double gam = n == 0 ? 0.0 : b.gammas[n];
        Eigen::VectorXd fn = F.col(n);
        const double fend = fn[fn.size() - 1];
        Eigen::VectorXd J = exp_conv_backward(fn, h, gam, fend / (gam + 2));
        Eigen::VectorXd un;
        if (n >= 2) {
            un = -exp_conv_forward(J, h, gam);
        } else {
            un = exp_conv_backward(J, h, -gam, J[J.size() - 1] / (2 - gam));
        }
        U.col(n) = un;
        // at gamma = 2 the forced response is s e^{-2s}; the tail then keeps only the free part
        const double P = std::abs(4 - gam * gam) > 1e-9 ? fend / (4 - gam * gam) : 0.0;
        tail[n] = {P, n >= 2 ? un[un.size() - 1] - P : 0.0, gam};
    }
    GreenResult r;
    r.modes = U;
    r.u = ep.field(ep.projector().synthesize_rows(U), 2);
    r.u.tail = tail;
    r.u.tail_psi = ep.psi();
    r.leakage0 = U(0, 0);
    r.leakage1 = U(0, 1);
    return r;
}

inline WeightedField green_op(const EndProblem& ep, const Eigen::MatrixXd& f) { return green_op_detail(ep, f).u; }

// Closed-form response to f = e^{-2s} psi_n for n >= 2.
inline double green_exponential_closed(double gamma, double S, double s) {
    return (std::exp(-2 * S) * std::exp(-gamma * (s - S)) - std::exp(-2 * s)) / (gamma * gamma - 4);
}

// Ratio ||G f|| / ||f|| at mu = -2 for f = sech^2(s) psi_2.
inline double green_amplification(const EndProblem& ep) {
    const CylinderGrid& g = ep.grid();
    Eigen::MatrixXd f(g.ns(), g.nt());
    const Eigen::MatrixXd& Psi = ep.projector().samples();
    for (Eigen::Index i = 0; i < g.ns(); ++i) {
        const double sh = sech(g.s[i]);
        f.row(i) = sh * sh * Psi.col(2).transpose();
    }
    WeightedField u = green_op(ep, f).with_order(0);
    return weighted_norm(u) / weighted_norm(ep.field(f, 0));
}

// ---------------------------------------------------------------------------
// Flat model L0 = d_s^2 + d_theta^2 with gamma_n = n, solved by the literal
// double integrals with cumulative Simpson quadrature.

inline Eigen::VectorXd flat_green_oracle(const Eigen::VectorXd& f, int n, double mu, double S, double h,
                                         double tail_rate = std::numeric_limits<double>::quiet_NaN()) {
    require(mu < 0, ErrorKind::precondition, "weight must be negative");
    require(std::abs(mu - std::round(mu)) > 1e-12, ErrorKind::indicial_collision, "weight is an indicial root");
    const double r = std::isnan(tail_rate) ? -mu : tail_rate;
    const Eigen::Index N = f.size();
    const double smax = S + h * (N - 1);
    const int an = std::abs(n);
    Eigen::VectorXd s(N);
    for (Eigen::Index i = 0; i < N; ++i) s[i] = S + h * i;
    // accumulated from the right end so that small tails are not lost to cancellation
    auto from_right = [&](const Eigen::VectorXd& g, double tail) {
        Eigen::VectorXd c = cumulative_simpson(g.reverse(), h);
        Eigen::VectorXd out(N);
        for (Eigen::Index i = 0; i < N; ++i) out[i] = c[N - 1 - i] + tail;
        return out;
    };
    // A(t) = int_t^inf e^{-n tau} f(tau) dtau
    Eigen::VectorXd g1(N);
    for (Eigen::Index i = 0; i < N; ++i) g1[i] = std::exp(-an * s[i]) * f[i];
    Eigen::VectorXd A = from_right(g1, f[N - 1] * std::exp(-an * smax) / (an + r));
    Eigen::VectorXd g2(N);
    for (Eigen::Index i = 0; i < N; ++i) g2[i] = std::exp(2 * an * s[i]) * A[i];
    Eigen::VectorXd u(N);
    if (an < std::abs(mu)) {
        require(r > an, ErrorKind::weight, "tail rate too slow for the inward formula");
        Eigen::VectorXd B = from_right(g2, g2[N - 1] / (r - an));
        for (Eigen::Index i = 0; i < N; ++i) u[i] = std::exp(-an * s[i]) * B[i];
    } else {
        Eigen::VectorXd B = cumulative_simpson(g2, h);
        for (Eigen::Index i = 0; i < N; ++i) u[i] = -std::exp(-an * s[i]) * B[i];
    }
    return u;
}

// ---------------------------------------------------------------------------
// Nonlinear construction of cmc 1/2 ends.

struct EndSolution {
    CatenoidParams params;
    Eigen::VectorXd phi;
    double phi_norm = 0;
    WeightedField w;
    std::vector<double> step_norms;        // ||v_{k+1} - v_k||
    std::vector<double> iterate_norms;     // ||v_k||
    std::vector<double> contraction_factors;
    // ratio of the first two steps, the one measured furthest above roundoff
    double leading_contraction() const { return contraction_factors.empty() ? 0.0 : contraction_factors.front(); }
    double max_contraction() const {
        return contraction_factors.empty() ? 0.0
                                           : *std::max_element(contraction_factors.begin(), contraction_factors.end());
    }
    int iterations = 0;
    bool converged = false;
    double final_H_deviation = 0;          // sup over interior nodes of |H - 1/2|
    double leakage0 = 0, leakage1 = 0;
    double w0_norm = 0, w_norm = 0;
    double remainder_cutoff_s = 0;         // Q treated as zero beyond this s
};

// Boundary data phi = amplitude * psi_n with ||phi||_{C^2} = amplitude * ||psi_n||_{C^2}.
inline Eigen::VectorXd mode_coefficients(const EndProblem& ep, int n, double amplitude) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(ep.basis().n_modes);
    c[n] = amplitude;
    return c;
}

inline Eigen::VectorXd boundary_samples(const EndProblem& ep, const Eigen::VectorXd& phi) {
    return ep.projector().synthesize(phi);
}

// Beyond the point where |Q(w)| drops to a small multiple of the roundoff
// floor of H, Q is below what a double resolves while 1/prefactor and the
// weight both grow exponentially and would amplify the noise. The remainder is
// faded out smoothly over one unit in s before that point.
struct RemainderTaper {
    Eigen::VectorXd chi; // per s row
    double s_cut = std::numeric_limits<double>::infinity();
};

inline RemainderTaper remainder_taper(const RemainderEvaluator& Q, const Eigen::MatrixXd& w, double margin = 1e3,
                                      double width = 1.0) {
    const CylinderGrid& g = Q.grid();
    Eigen::MatrixXd q = Q(w);
    const double floor =
        margin * std::numeric_limits<double>::epsilon() * std::max(1.0, Q.base_mean_curvature().cwiseAbs().maxCoeff());
    RemainderTaper t;
    t.chi = Eigen::VectorXd::Ones(g.ns());
    for (Eigen::Index i = 0; i < q.rows(); ++i)
        if (q.row(i).cwiseAbs().maxCoeff() < floor) {
            t.s_cut = g.s[i];
            break;
        }
    for (Eigen::Index i = 0; i < g.ns(); ++i) {
        const double x = (t.s_cut - g.s[i]) / width;
        if (x <= 0) t.chi[i] = 0;
        else if (x < 1) t.chi[i] = std::pow(std::sin(0.5 * pi * x), 2);
    }
    return t;
}

inline Eigen::MatrixXd resolved_remainder(const RemainderEvaluator& Q, const Eigen::MatrixXd& c,
                                          const Eigen::MatrixXd& w, const RemainderTaper& t) {
    return t.chi.asDiagonal() * c.cwiseProduct(Q(w));
}

inline EndSolution solve_cmc_end(const EndProblem& ep, const Eigen::VectorXd& phi) {
    const EndConfig& cfg = ep.config();
    const CatenoidParams& p = ep.params();
    const CylinderGrid& g = ep.grid();
    require(p.epsilon <= cfg.epsilon0, ErrorKind::precondition, "necksize above epsilon_0");
    EndSolution sol;
    sol.params = p;
    sol.phi = phi;
    sol.phi_norm = boundary_norm(boundary_samples(ep, phi));
    if (cfg.enforce_phi_bound)
        require(sol.phi_norm <= p.epsilon * p.epsilon * (1 + 1e-12), ErrorKind::precondition,
                "boundary data exceeds epsilon^2");
    const WeightedField w0 = poisson_op(ep, phi);
    sol.w0_norm = weighted_norm(w0);
    RemainderEvaluator Q(p, g);
    Eigen::MatrixXd c = Q.prefactor().cwiseInverse();
    Eigen::MatrixXd sech2(g.ns(), g.nt());
    for (Eigen::Index i = 0; i < g.ns(); ++i) sech2.row(i).setConstant(sech(g.s[i]) * sech(g.s[i]));

    const RemainderTaper cut = remainder_taper(Q, w0.values, cfg.remainder_margin);
    sol.remainder_cutoff_s = cut.s_cut;
    WeightedField v = ep.field(Eigen::MatrixXd::Zero(g.ns(), g.nt()), 2);
    GreenResult last;
    for (int it = 0; it < cfg.max_iter; ++it) {
        Eigen::MatrixXd w = w0.values + v.values;
        Eigen::MatrixXd rhs = -2 * sech2.cwiseProduct(w) - 2 * resolved_remainder(Q, c, w, cut);
        last = green_op_detail(ep, rhs);
        WeightedField vn = last.u;
        if (cfg.relaxation != 1.0) {
            vn.values = cfg.relaxation * vn.values + (1 - cfg.relaxation) * v.values;
            for (size_t n = 0; n < vn.tail.size() && n < v.tail.size(); ++n) {
                vn.tail[n].P = cfg.relaxation * vn.tail[n].P + (1 - cfg.relaxation) * v.tail[n].P;
                vn.tail[n].R = cfg.relaxation * vn.tail[n].R + (1 - cfg.relaxation) * v.tail[n].R;
            }
        }
        const double step = weighted_norm(vn - v);
        sol.step_norms.push_back(step);
        if (sol.step_norms.size() >= 2 && sol.step_norms[sol.step_norms.size() - 2] > 0)
            sol.contraction_factors.push_back(step / sol.step_norms[sol.step_norms.size() - 2]);
        v = vn;
        sol.iterate_norms.push_back(weighted_norm(v));
        sol.iterations = it + 1;
        if (!std::isfinite(step) || step > 1e6)
            throw Error(ErrorKind::no_contraction, "iteration diverges at epsilon = " + std::to_string(p.epsilon));
        if (step < cfg.tol) {
            sol.converged = true;
            break;
        }
    }
    if (!sol.converged)
        throw Error(ErrorKind::no_contraction,
                    "no convergence within " + std::to_string(cfg.max_iter) + " iterations at epsilon = " +
                        std::to_string(p.epsilon));
    sol.w = v;
    sol.w.values += w0.values;
    for (size_t n = 0; n < sol.w.tail.size(); ++n) {
        sol.w.tail[n].P += w0.tail[n].P;
        sol.w.tail[n].R += w0.tail[n].R;
    }
    sol.w_norm = weighted_norm(sol.w);
    sol.leakage0 = last.leakage0;
    sol.leakage1 = last.leakage1;
    Eigen::MatrixXd H = Q.mean_curvature(sol.w.values);
    const Eigen::Index ns = g.ns();
    sol.final_H_deviation = (H.middleRows(2, ns - 4).array() - 0.5).abs().maxCoeff();
    return sol;
}

} // namespace hrcmc
