#pragma once

// Horizontal graphs y = g(x, z) over planar domains in the xz plane and the
// Dirichlet problem M(g) = 1 for twice their mean curvature. Domains are an
// outer disc with disjoint circular holes centred on the x axis, discretised on
// a square grid with Shortley-Weller treatment of cut cells.

#include "core.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace hrcmc {

struct Hole {
    double x = 0, r = 0;
};

// M(g) = (g^2/W^3)[(g^2+g_z^2) g_xx - 2 g_x g_z g_xz + (1+g_x^2) g_zz + g(1+g_x^2)],
// W^2 = g^2(1+g_x^2) + g_z^2.
struct GraphJet {
    double g, gx, gz, gxx, gzz, gxz;
};

inline double graph_operator(const GraphJet& j) {
    const double C = 1 + j.gx * j.gx;
    const double N = (j.g * j.g + j.gz * j.gz) * j.gxx - 2 * j.gx * j.gz * j.gxz + C * j.gzz + j.g * C;
    const double W2 = j.g * j.g * C + j.gz * j.gz;
    return j.g * j.g * N / (W2 * std::sqrt(W2));
}

// Partial derivatives of M with respect to (g, gx, gz, gxx, gzz, gxz).
inline std::array<double, 6> graph_operator_partials(const GraphJet& j) {
    const double g = j.g, gx = j.gx, gz = j.gz;
    const double A = g * g + gz * gz, B = -2 * gx * gz, C = 1 + gx * gx;
    const double N = A * j.gxx + B * j.gxz + C * j.gzz + g * C;
    const double W2 = g * g * C + gz * gz;
    const double W3 = W2 * std::sqrt(W2);
    const double F = g * g * N / W3;
    auto part = [&](double dg2, double dN, double dW2) { return (dg2 * N + g * g * dN) / W3 - 1.5 * F * dW2 / W2; };
    return {part(2 * g, 2 * g * j.gxx + C, 2 * g * C),
            part(0, -2 * gz * j.gxz + 2 * gx * j.gzz + 2 * g * gx, 2 * g * g * gx),
            part(0, 2 * gz * j.gxx - 2 * gx * j.gxz, 2 * gz),
            part(0, A, 0),
            part(0, C, 0),
            part(0, B, 0)};
}

// Centred second-order M on the interior of a uniformly sampled rectangle
// (rows over x, columns over z).
inline Eigen::MatrixXd mean_curvature_patch(const Eigen::MatrixXd& g, double h) {
    const Eigen::Index nx = g.rows(), nz = g.cols();
    Eigen::MatrixXd M = Eigen::MatrixXd::Constant(nx, nz, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 1; i + 1 < nx; ++i)
        for (Eigen::Index k = 1; k + 1 < nz; ++k) {
            GraphJet j{g(i, k),
                       (g(i + 1, k) - g(i - 1, k)) / (2 * h),
                       (g(i, k + 1) - g(i, k - 1)) / (2 * h),
                       (g(i + 1, k) - 2 * g(i, k) + g(i - 1, k)) / (h * h),
                       (g(i, k + 1) - 2 * g(i, k) + g(i, k - 1)) / (h * h),
                       (g(i + 1, k + 1) - g(i + 1, k - 1) - g(i - 1, k + 1) + g(i - 1, k - 1)) / (4 * h * h)};
            M(i, k) = graph_operator(j);
        }
    return M;
}

// ---------------------------------------------------------------------------

using BoundaryFunction = std::function<double(double)>; // of the polar angle about the component centre

inline BoundaryFunction constant_boundary(double c) {
    return [c](double) { return c; };
}

// Periodic linear interpolation of samples at angles 2 pi k / n.
inline BoundaryFunction sampled_boundary(std::vector<double> samples) {
    require(!samples.empty(), ErrorKind::precondition, "empty boundary samples");
    return [v = std::move(samples)](double a) {
        const double n = static_cast<double>(v.size());
        double u = a / (2 * pi) * n;
        u -= n * std::floor(u / n);
        const auto i = static_cast<size_t>(std::floor(u)) % v.size();
        const double f = u - std::floor(u);
        return (1 - f) * v[i] + f * v[(i + 1) % v.size()];
    };
}

struct DirichletData {
    BoundaryFunction psi_out = constant_boundary(0);
    std::vector<BoundaryFunction> psi_in;

    static DirichletData constant(double out, const std::vector<double>& in) {
        DirichletData d;
        d.psi_out = constant_boundary(out);
        for (double c : in) d.psi_in.push_back(constant_boundary(c));
        return d;
    }

    double sup_norm(int samples = 720) const {
        double m = 0;
        for (int k = 0; k < samples; ++k) {
            const double a = 2 * pi * k / samples;
            m = std::max(m, std::abs(psi_out(a)));
            for (const auto& f : psi_in) m = std::max(m, std::abs(f(a)));
        }
        return m;
    }
};

class PlanarDomain {
public:
    enum class Cell { interior, boundary, exterior };

    PlanarDomain(double r, std::vector<Hole> holes, double h) : r_(r), holes_(std::move(holes)), h_(h) {
        require(r > 0 && h > 0 && h < r, ErrorKind::domain, "invalid radius or spacing");
        for (size_t a = 0; a < holes_.size(); ++a) {
            require(holes_[a].r > 0, ErrorKind::domain, "hole radius must be positive");
            require(std::abs(holes_[a].x) + holes_[a].r < r, ErrorKind::domain, "hole not strictly inside outer disc");
            for (size_t b = 0; b < a; ++b)
                require(std::abs(holes_[a].x - holes_[b].x) > holes_[a].r + holes_[b].r, ErrorKind::domain,
                        "holes overlap");
        }
        n_ = static_cast<int>(std::lround(2 * r / h)) + 1;
        h_ = 2 * r / (n_ - 1);
        index_.assign(static_cast<size_t>(n_) * n_, -1);
        cell_.assign(static_cast<size_t>(n_) * n_, Cell::exterior);
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k) {
                const double d = signed_distance(x(i), z(k));
                Cell c = d > band() ? Cell::interior : (d > -h_ ? Cell::boundary : Cell::exterior);
                cell_[lin(i, k)] = c;
                if (c == Cell::interior) {
                    index_[lin(i, k)] = static_cast<int>(nodes_.size());
                    nodes_.push_back({i, k});
                }
            }
        require(!nodes_.empty(), ErrorKind::domain, "domain has no interior nodes");
    }

    double r() const { return r_; }
    double h() const { return h_; }
    const std::vector<Hole>& holes() const { return holes_; }
    int n() const { return n_; }
    double x(int i) const { return -r_ + h_ * i; }
    double z(int k) const { return -r_ + h_ * k; }
    int unknowns() const { return static_cast<int>(nodes_.size()); }
    const std::array<int, 2>& node(int m) const { return nodes_[m]; }
    int index(int i, int k) const {
        if (i < 0 || k < 0 || i >= n_ || k >= n_) return -1;
        return index_[lin(i, k)];
    }
    Cell cell(int i, int k) const { return cell_[lin(i, k)]; }
    int components() const { return 1 + static_cast<int>(holes_.size()); }

    // Positive inside. Component 0 is the outer circle, j+1 is hole j.
    double signed_distance(double px, double pz, int* component = nullptr) const {
        double d = r_ - std::hypot(px, pz);
        int c = 0;
        for (size_t j = 0; j < holes_.size(); ++j) {
            const double dj = std::hypot(px - holes_[j].x, pz) - holes_[j].r;
            if (dj < d) {
                d = dj;
                c = static_cast<int>(j) + 1;
            }
        }
        if (component) *component = c;
        return d;
    }

    std::array<double, 3> component_circle(int c) const {
        if (c == 0) return {0.0, 0.0, r_};
        return {holes_[c - 1].x, 0.0, holes_[c - 1].r};
    }

    double angle_on(int c, double px, double pz) const {
        auto [cx, cz, rad] = component_circle(c);
        (void)rad;
        return std::atan2(pz - cz, px - cx);
    }

    // Along the ray from an interior node in direction (dx, dz) of length len,
    // the distance to the first boundary crossing (capped at len) and the
    // component and angle of the boundary point that supplies the value.
    struct Crossing {
        double dist;
        int component;
        double angle;
    };

    Crossing cross(double px, double pz, double dx, double dz, double len) const {
        double best = std::numeric_limits<double>::infinity();
        int comp = -1;
        auto hit = [&](double cx, double cz, double rad, bool outer, int c) {
            const double ox = px - cx, oz = pz - cz;
            const double b = ox * dx + oz * dz, cc = ox * ox + oz * oz - rad * rad;
            const double disc = b * b - cc;
            if (disc < 0) return;
            const double sq = std::sqrt(disc);
            const double t = outer ? -b + sq : -b - sq;
            if (t > 0 && t < best) {
                best = t;
                comp = c;
            }
        };
        hit(0, 0, r_, true, 0);
        for (size_t j = 0; j < holes_.size(); ++j) hit(holes_[j].x, 0, holes_[j].r, false, static_cast<int>(j) + 1);
        if (best <= len) return {best, comp, angle_on(comp, px + best * dx, pz + best * dz)};
        // target lies in the thin band next to the boundary: use its projection
        int c = 0;
        const double tx = px + len * dx, tz = pz + len * dz;
        signed_distance(tx, tz, &c);
        return {len, c, angle_on(c, tx, tz)};
    }

private:
    size_t lin(int i, int k) const { return static_cast<size_t>(i) * n_ + k; }
    double band() const { return 1e-2 * h_; }

    double r_;
    std::vector<Hole> holes_;
    double h_;
    int n_ = 0;
    std::vector<int> index_;
    std::vector<Cell> cell_;
    std::vector<std::array<int, 2>> nodes_;
};

struct GraphFunction {
    const PlanarDomain* domain = nullptr;
    Eigen::VectorXd g;              // per interior node
    DirichletData data;             // boundary values are 1 + psi
};

// ---------------------------------------------------------------------------
// Stencils. Each derivative at an interior node m is written in difference
// form sum_k w_k (g_k - g_m) + sum_b w_b (v_b - g_m) over unknown neighbours k
// and boundary values v_b, so that constants are differentiated to exactly 0.

struct DiffForm {
    int center = -1;
    std::vector<std::pair<int, double>> terms;
    std::vector<std::pair<double, double>> fixed; // (value, weight)

    double eval(const Eigen::VectorXd& g) const {
        const double c = g[center];
        double v = 0;
        for (auto [i, w] : terms) v += w * (g[i] - c);
        for (auto [b, w] : fixed) v += w * (b - c);
        return v;
    }
    // d eval / d g_m, with the centre weight being minus the sum of the others
    double center_weight() const {
        double s = 0;
        for (auto [i, w] : terms) s += w;
        for (auto [b, w] : fixed) s += w;
        return -s;
    }
    double fixed_part() const {
        double v = 0;
        for (auto [b, w] : fixed) v += w * b;
        return v;
    }
};

struct NodeStencil {
    DiffForm gx, gz, gxx, gzz, gxz;
};

class GraphStencils {
public:
    // Boundary values are psi - shift, so the default shift gives the graph values
    // 1 + psi; the harmonic seed solves for the deviation from a reference level.
    GraphStencils(const PlanarDomain& d, const DirichletData& data, double shift = -1) : d_(d) {
        require(static_cast<int>(data.psi_in.size()) == static_cast<int>(d.holes().size()), ErrorKind::precondition,
                "one boundary function per hole required");
        auto bval = [&](int comp, double angle) {
            const double psi = comp == 0 ? data.psi_out(angle) : data.psi_in[comp - 1](angle);
            return psi - shift;
        };
        const double h = d.h();
        st_.resize(d.unknowns());
        for (int m = 0; m < d.unknowns(); ++m) {
            auto [i, k] = d.node(m);
            const double px = d.x(i), pz = d.z(k);
            struct Nb {
                double dist;
                int idx;
                double value;
            };
            auto neighbour = [&](int di, int dk) -> Nb {
                const int id = d.index(i + di, k + dk);
                const double len = h * std::hypot(di, dk);
                if (id >= 0) return {len, id, 0.0};
                auto c = d.cross(px, pz, di * h / len, dk * h / len, len);
                return {c.dist, -1, bval(c.component, c.angle)};
            };
            auto put = [](DiffForm& f, const auto& nb, double w) {
                if (nb.idx >= 0) f.terms.emplace_back(nb.idx, w);
                else f.fixed.emplace_back(nb.value, w);
            };
            NodeStencil& s = st_[m];
            for (DiffForm* f : {&s.gx, &s.gz, &s.gxx, &s.gzz, &s.gxz}) f->center = m;
            auto axis = [&](int di, int dk, DiffForm& d1, DiffForm& d2) {
                Nb lo = neighbour(-di, -dk), hi = neighbour(di, dk);
                const double a = lo.dist, b = hi.dist;
                // three-point formulas on (-a, 0, b); centre weights are implied
                put(d1, lo, -b / (a * (a + b)));
                put(d1, hi, a / (b * (a + b)));
                put(d2, lo, 2 / (a * (a + b)));
                put(d2, hi, 2 / (b * (a + b)));
            };
            axis(1, 0, s.gx, s.gxx);
            axis(0, 1, s.gz, s.gzz);
            // mixed derivative from the four diagonals; a missing diagonal value is
            // extrapolated linearly through the boundary crossing, which in
            // difference form scales the boundary weight by sqrt(2) h / dist
            const int sg[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
            for (auto& q : sg) {
                const double w = q[0] * q[1] / (4 * h * h);
                Nb nb = neighbour(q[0], q[1]);
                if (nb.idx >= 0) s.gxz.terms.emplace_back(nb.idx, w);
                else s.gxz.fixed.emplace_back(nb.value, w * std::sqrt(2.0) * h / nb.dist);
            }
        }
    }

    const NodeStencil& operator[](int m) const { return st_[m]; }
    const PlanarDomain& domain() const { return d_; }

    GraphJet jet(const Eigen::VectorXd& g, int m) const {
        const NodeStencil& s = st_[m];
        return {g[m], s.gx.eval(g), s.gz.eval(g), s.gxx.eval(g), s.gzz.eval(g), s.gxz.eval(g)};
    }

    // Shortley-Weller Laplacian gxx + gzz as a matrix; rhs receives minus the
    // boundary contributions so that L u = rhs is the discrete Dirichlet problem.
    Eigen::SparseMatrix<double> laplacian(Eigen::VectorXd* rhs = nullptr) const {
        std::vector<Eigen::Triplet<double>> trips;
        if (rhs) rhs->setZero(static_cast<Eigen::Index>(st_.size()));
        for (int m = 0; m < static_cast<int>(st_.size()); ++m) {
            for (const DiffForm* f : {&st_[m].gxx, &st_[m].gzz}) {
                for (auto [i, w] : f->terms) trips.emplace_back(m, i, w);
                trips.emplace_back(m, m, f->center_weight());
                if (rhs) (*rhs)[m] -= f->fixed_part();
            }
        }
        Eigen::SparseMatrix<double> L(static_cast<Eigen::Index>(st_.size()), static_cast<Eigen::Index>(st_.size()));
        L.setFromTriplets(trips.begin(), trips.end());
        return L;
    }

private:
    const PlanarDomain& d_;
    std::vector<NodeStencil> st_;
};

inline Eigen::VectorXd mean_curvature_graph(const GraphStencils& st, const Eigen::VectorXd& g) {
    require(g.minCoeff() > 0, ErrorKind::domain, "graph must stay in y > 0");
    Eigen::VectorXd M(g.size());
    for (Eigen::Index m = 0; m < g.size(); ++m) M[m] = graph_operator(st.jet(g, static_cast<int>(m)));
    return M;
}

inline Eigen::VectorXd mean_curvature_graph(const GraphFunction& gf) {
    return mean_curvature_graph(GraphStencils(*gf.domain, gf.data), gf.g);
}

inline Eigen::SparseMatrix<double> graph_jacobian(const GraphStencils& st, const Eigen::VectorXd& g) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int m = 0; m < static_cast<int>(g.size()); ++m) {
        const auto p = graph_operator_partials(st.jet(g, m));
        const NodeStencil& s = st[m];
        trips.emplace_back(m, m, p[0]);
        const DiffForm* forms[5] = {&s.gx, &s.gz, &s.gxx, &s.gzz, &s.gxz};
        for (int q = 0; q < 5; ++q) {
            if (p[q + 1] == 0) continue;
            for (auto [i, w] : forms[q]->terms) trips.emplace_back(m, i, p[q + 1] * w);
            trips.emplace_back(m, m, p[q + 1] * forms[q]->center_weight());
        }
    }
    Eigen::SparseMatrix<double> J(g.size(), g.size());
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
}

// ---------------------------------------------------------------------------

enum class GraphSeed { harmonic, constant };
enum class GraphMethod { newton, picard };

struct GraphConfig {
    double smallness = 0.2;
    double tol = 1e-9;
    int max_iter = 30;
    // A Newton step that no longer lowers a residual below this is taken to have
    // reached round-off; cut-cell weights up to 200 / h^2 put that near tol on fine grids.
    double roundoff_floor = 1e-7;
    GraphSeed seed = GraphSeed::harmonic;
    GraphMethod method = GraphMethod::newton;
};

struct GraphSolution {
    GraphFunction gf;
    std::vector<double> residuals; // sup |M(g) - 1| after the seed and after each step
    int steps = 0;
    int newton_steps = 0;
    double seed_residual = 0;
    bool roundoff_limited = false; // stopped above tol at the round-off floor
};

inline Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    require(lu.info() == Eigen::Success, ErrorKind::numerical, "sparse factorisation failed");
    Eigen::VectorXd x = lu.solve(b);
    require(lu.info() == Eigen::Success, ErrorKind::numerical, "sparse solve failed");
    return x;
}

// 1 + harmonic extension of psi, solved for the deviation from the reference
// value psi_out(0) so that constant data reproduce the constant exactly.
inline Eigen::VectorXd harmonic_seed(const PlanarDomain& d, const DirichletData& data) {
    const double ref = data.psi_out(0);
    GraphStencils st(d, data, ref);
    Eigen::VectorXd rhs;
    Eigen::SparseMatrix<double> L = st.laplacian(&rhs);
    Eigen::VectorXd u = rhs.isZero(0) ? Eigen::VectorXd::Zero(rhs.size()).eval() : sparse_solve(L, rhs);
    return (u.array() + (1 + ref)).matrix();
}

// The constant 1 in the interior, blended into the harmonic seed within a
// layer of width 0.05 r along the boundary. A literal constant disagrees with
// the data at cut-cell nodes a small fraction of h from the boundary, which
// puts it outside the basin of any of the iterations.
inline Eigen::VectorXd constant_seed(const PlanarDomain& d, const DirichletData& data) {
    Eigen::VectorXd g = harmonic_seed(d, data);
    const double ell = 0.05 * d.r();
    for (int m = 0; m < d.unknowns(); ++m) {
        auto [i, k] = d.node(m);
        const double dist = d.signed_distance(d.x(i), d.z(k)) / ell;
        g[m] = 1 + (g[m] - 1) * std::exp(-dist * dist);
    }
    return g;
}

inline GraphSolution solve_dirichlet(const PlanarDomain& d, const DirichletData& data, const GraphConfig& cfg = {}) {
    const double size = data.sup_norm();
    require(size <= cfg.smallness, ErrorKind::precondition,
            "boundary data sup norm " + std::to_string(size) + " exceeds smallness " + std::to_string(cfg.smallness));
    GraphStencils st(d, data);
    GraphSolution sol;
    sol.gf.domain = &d;
    sol.gf.data = data;
    Eigen::VectorXd g = cfg.seed == GraphSeed::harmonic ? harmonic_seed(d, data) : constant_seed(d, data);
    auto residual = [&](const Eigen::VectorXd& v) { return (mean_curvature_graph(st, v).array() - 1).eval(); };
    Eigen::VectorXd r = residual(g);
    sol.seed_residual = r.cwiseAbs().maxCoeff();
    sol.residuals.push_back(sol.seed_residual);
    // Laplacian-preconditioned steps serve the Picard mode and, in Newton mode,
    // carry a rough seed (the constant 1 has jumps at the cut cells) until the
    // residual drops below 1
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lap;
    lap.compute(st.laplacian());
    require(lap.info() == Eigen::Success, ErrorKind::numerical, "Laplacian factorisation failed");
    int stalled = 0;
    while (sol.residuals.back() >= cfg.tol) {
        if (stalled > 0 && sol.residuals.back() < cfg.roundoff_floor) {
            sol.roundoff_limited = true;
            break;
        }
        if (sol.steps >= cfg.max_iter || stalled >= 3) {
            std::string hist;
            char buf[32];
            for (double x : sol.residuals) {
                std::snprintf(buf, sizeof buf, " %.3e", x);
                hist += buf;
            }
            throw Error(ErrorKind::nonconvergence, "graph solver stalled; residual history:" + hist);
        }
        const bool newton = cfg.method == GraphMethod::newton && sol.residuals.back() < 1;
        Eigen::VectorXd dg =
            newton ? sparse_solve(graph_jacobian(st, g), -r.matrix()).eval() : lap.solve(-r.matrix()).eval();
        if (newton) ++sol.newton_steps;
        // Newton steps backtrack on the l2 residual away from the solution;
        // Laplacian steps only guard positivity
        const double r2 = r.matrix().norm();
        double t = 1;
        Eigen::VectorXd trial;
        Eigen::ArrayXd rt;
        for (int halvings = 0;; ++halvings) {
            trial = g + t * dg;
            if (trial.minCoeff() > 0) {
                rt = residual(trial);
                if (rt.allFinite() &&
                    (!newton || rt.matrix().norm() <= (1 - 1e-4 * t) * r2 || sol.residuals.back() < 1e-6))
                    break;
            }
            if (halvings == 30) throw Error(ErrorKind::nonconvergence, "graph solver line search failed");
            t *= 0.5;
        }
        g = trial;
        r = rt;
        const double res = r.cwiseAbs().maxCoeff();
        require(std::isfinite(res), ErrorKind::nonconvergence, "graph solver produced non-finite residual");
        stalled = newton && res >= sol.residuals.back() ? stalled + 1 : 0;
        sol.residuals.push_back(res);
        ++sol.steps;
    }
    sol.gf.g = g;
    return sol;
}

// ---------------------------------------------------------------------------

// Value of the solved graph at an arbitrary point, by cubic Lagrange
// interpolation on the 4x4 block of nodes around it. All 16 must be interior.
inline double graph_value_at(const GraphFunction& gf, double px, double pz) {
    const PlanarDomain& d = *gf.domain;
    const double h = d.h();
    const int i0 = static_cast<int>(std::floor((px + d.r()) / h)) - 1;
    const int k0 = static_cast<int>(std::floor((pz + d.r()) / h)) - 1;
    auto lagrange = [&](double t, int j) {
        // nodes at 0..3, t in node units relative to the first node
        double w = 1;
        for (int q = 0; q < 4; ++q)
            if (q != j) w *= (t - q) / (j - q);
        return w;
    };
    const double tx = (px - d.x(i0)) / h, tz = (pz - d.z(k0)) / h;
    double v = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const int id = d.index(i0 + a, k0 + b);
            require(id >= 0, ErrorKind::domain, "interpolation stencil leaves the domain");
            v += lagrange(tx, a) * lagrange(tz, b) * gf.g[id];
        }
    return v;
}

struct BoundaryDerivative {
    std::vector<double> angle, value; // derivative along the normal pointing into the domain
};

// One-sided normal derivative along a boundary component from the boundary
// value and interpolated interior values at 3h, 6h and 9h. The four-point
// formula is third order; the three-point second-order one carries a
// delta^2 u_nnn / 3 error that dominates at desk resolutions.
inline BoundaryDerivative boundary_derivative(const GraphFunction& gf, int component, int samples = 64) {
    const PlanarDomain& d = *gf.domain;
    require(component >= 0 && component < d.components(), ErrorKind::precondition, "no such boundary component");
    auto [cx, cz, rad] = d.component_circle(component);
    const double sgn = component == 0 ? -1.0 : 1.0;
    const double delta = 3 * d.h();
    BoundaryDerivative out;
    for (int k = 0; k < samples; ++k) {
        const double a = 2 * pi * k / samples;
        const double nx = sgn * std::cos(a), nz = sgn * std::sin(a);
        const double bx = cx + rad * std::cos(a), bz = cz + rad * std::sin(a);
        const double g0 = 1 + (component == 0 ? gf.data.psi_out(a) : gf.data.psi_in[component - 1](a));
        double g[3];
        for (int q = 0; q < 3; ++q) g[q] = graph_value_at(gf, bx + (q + 1) * delta * nx, bz + (q + 1) * delta * nz);
        out.angle.push_back(a);
        out.value.push_back((-11 * g0 + 18 * g[0] - 9 * g[1] + 2 * g[2]) / (6 * delta));
    }
    return out;
}

} // namespace hrcmc
