#include <hrcmc/end_solver.hpp>

#include <gtest/gtest.h>

using namespace hrcmc;

namespace {

EndConfig small_config() {
    EndConfig c;
    c.n_modes = 16;
    c.ns = 193;
    c.nt = 32;
    c.s_max_offset = 6;
    return c;
}

Eigen::MatrixXd mode_field(const EndProblem& ep, int n, double (*prof)(double)) {
    const CylinderGrid& g = ep.grid();
    Eigen::MatrixXd f(g.ns(), g.nt());
    for (Eigen::Index i = 0; i < g.ns(); ++i) f.row(i) = prof(g.s[i]) * ep.projector().samples().col(n).transpose();
    return f;
}

} // namespace

TEST(WeightedNorm, Normalisation) {
    auto grid = std::make_shared<CylinderGrid>(make_cylinder_grid(-4, 4, 161, 16));
    WeightedField u{grid, grid->sample([](double s, double) { return std::pow(sech(s), 2); }), -2, 0, {}, nullptr};
    EXPECT_NEAR(weighted_norm(u), 1.0, 1e-14);
}

TEST(WeightedNorm, WeightMismatchGrowsWithTruncation) {
    std::vector<double> vals;
    for (double smax : {6.0, 8.0, 10.0}) {
        auto grid = std::make_shared<CylinderGrid>(make_cylinder_grid(0, smax, 201, 8));
        WeightedField u{grid, grid->sample([](double s, double) { return std::exp(-s); }), -2, 0, {}, nullptr};
        vals.push_back(weighted_norm(u));
    }
    EXPECT_NEAR(vals[1] / vals[0], std::exp(2.0), 0.01 * std::exp(2.0));
    EXPECT_NEAR(vals[2] / vals[1], std::exp(2.0), 0.01 * std::exp(2.0));
}

TEST(WeightedNorm, MonotoneInWeight) {
    auto grid = std::make_shared<CylinderGrid>(make_cylinder_grid(0, 6, 121, 8));
    Eigen::MatrixXd v = grid->sample([](double s, double t) { return std::exp(-2.5 * s) * (1 + std::cos(t)); });
    WeightedField a{grid, v, -2, 0, {}, nullptr}, b{grid, v, -1, 0, {}, nullptr};
    EXPECT_GE(weighted_norm(a), weighted_norm(b));
    EXPECT_GE(weighted_norm(a.with_order(2)), weighted_norm(a));
}

TEST(WeightedNorm, LogCoshStable) {
    for (double s : {0.0, 0.5, -3.0, 20.0}) EXPECT_NEAR(log_cosh(s), std::log(std::cosh(s)), 1e-13);
    EXPECT_NEAR(log_cosh(800.0), 800.0 - std::log(2.0), 1e-12);
}

TEST(FlatOracle, ExponentialInputAtWeight) {
    // u'' = e^{-2s} with decay at mu = -2.5: u = e^{-2s} / 4
    const double S = 1, h = 0.01;
    const int N = 801;
    Eigen::VectorXd f(N);
    for (int i = 0; i < N; ++i) f[i] = std::exp(-2 * (S + h * i));
    Eigen::VectorXd u = flat_green_oracle(f, 0, -2.5, S, h, 2.0);
    for (int i = 0; i < N; i += 40) EXPECT_NEAR(u[i], f[i] / 4, 1e-10);
}

TEST(FlatOracle, ExponentialWeightInput) {
    // f = e^{mu s}: u = e^{mu s} / (mu^2 - n^2) below the weight; above it the
    // homogeneous e^{-n (s - S)} term enforces u(S) = 0
    const double S = 0.5, h = 0.005, mu = -2.5;
    const int N = 1201;
    for (int n : {0, 1, 2, 3}) {
        Eigen::VectorXd f(N);
        for (int i = 0; i < N; ++i) f[i] = std::exp(mu * (S + h * i));
        Eigen::VectorXd u = flat_green_oracle(f, n, mu, S, h);
        double worst = 0, resid = 0;
        for (int i = 0; i < N; ++i) {
            const double s = S + h * i;
            double exact = std::exp(mu * s) / (mu * mu - n * n);
            if (n > -mu) exact -= std::exp(mu * S - n * (s - S)) / (mu * mu - n * n);
            worst = std::max(worst, std::abs(u[i] - exact));
            if (i >= 2 && i < N - 2) {
                const double upp = (-u[i + 2] + 16 * u[i + 1] - 30 * u[i] + 16 * u[i - 1] - u[i - 2]) / (12 * h * h);
                resid = std::max(resid, std::abs(upp - n * n * u[i] - f[i]));
            }
        }
        EXPECT_LT(worst, 1e-8) << "n = " << n;
        // differencing the quadrature twice amplifies its error by h^{-2}
        EXPECT_LT(resid, 1e-6) << "n = " << n;
    }
}

TEST(FlatOracle, HomogeneousAndIndicialWeight) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(101);
    EXPECT_EQ(flat_green_oracle(z, 2, -2.5, 1, 0.01).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(flat_green_oracle(z, 2, -2.0, 1, 0.01), Error);
    EXPECT_THROW(flat_green_oracle(z, 2, 1.5, 1, 0.01), Error);
}

TEST(Poisson, SingleModeSolution) {
    const CatenoidParams p = CatenoidParams::from_epsilon(0.05);
    EndConfig cfg = small_config();
    cfg.ns = 1201; // h = 0.005 so that the difference residual sits below 1e-8
    EndProblem ep(p, cfg);
    Eigen::VectorXd phi = Eigen::VectorXd::Unit(16, 2);
    WeightedField u = poisson_op(ep, phi);
    const CylinderGrid& g = ep.grid();
    const double gam = ep.basis().gammas[2];
    for (Eigen::Index i = 0; i < g.ns(); i += 16)
        for (Eigen::Index j = 0; j < g.nt(); j += 5)
            EXPECT_NEAR(u.values(i, j), std::exp(-gam * (g.s[i] - ep.S())) * ep.projector().samples()(j, 2), 1e-13);
    Eigen::MatrixXd r = apply_L(p, g, u.values, false);
    EXPECT_LT(r.middleRows(4, g.ns() - 8).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((u.values.row(0).transpose() - boundary_samples(ep, phi)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Poisson, ZeroAndLowModes) {
    EndProblem ep(CatenoidParams::from_epsilon(0.05), small_config());
    EXPECT_EQ(poisson_op(ep, Eigen::VectorXd::Zero(16)).values.cwiseAbs().maxCoeff(), 0.0);
    try {
        poisson_op(ep, Eigen::VectorXd::Unit(16, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::projection);
    }
}

TEST(Poisson, NormBoundConstantStable) {
    // ||u||_{2,-2} <= c e^{2S} ||phi||_{C^2}
    std::vector<double> c;
    for (double eps : {0.1, 0.05}) {
        EndProblem ep(CatenoidParams::from_epsilon(eps), small_config());
        Eigen::VectorXd phi = Eigen::VectorXd::Zero(16);
        phi[2] = 1;
        phi[4] = -0.3;
        const double bn = boundary_norm(boundary_samples(ep, phi));
        c.push_back(weighted_norm(poisson_op(ep, phi)) / (std::exp(2 * ep.S()) * bn));
    }
    EXPECT_LT(c[0], 1.0);
    EXPECT_NEAR(c[1] / c[0], 1.0, 0.1);
}

TEST(Green, ExponentialInputClosedForm) {
    EndProblem ep(CatenoidParams::from_epsilon(0.05));
    for (int n : {2, 3, 7}) {
        GreenResult G = green_op_detail(ep, mode_field(ep, n, [](double s) { return std::exp(-2 * s); }));
        const double gam = ep.basis().gammas[n];
        for (Eigen::Index i = 0; i < ep.grid().ns(); ++i)
            EXPECT_NEAR(G.modes(i, n), green_exponential_closed(gam, ep.S(), ep.grid().s[i]), 1e-8);
        EXPECT_NEAR(G.modes(0, n), 0.0, 1e-15);
    }
}

TEST(Green, InvertsTheOperator) {
    const CatenoidParams p = CatenoidParams::from_epsilon(0.05);
    EndProblem ep(p);
    const CylinderGrid& g = ep.grid();
    Eigen::MatrixXd f = g.sample([](double s, double th) {
        return std::pow(sech(s), 2) * (0.2 + std::cos(2 * th) - 0.4 * std::cos(6 * th)) * (1 + 0.3 * std::cos(s));
    });
    WeightedField u = green_op(ep, f);
    Eigen::MatrixXd r = apply_L(p, g, u.values, false) - f;
    EXPECT_LT(r.middleRows(4, g.ns() - 8).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_EQ(green_op(ep, Eigen::MatrixXd::Zero(g.ns(), g.nt())).values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Green, RejectsSlowDecay) {
    EndProblem ep(CatenoidParams::from_epsilon(0.05), small_config());
    try {
        green_op(ep, mode_field(ep, 2, [](double s) { return std::exp(-s); }));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::weight);
    }
}

TEST(Green, FlatModelMatchesDoubleIntegrals) {
    EndConfig cfg;
    cfg.mu = -1.5;
    EndProblem fp = EndProblem::flat(CatenoidParams::from_epsilon(0.05), cfg);
    const CylinderGrid& g = fp.grid();
    for (int n = 0; n < 5; ++n) {
        Eigen::VectorXd fn(g.ns());
        Eigen::MatrixXd F(g.ns(), g.nt());
        for (Eigen::Index i = 0; i < g.ns(); ++i) {
            fn[i] = std::exp(-2 * g.s[i]) * std::sin(2 * g.s[i]);
            F.row(i) = fn[i] * fp.projector().samples().col(n).transpose();
        }
        GreenResult G = green_op_detail(fp, F);
        EXPECT_LT((G.modes.col(n) - flat_green_oracle(fn, n, -1.5, g.s[0], g.hs, 2.0)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Green, AmplificationAgainstLeadingOrderOracle) {
    // sech^2 = 4 e^{-2s} (1 + O(e^{-2S})). For f = 4 e^{-2s} psi_2 the closed form gives
    // cosh^2(s) u_2(s) = (1 + e^{-2s})^2 (1 - e^{-(gamma - 2)(s - S)}) / (gamma^2 - 4),
    // whose sup over s >= S is 1 / (gamma^2 - 4).
    std::vector<double> le, la;
    for (double eps : {0.1, 0.05, 0.025}) {
        EndProblem ep(CatenoidParams::from_epsilon(eps));
        const double gam = ep.basis().gammas[2];
        const double amp = green_amplification(ep);
        EXPECT_NEAR(amp * (gam * gam - 4), 1.0, 3 * eps * eps);
        le.push_back(std::log(eps));
        la.push_back(std::log(amp));
    }
    const double slope = fit_slope(le, la);
    EXPECT_GE(slope, -1.2);
    EXPECT_LE(slope, -0.8);
}

TEST(Green, FrozenAmplification) {
    EXPECT_NEAR(green_amplification(EndProblem(CatenoidParams::from_epsilon(0.1))), 2.429153673, 1e-6);
    EXPECT_NEAR(green_amplification(EndProblem(CatenoidParams::from_epsilon(0.05))), 4.928132462, 1e-6);
    EXPECT_NEAR(green_amplification(EndProblem(CatenoidParams::from_epsilon(0.025))), 9.92761144, 1e-6);
}

TEST(EndSolve, ZeroDataGivesCatenoid) {
    EndProblem ep(CatenoidParams::from_epsilon(0.05));
    EndSolution s = solve_cmc_end(ep, Eigen::VectorXd::Zero(32));
    EXPECT_EQ(s.w.values.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT(s.final_H_deviation, 1e-6);
    EXPECT_TRUE(s.converged);
}

TEST(EndSolve, ModeTwoDataAtEpsilonFiveHundredths) {
    const double eps = 0.05;
    EndProblem ep(CatenoidParams::from_epsilon(eps));
    const double n2 = boundary_norm(ep.projector().samples().col(2));
    EndSolution s = solve_cmc_end(ep, mode_coefficients(ep, 2, eps * eps / n2));
    EXPECT_NEAR(s.phi_norm, eps * eps, 1e-15);
    EXPECT_TRUE(s.converged);
    EXPECT_LE(s.iterations, 20);
    EXPECT_LE(s.max_contraction(), 0.5);
    EXPECT_LT(s.final_H_deviation, 1e-4);
    // reference run
    EXPECT_EQ(s.iterations, 3);
    EXPECT_NEAR(s.leading_contraction(), 7.50722e-4, 1e-6);
    // the high modes of the trace are the prescribed data; modes 0 and 1 carry
    // the reported leakage
    Eigen::VectorXd trace = ep.projector().coefficients(s.w.values.row(0).transpose()) - s.phi;
    EXPECT_LT(trace.tail(30).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(trace[0], s.leakage0, 1e-12);
    EXPECT_NEAR(trace[1], s.leakage1, 1e-12);
}

TEST(EndSolve, ContractionBoundedByEpsilon) {
    std::vector<double> le, lc;
    for (double eps : {0.1, 0.05, 0.025}) {
        EndProblem ep(CatenoidParams::from_epsilon(eps));
        EndSolution s = solve_cmc_end(ep, mode_coefficients(ep, 2, eps * eps / boundary_norm(ep.projector().samples().col(2))));
        EXPECT_LT(s.leading_contraction() / eps, 0.1);
        le.push_back(std::log(eps));
        lc.push_back(std::log(s.leading_contraction()));
    }
    // the measured factor falls at least linearly with eps
    EXPECT_GE(fit_slope(le, lc), 0.8);
}

TEST(EndSolve, LeadingOrderLinearity) {
    const double eps = 0.05;
    EndProblem ep(CatenoidParams::from_epsilon(eps));
    const double n2 = boundary_norm(ep.projector().samples().col(2));
    std::vector<double> ratio;
    for (double a : {0.5, 0.25, 0.125}) {
        const double amp = a * eps * eps;
        EndSolution s1 = solve_cmc_end(ep, mode_coefficients(ep, 2, amp / n2));
        EndSolution s2 = solve_cmc_end(ep, mode_coefficients(ep, 2, 2 * amp / n2));
        WeightedField d = s2.w - s1.w;
        d.values -= s1.w.values;
        for (size_t n = 0; n < d.tail.size(); ++n) {
            d.tail[n].P -= s1.w.tail[n].P;
            d.tail[n].R -= s1.w.tail[n].R;
        }
        ratio.push_back(weighted_norm(d.with_order(0)) / (amp * amp));
    }
    EXPECT_LT(ratio[2], 2 * ratio[0]);
    EXPECT_GT(ratio[2], 0.5 * ratio[0]);
}

TEST(EndSolve, Preconditions) {
    EndProblem big(CatenoidParams::from_epsilon(0.3));
    EXPECT_THROW(solve_cmc_end(big, Eigen::VectorXd::Zero(32)), Error);
    EndProblem ep(CatenoidParams::from_epsilon(0.05));
    try {
        solve_cmc_end(ep, mode_coefficients(ep, 2, 0.01));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::precondition);
    }
}

TEST(EndSolve, NoContractionReported) {
    EndConfig cfg;
    cfg.max_iter = 1;
    cfg.tol = 1e-30;
    EndProblem ep(CatenoidParams::from_epsilon(0.05), cfg);
    try {
        solve_cmc_end(ep, mode_coefficients(ep, 2, 1e-3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::no_contraction);
    }
}
