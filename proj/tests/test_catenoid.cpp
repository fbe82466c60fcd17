#include <hrcmc/catenoid.hpp>
#include <hrcmc/fermi.hpp>
#include <hrcmc/verify.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

using namespace hrcmc;

TEST(Params, NecksizeFromAlpha) {
    const CatenoidParams p = CatenoidParams::from_alpha(4);
    EXPECT_NEAR(p.epsilon, std::sqrt(17.0) / 4 - 1, 1e-15);
    EXPECT_NEAR(std::pow(1 + p.epsilon, 2), 1 + 1 / 16.0, 1e-15);
    const CatenoidParams q = CatenoidParams::from_epsilon(p.epsilon);
    EXPECT_NEAR(q.alpha, 4, 1e-12);
    EXPECT_THROW(CatenoidParams::from_alpha(0), Error);
    EXPECT_THROW(CatenoidParams::from_epsilon(-0.1), Error);
}

TEST(Params, SmallNecksizeWithoutCancellation) {
    // alpha* / alpha - 1 evaluated in long double as the reference
    for (double a : {10.0, 1e3, 1e6}) {
        const long double la = a;
        const long double ref = 1.0L / (la * (std::sqrt(la * la + 1) + la));
        EXPECT_NEAR(CatenoidParams::from_alpha(a).epsilon / static_cast<double>(ref), 1.0, 1e-14);
    }
}

TEST(Profile, PhiPrime) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    EXPECT_DOUBLE_EQ(phi_prime_of_theta(p, 0), -p.alpha_star);
    EXPECT_NEAR(phi_prime_of_theta(p, pi / 2), -2, 1e-15);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0, 2 * pi);
    for (int k = 0; k < 100; ++k) {
        const double th = u(rng), pp = phi_prime_of_theta(p, th);
        EXPECT_NEAR(pp * pp - std::pow(std::cos(th), 2), 4, 1e-13);
    }
}

TEST(Profile, InitialDataAndIdentities) {
    const CatenoidParams p = CatenoidParams::from_alpha(1.5);
    const auto samples = integrate_profile(p, 0.6, 1e-11, 61);
    EXPECT_EQ(profile_at(p, 0).phi, 0.0);
    const ProfileSample a = profile_at(p, 1e-4), b = profile_at(p, -1e-4);
    EXPECT_NEAR((a.phi - b.phi) / 2e-4, -p.alpha_star, 1e-6);
    for (const auto& q : samples) {
        const double dphi = -std::sqrt(p.alpha * p.alpha + std::pow(std::cos(q.phi), 2));
        EXPECT_NEAR(-dphi * std::cos(q.phi_star), p.alpha_star * std::cos(q.phi), 1e-8);
        EXPECT_NEAR(-dphi * std::sin(q.phi_star), p.alpha * std::sin(q.phi), 1e-8);
    }
}

TEST(BallModel, HyperboloidIdentity) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-0.5, 0.5), v(-1, 1);
    for (int k = 0; k < 100; ++k) {
        BallImmersion b = immerse_ball_detail(p, u(rng), v(rng));
        EXPECT_NEAR(b.X3 * b.X3 - 1, b.X1 * b.X1 + b.X2 * b.X2, 1e-9 * b.X3 * b.X3);
    }
}

TEST(BallModel, ReflectionSymmetryInV) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    for (double u : {-0.3, 0.1, 0.4})
        for (double v : {0.2, 0.7}) {
            BallPoint a = immerse_ball(p, u, v), b = immerse_ball(p, u, -v);
            // the geodesic yt = 0 is the fixed set of (xt, yt) -> (xt, -yt)
            EXPECT_NEAR(a.xt, b.xt, 1e-12);
            EXPECT_NEAR(a.yt, -b.yt, 1e-12);
            EXPECT_NEAR(a.z, b.z, 1e-12);
        }
}

TEST(BallModel, AgreesWithHalfSpaceChart) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    for (double u : {-0.4, -0.1, 0.2, 0.5})
        for (double v : {-0.8, 0.0, 0.3, 1.1}) {
            UhpPoint a = ball_to_uhp(immerse_ball(p, u, v));
            UhpPoint b = immerse_uhp(p, p.alpha * v, -profile_at(p, u).phi);
            EXPECT_NEAR(a.x, b.x, 1e-8);
            EXPECT_NEAR(a.y, b.y, 1e-8);
            EXPECT_NEAR(a.z, b.z, 1e-8);
        }
}

TEST(Immersion, SpecialValues) {
    const CatenoidParams p = CatenoidParams::from_alpha(1);
    EXPECT_NEAR(immerse_uhp(p, 0, 0).z, 1 / (1 + std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(immerse_uhp(p, 0, 0).z, 0.414214, 1e-6);
    for (double s : {-3.0, 0.0, 2.0, 7.5}) {
        EXPECT_EQ(immerse_uhp(p, s, 0).x, 0.0);
        EXPECT_EQ(omega(p, s, 0), 1.0);
        for (double th : {0.5, 1.6, 4.0}) {
            EXPECT_GT(omega(p, s, th), 0.0);
            EXPECT_LE(omega(p, s, th), 1.0);
        }
    }
}

TEST(Metric, DiagonalAndRatio) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    for (double th : {0.0, 0.4, pi / 2, 2.5}) {
        const Sym2 g = metric_closed_form(p, 0.7, th);
        EXPECT_EQ(g.st, 0.0);
        const double c = std::cos(th);
        EXPECT_NEAR(g.tt / g.ss, 4 / (4 + c * c), 1e-15);
        EXPECT_LE(g.tt / g.ss, 1.0);
    }
    EXPECT_NEAR(metric_closed_form(p, 0.7, pi / 2).tt / metric_closed_form(p, 0.7, pi / 2).ss, 1.0, 1e-15);
}

TEST(Metric, FiniteDifferenceFirstFundamentalForm) {
    const CatenoidGridErrors e = catenoid_grid_errors(CatenoidParams::from_alpha(2), 64);
    EXPECT_LT(e.metric, 1e-4);
    const CatenoidGridErrors f = catenoid_grid_errors(CatenoidParams::from_alpha(2), 128);
    EXPECT_LT(f.metric, 1e-5);
    // fourth-order convergence in s
    EXPECT_GT(e.metric / f.metric, 10.0);
}

TEST(Curvature, AmbientSectionalValues) {
    EXPECT_DOUBLE_EQ(ambient_sectional(0, 0), -1.0);
    for (double s : {-2.0, 0.3, 5.0}) EXPECT_NEAR(ambient_sectional(s, pi / 2), 0.0, 1e-30);
}

TEST(Curvature, AmbientMatchesTangentPlane) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> us(-3, 3), ut(0, 2 * pi);
    for (double a : {1.0, 2.0, 4.0}) {
        const CatenoidParams p = CatenoidParams::from_alpha(a);
        for (int k = 0; k < 100; ++k) {
            const double s = us(rng), th = ut(rng);
            const LocalGeometry lg = catenoid_geometry(p, s, th);
            EXPECT_NEAR(sectional_curvature(lg.normal), ambient_sectional(s, th), 1e-6);
        }
    }
}

TEST(Curvature, GaussEquationAndBrioschi) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    auto metric = [&](double a, double b) { return metric_closed_form(p, a, b); };
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> us(-2.5, 2.5), ut(0, 2 * pi);
    for (int k = 0; k < 40; ++k) {
        const double s = us(rng), th = ut(rng);
        const LocalGeometry lg = catenoid_geometry(p, s, th);
        const double K = intrinsic_curvature(p, s, th);
        EXPECT_NEAR(ambient_sectional(s, th) - K + lg.kappa1 * lg.kappa2, 0.0, 1e-6);
        EXPECT_NEAR(brioschi(metric, s, th), K, 1e-5 * std::max(1.0, std::abs(K)));
    }
}

TEST(Curvature, PrincipalCurvaturesSumToOne) {
    const CatenoidParams p = CatenoidParams::from_alpha(4);
    for (double s : {-1.0, 0.0, 2.0, 6.0})
        for (double th : {0.1, 1.2, 3.0}) {
            auto [k1, k2] = principal_curvatures(p, s, th);
            EXPECT_NEAR(k1 + k2, 1.0, 1e-14);
            const LocalGeometry lg = catenoid_geometry(p, s, th);
            EXPECT_NEAR(std::max(lg.kappa1, lg.kappa2), k1, 1e-8);
            EXPECT_NEAR(std::min(lg.kappa1, lg.kappa2), k2, 1e-8);
        }
}

TEST(Curvature, EndDecayBoundRatioStable) {
    // |K_Sigma - K_amb| against eps^{-2} cosh^{-4} s + eps^{-1} cosh^{-2} s on the end
    std::vector<double> ratios;
    for (double a : {4.0, 8.0, 16.0}) {
        const CatenoidParams p = CatenoidParams::from_alpha(a);
        const double S = truncation_S(p.epsilon);
        double worst = 0;
        for (double s = S; s <= S + 4; s += 0.25)
            for (double th = 0; th < 2 * pi; th += 0.3) {
                const double ch = std::cosh(s);
                const double bound = 1 / (p.epsilon * p.epsilon * std::pow(ch, 4)) + 1 / (p.epsilon * ch * ch);
                worst = std::max(worst, std::abs(intrinsic_curvature(p, s, th) - ambient_sectional(s, th)) / bound);
            }
        ratios.push_back(worst);
    }
    for (double r : ratios) EXPECT_LT(r, 5.0);
    EXPECT_LT(ratios.back() / ratios.front(), 2.0);
}

TEST(Truncation, Values) {
    EXPECT_NEAR(truncation_S(0.1), 2.993222846126381, 1e-12);
    for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) {
        EXPECT_NEAR(e * std::cosh(truncation_S(e)), 1.0, 1e-14);
        const double gap = truncation_S(e) - std::abs(std::log(e));
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, std::log(2.0) + 1e-3);
    }
    EXPECT_THROW(truncation_S(1.5), Error);
}

TEST(HorizontalGraph, HorocylinderLimitRatioStable) {
    // frozen from the reference run; the ratio must stay bounded as eps halves
    EXPECT_NEAR(horocylinder_ratio(0.05), 1.110479613, 1e-6);
    EXPECT_NEAR(horocylinder_ratio(0.025), 0.9561311135, 1e-6);
    EXPECT_NEAR(horocylinder_ratio(0.0125), 0.8622437984, 1e-6);
}

TEST(HorizontalGraph, DominantTermsIndependentOfDirection) {
    for (double eps : {0.05, 0.025}) {
        const CatenoidParams p = CatenoidParams::from_epsilon(eps);
        HorizontalGraphSamples hg = horizontal_graph_extract(p, {0.5, 1.0, 2.0}, {0.2, 0.7, 1.2, 1.5});
        const double scale = std::pow(eps * std::log(eps), 2);
        for (Eigen::Index i = 0; i < hg.g.rows(); ++i) {
            const double mean = hg.g.row(i).mean();
            EXPECT_LT((hg.g.row(i).array() - mean).abs().maxCoeff() / scale, 5.0);
        }
        // samples land where requested
        for (Eigen::Index i = 0; i < hg.g.rows(); ++i)
            for (Eigen::Index j = 0; j < hg.g.cols(); ++j) {
                UhpPoint q = immerse_uhp(p, hg.s(i, j), hg.theta(i, j));
                EXPECT_NEAR(std::hypot(q.x, q.z), hg.r_values[i], 1e-9);
                EXPECT_NEAR(std::atan2(q.x, q.z), hg.gamma_values[j], 1e-9);
            }
    }
}

TEST(HorizontalGraph, BoundaryCurveExpansion) {
    std::vector<double> ry;
    for (double eps : {0.05, 0.025, 0.0125}) {
        const CatenoidParams p = CatenoidParams::from_epsilon(eps);
        const double S = truncation_S(eps), L = std::abs(eps * std::log(eps));
        double ex = 0, ey = 0, ez = 0;
        for (double th = 0; th < 2 * pi; th += 0.2) {
            UhpPoint q = immerse_uhp(p, S, th);
            ex = std::max(ex, std::abs(q.x - std::sin(th)) / L);
            ey = std::max(ey, std::abs(q.y - (1 - eps * std::log(eps))) / eps);
            ez = std::max(ez, std::abs(q.z - std::cos(th)) / eps);
        }
        EXPECT_LT(ex, 3.0);
        EXPECT_LT(ez, 3.0);
        ry.push_back(ey);
    }
    EXPECT_LT(ry.back(), 2 * ry.front());
}

class MeshExport : public ::testing::Test {
protected:
    // one directory per test so that parallel ctest runs do not share files
    std::filesystem::path dir;
    void SetUp() override {
        dir = std::filesystem::temp_directory_path() /
              (std::string("hrcmc_mesh_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::create_directories(dir);
    }
    void TearDown() override { std::filesystem::remove_all(dir); }
};

TEST_F(MeshExport, ObjCombinatorics) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    // closed theta interval: no seam to wrap
    SurfaceGrid g = build_surface_grid(p, uniform_grid(-2, 2, 32), uniform_grid(0, 2 * pi, 32));
    const std::string path = (dir / "c.obj").string();
    export_mesh(g, MeshFormat::obj, Model::uhp, path);
    std::ifstream in(path);
    int v = 0, f = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) ++v;
        if (line.rfind("f ", 0) == 0) ++f;
    }
    EXPECT_EQ(v, 1024);
    EXPECT_EQ(f, 2 * 31 * 31);
    // periodic theta grid closes the seam
    SurfaceGrid h = build_surface_grid(p, uniform_grid(-2, 2, 32), periodic_grid(32));
    export_mesh(h, MeshFormat::obj, Model::uhp, path);
    std::ifstream in2(path);
    f = 0;
    while (std::getline(in2, line))
        if (line.rfind("f ", 0) == 0) ++f;
    EXPECT_EQ(f, 2 * 31 * 32);
}

TEST_F(MeshExport, CsvRoundTripBitExact) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    SurfaceGrid g = build_surface_grid(p, uniform_grid(-1, 1, 9), periodic_grid(8));
    const std::string path = (dir / "c.csv").string();
    export_mesh(g, MeshFormat::csv, Model::uhp, path);
    auto rows = read_mesh_csv(path);
    ASSERT_EQ(rows.size(), g.points.size());
    for (size_t i = 0; i < g.ns(); ++i)
        for (size_t j = 0; j < g.nt(); ++j) {
            const size_t k = g.index(i, j);
            EXPECT_EQ(rows[k][0], g.s_values[i]);
            EXPECT_EQ(rows[k][2], g.points[k].x);
            EXPECT_EQ(rows[k][3], g.points[k].y);
            EXPECT_EQ(rows[k][4], g.points[k].z);
            EXPECT_EQ(rows[k][5], g.kappa1[k]);
        }
}

TEST_F(MeshExport, BallModelInsideDisc) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    SurfaceGrid g = build_surface_grid(p, uniform_grid(-4, 4, 24), periodic_grid(24));
    const std::string path = (dir / "b.csv").string();
    export_mesh(g, MeshFormat::csv, Model::ball, path);
    for (const auto& r : read_mesh_csv(path)) EXPECT_LT(r[2] * r[2] + r[3] * r[3], 1.0);
}

TEST_F(MeshExport, UnwritablePath) {
    const CatenoidParams p = CatenoidParams::from_alpha(2);
    SurfaceGrid g = build_surface_grid(p, uniform_grid(-1, 1, 4), periodic_grid(4));
    EXPECT_THROW(export_mesh(g, MeshFormat::obj, Model::uhp, (dir / "missing" / "x.obj").string()), Error);
}
