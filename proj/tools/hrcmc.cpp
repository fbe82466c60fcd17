// Command-line driver: verification suites, sweeps, mesh export and the two
// solvers. Exit status is 0 iff every requested check passes.

#include <hrcmc/verify.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace hrcmc;
using ojson = nlohmann::ordered_json;

namespace {

struct Common {
    std::optional<double> alpha, epsilon, s_max, tol;
    std::optional<int> modes, grid;
    std::string out, config, model = "uhp", format = "json";
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--alpha", c.alpha, "catenoid parameter alpha > 0");
    app->add_option("--epsilon", c.epsilon, "necksize epsilon > 0");
    app->add_option("--s-max", c.s_max, "length of the end grid beyond S_eps");
    app->add_option("--modes", c.modes, "cross-sectional Galerkin modes");
    app->add_option("--grid", c.grid, "grid points per direction");
    app->add_option("--tol", c.tol, "solver tolerance");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--config", c.config, "JSON config file");
    app->add_option("--model", c.model, "uhp or ball")->check(CLI::IsMember({"uhp", "ball"}));
    app->add_option("--format", c.format, "json, csv or obj")->check(CLI::IsMember({"json", "csv", "obj"}));
}

VerifyConfig make_config(const Common& c) {
    VerifyConfig cfg;
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        if (!in) throw Error(ErrorKind::config, "cannot open config " + c.config);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw Error(ErrorKind::config, std::string("config parse error: ") + e.what());
        }
        cfg = VerifyConfig::from_json(j);
    }
    if (c.alpha) cfg.alpha = *c.alpha;
    if (c.epsilon) cfg.epsilon = *c.epsilon;
    if (c.s_max) cfg.s_max_offset = *c.s_max;
    if (c.modes) cfg.modes = *c.modes;
    if (c.grid) {
        cfg.grid = *c.grid;
        cfg.graph_n = *c.grid;
    }
    if (c.tol) cfg.end_tol = *c.tol;
    return cfg;
}

std::string out_path(const Common& c, const std::string& name) {
    std::filesystem::path dir = c.out.empty() ? "." : c.out;
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::io, "cannot open " + path);
    f << text;
}

Model model_of(const Common& c) { return c.model == "ball" ? Model::ball : Model::uhp; }

CatenoidParams params_of(const Common& c, const VerifyConfig& cfg, bool prefer_epsilon) {
    if (c.alpha && !c.epsilon) return CatenoidParams::from_alpha(*c.alpha);
    if (c.epsilon) return CatenoidParams::from_epsilon(*c.epsilon);
    return prefer_epsilon ? CatenoidParams::from_epsilon(cfg.epsilon) : CatenoidParams::from_alpha(cfg.alpha);
}

std::vector<double> parse_values(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    return v;
}

int cmd_verify(const Common& c, const std::string& suite) {
    const VerifyConfig cfg = make_config(c);
    const SuiteReport r = run_suite(suite, cfg);
    for (const auto& k : r.checks)
        std::printf("%-4s %-36s %-12.4e %-14s %-10.3e %s\n", k.pass ? "PASS" : "FAIL", k.tag.c_str(), k.computed,
                    k.relation.c_str(), k.bound, k.quantity.c_str());
    ojson j = to_json(r, cfg.timing);
    j["config"] = cfg.to_json();
    if (!c.out.empty()) write_text(out_path(c, "verify_" + suite + ".json"), j.dump(2) + "\n");
    std::printf("%s: %s\n", suite.c_str(), r.pass() ? "all checks passed" : "FAILED");
    return r.pass() ? 0 : 1;
}

int cmd_sweep(const Common& c, const std::string& parameter, const std::string& values, const std::string& suite) {
    const SweepTable t = sweep(parameter, parse_values(values), suite, make_config(c));
    const std::string csv = t.csv();
    if (!c.out.empty()) write_text(out_path(c, "sweep_" + suite + "_" + parameter + ".csv"), csv);
    std::cout << csv;
    return 0;
}

int cmd_mesh(const Common& c) {
    const VerifyConfig cfg = make_config(c);
    const CatenoidParams p = params_of(c, cfg, false);
    const double S = truncation_S(p.epsilon);
    const double half = c.s_max ? *c.s_max : S;
    SurfaceGrid g = build_surface_grid(p, uniform_grid(-half, half, cfg.grid), periodic_grid(cfg.grid));
    const bool obj = c.format == "obj";
    const std::string path = out_path(c, std::string("catenoid_") + c.model + (obj ? ".obj" : ".csv"));
    export_mesh(g, obj ? MeshFormat::obj : MeshFormat::csv, model_of(c), path);
    std::printf("wrote %s (alpha = %.6g, epsilon = %.6g, s in [-%.4g, %.4g])\n", path.c_str(), p.alpha, p.epsilon,
                half, half);
    return 0;
}

int cmd_spectrum(const Common& c) {
    const VerifyConfig cfg = make_config(c);
    const CatenoidParams p = params_of(c, cfg, false);
    const SpectralBasis b = assemble_cross_section(p, cfg.modes);
    indicial_roots(b);
    if (c.format == "csv") {
        std::ostringstream os;
        os.precision(17);
        os << "n,lambda,gamma\n";
        for (int n = 0; n < b.n_modes; ++n) os << n << ',' << b.lambdas[n] << ',' << b.gammas[n] << '\n';
        if (!c.out.empty()) write_text(out_path(c, "spectrum.csv"), os.str());
        std::cout << os.str();
    } else {
        ojson j{{"alpha", p.alpha}, {"epsilon", p.epsilon}, {"modes", b.n_modes}, {"asymmetry", b.asymmetry},
                {"lambda", b.lambdas}, {"gamma", b.gammas}};
        if (!c.out.empty()) write_text(out_path(c, "spectrum.json"), j.dump(2) + "\n");
        std::cout << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_solve_end(const Common& c, double amplitude, int mode) {
    const VerifyConfig cfg = make_config(c);
    const CatenoidParams p = params_of(c, cfg, true);
    EndProblem ep(p, cfg.end_config());
    require(mode >= 2 && mode < cfg.modes, ErrorKind::precondition, "boundary mode must be in [2, modes)");
    const double n2 = boundary_norm(ep.projector().samples().col(mode));
    const double amp = amplitude < 0 ? p.epsilon * p.epsilon : amplitude;
    const EndSolution s = solve_cmc_end(ep, mode_coefficients(ep, mode, amp / n2));
    ojson j{{"alpha", p.alpha},
            {"epsilon", p.epsilon},
            {"phi_norm", s.phi_norm},
            {"iterations", s.iterations},
            {"contraction_factors", s.contraction_factors},
            {"step_norms", s.step_norms},
            {"final_H_deviation", s.final_H_deviation},
            {"low_mode_leakage", {{"n0", s.leakage0}, {"n1", s.leakage1}}},
            {"w_norm", s.w_norm},
            {"remainder_cutoff_s", s.remainder_cutoff_s}};
    std::cout << j.dump(2) << "\n";
    if (!c.out.empty()) {
        write_text(out_path(c, "end_solution.json"), j.dump(2) + "\n");
        const CylinderGrid& g = ep.grid();
        std::ostringstream os;
        os.precision(17);
        os << "s,theta,w\n";
        for (Eigen::Index i = 0; i < g.ns(); ++i)
            for (Eigen::Index k = 0; k < g.nt(); ++k) os << g.s[i] << ',' << g.theta[k] << ',' << s.w.values(i, k) << '\n';
        write_text(out_path(c, "end_w.csv"), os.str());
        ImmersionGrid surf = normal_graph_immerse(p, {g, s.w.values});
        export_immersion(surf, MeshFormat::obj, model_of(c), out_path(c, "end_surface.obj"));
    }
    return 0;
}

int cmd_solve_graph(const Common& c, const std::string& domain_file, double psi_out, std::vector<double> psi_in,
                    double smallness) {
    const VerifyConfig cfg = make_config(c);
    double r = 1;
    std::vector<Hole> holes{{0.0, 0.3}};
    double h = r / cfg.graph_n;
    if (!domain_file.empty()) {
        std::ifstream in(domain_file);
        if (!in) throw Error(ErrorKind::config, "cannot open domain " + domain_file);
        nlohmann::json j;
        in >> j;
        r = j.value("r", 1.0);
        holes.clear();
        for (const auto& x : j.value("holes", nlohmann::json::array())) holes.push_back({x.at("x"), x.at("r")});
        h = j.value("h", r / cfg.graph_n);
    }
    if (psi_in.empty()) psi_in.assign(holes.size(), 0.0);
    require(psi_in.size() == holes.size(), ErrorKind::config, "one psi_in value per hole required");
    PlanarDomain d(r, holes, h);
    GraphConfig gc;
    gc.smallness = smallness;
    if (c.tol) gc.tol = *c.tol;
    const GraphSolution s = solve_dirichlet(d, DirichletData::constant(psi_out, psi_in), gc);
    ojson j{{"unknowns", d.unknowns()},
            {"h", d.h()},
            {"steps", s.steps},
            {"newton_steps", s.newton_steps},
            {"residuals", s.residuals},
            {"g_min", s.gf.g.minCoeff()},
            {"g_max", s.gf.g.maxCoeff()}};
    std::cout << j.dump(2) << "\n";
    if (!c.out.empty()) {
        write_text(out_path(c, "graph_report.json"), j.dump(2) + "\n");
        std::ostringstream os;
        os.precision(17);
        os << "x,z,g\n";
        for (int m = 0; m < d.unknowns(); ++m) {
            auto [i, k] = d.node(m);
            os << d.x(i) << ',' << d.z(k) << ',' << s.gf.g[m] << '\n';
        }
        write_text(out_path(c, "graph_solution.csv"), os.str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cmc 1/2 catenoid ends and horizontal graphs in H^2 x R"};
    app.require_subcommand(1);
    Common c;

    std::string suite = "all";
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite, "geometry | catenoid | fermi | spectral | linear | end | graph | all")
        ->check(CLI::IsMember({"geometry", "catenoid", "fermi", "spectral", "linear", "end", "graph", "all"}));
    add_common(verify, c);

    std::string parameter = "epsilon", values = "0.1,0.05,0.025", sweep_suite = "end";
    auto* sw = app.add_subcommand("sweep", "tabulate tracked quantities against alpha or epsilon");
    sw->add_option("--parameter", parameter)->check(CLI::IsMember({"alpha", "epsilon"}));
    sw->add_option("--values", values, "comma-separated sorted values");
    sw->add_option("--suite", sweep_suite)->check(CLI::IsMember({"spectral", "linear", "end", "catenoid"}));
    add_common(sw, c);

    auto* mesh = app.add_subcommand("mesh", "export the catenoid mesh");
    add_common(mesh, c);

    auto* spectrum = app.add_subcommand("spectrum", "cross-sectional eigenvalues and indicial roots");
    add_common(spectrum, c);

    double amplitude = -1;
    int mode = 2;
    auto* se = app.add_subcommand("solve-end", "construct a cmc 1/2 end with boundary data amplitude * psi_mode");
    se->add_option("--amplitude", amplitude, "C^2 norm of the boundary data (default eps^2)");
    se->add_option("--mode", mode, "boundary mode n >= 2");
    add_common(se, c);

    std::string domain;
    double psi_out = 0.05 * std::abs(std::log(0.05)), smallness = 0.2;
    std::vector<double> psi_in;
    auto* sg = app.add_subcommand("solve-graph", "solve M(g) = 1 with g = 1 + psi on the boundary");
    sg->add_option("--domain", domain, "domain JSON {r, holes: [{x, r}], h}");
    sg->add_option("--psi-out", psi_out, "constant boundary value on the outer circle");
    sg->add_option("--psi-in", psi_in, "constant boundary values on the holes");
    sg->add_option("--smallness", smallness, "largest admissible sup |psi|");
    add_common(sg, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage errors share exit status 2 with bad configs; --help stays 0
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (*verify) return cmd_verify(c, suite);
        if (*sw) return cmd_sweep(c, parameter, values, sweep_suite);
        if (*mesh) return cmd_mesh(c);
        if (*spectrum) return cmd_spectrum(c);
        if (*se) return cmd_solve_end(c, amplitude, mode);
        if (*sg) return cmd_solve_graph(c, domain, psi_out, psi_in, smallness);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
