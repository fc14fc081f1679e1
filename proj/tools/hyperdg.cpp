// hyperdg: command-line driver for meshes, solves and convergence studies.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hyperdg/errors.hpp"
#include "hyperdg/expcli.hpp"
#include "hyperdg/norms.hpp"

using namespace hyperdg;

namespace {

Point parse_beta(const std::string& text)
{
    Point b{0, 0, 0};
    std::stringstream ss(text);
    std::string cell;
    int i = 0;
    while (std::getline(ss, cell, ',')) {
        if (i >= 3) throw std::invalid_argument("--beta takes at most 3 components");
        b[i++] = std::stod(cell);
    }
    if (i == 0) throw std::invalid_argument("--beta is empty");
    return b;
}

int check_mesh(const std::string& path, const std::string& beta_text)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open mesh " + path);
    const Mesh mesh = load_mesh(in);
    const auto beta = ConvectionField::uniform(parse_beta(beta_text));
    const auto rep = check_admissible(mesh, beta);
    std::size_t a1_fail = 0, a2_fail = 0;
    for (bool ok : rep.a1_ok) a1_fail += !ok;
    for (const auto& c : rep.a2) a2_fail += !c.a2_ok;
    std::printf("dim %d, %zu vertices, %zu elements, %zu facets, h = %.6g, sigma = %.6g\n", mesh.dim(),
                mesh.vertices().size(), mesh.n_elements(), mesh.facets().size(), mesh.h(), mesh.sigma());
    std::printf("A1 failures: %zu\n", a1_fail);
    for (std::size_t e = 0; e < rep.a1_ok.size(); ++e)
        if (!rep.a1_ok[e]) std::printf("  element %zu: %d outflow facets\n", e, rep.outflow_facet_count[e]);
    std::printf("A2 failures: %zu of %zu interior inflow facets\n", a2_fail, rep.a2.size());
    if (!rep.cycle.empty()) {
        std::printf("upwind cycle:");
        for (int e : rep.cycle) std::printf(" %d", e);
        std::printf("\n");
    } else {
        std::printf("upwind order: %zu elements\n", rep.upwind_order.size());
    }
    std::printf("admissible: %s\n", rep.verdict ? "yes" : "no");
    return rep.verdict ? 0 : 3;
}

int solve(const std::string& config_path, int p_override)
{
    StudyConfig cfg = load_config(config_path);
    if (cfg.study == StudyCase::projector_study) throw std::invalid_argument("solve: projector_study has no PDE solve");
    cfg.p_min = cfg.p_max = p_override > 0 ? p_override : cfg.p_max;
    cfg.output.clear();
    const auto rec = run_convergence(cfg).front();
    std::printf("p = %d, dofs = %zu, solver = %s, residual = %.3e\n", rec.p, rec.dofs, rec.solver.c_str(), rec.residual);
    std::printf("L2 error = %.17g\nDG error = %.17g\nwall time = %.3f s\n", rec.error_l2, rec.error_dg, rec.wall_time);
    return rec.solver == "failed" ? 4 : 0;
}

int convergence(const std::string& config_path, const std::string& out, bool quiet)
{
    StudyConfig cfg = load_config(config_path);
    if (!out.empty()) cfg.output = out;
    if (cfg.output.empty()) throw std::invalid_argument("convergence: no output path (--out or \"output\")");
    if (cfg.study == StudyCase::projector_study) {
        run_projector_study(cfg);
    } else {
        run_convergence(cfg, quiet ? nullptr : &std::cerr);
    }
    std::printf("wrote %s\n", cfg.output.c_str());
    return 0;
}

int projector_study(const std::string& config_path, const std::string& out)
{
    StudyConfig cfg = load_config(config_path);
    if (!out.empty()) cfg.output = out;
    if (cfg.output.empty()) throw std::invalid_argument("projector-study: no output path (--out or \"output\")");
    run_projector_study(cfg);
    std::printf("wrote %s\n", cfg.output.c_str());
    return 0;
}

int rates(const std::string& in, const std::string& which, int pmin, int pmax)
{
    const auto records = read_convergence_csv(in);
    if (records.empty()) throw std::invalid_argument("rates: no records in " + in);
    if (pmin <= 0) pmin = std::max(8, records.front().p + static_cast<int>(records.size()) / 2);
    if (pmax <= 0) pmax = records.back().p;
    const auto fit = fit_rate(records, pmin, pmax, which == "dg" ? ErrorKind::dg : ErrorKind::l2);
    std::printf("window [%d, %d]  slope %.6f  intercept %.6f  r^2 %.6f\n", fit.p_min, fit.p_max, fit.slope,
                fit.intercept, fit.r_squared);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hp upwind DG for steady transport on simplicial meshes"};
    app.require_subcommand(1);

    std::string mesh_path, beta = "1,1";
    auto* cm = app.add_subcommand("check-mesh", "Report admissibility of a mesh for a constant field");
    cm->add_option("--mesh", mesh_path, "Mesh file")->required();
    cm->add_option("--beta", beta, "Convection field, e.g. 1,1");

    std::string config;
    int p = 0;
    auto* sv = app.add_subcommand("solve", "Solve one configuration at a single degree");
    sv->add_option("--config", config, "JSON study config")->required();
    sv->add_option("--p", p, "Degree (default: upper end of p_range)");

    std::string out;
    bool quiet = false;
    auto* cv = app.add_subcommand("convergence", "Run a p-convergence study and write a CSV");
    cv->add_option("--config", config, "JSON study config")->required();
    cv->add_option("--out", out, "CSV output path (overrides config)");
    cv->add_flag("--quiet", quiet, "No per-degree progress on stderr");

    auto* ps = app.add_subcommand("projector-study", "Projection errors on the reference triangle");
    ps->add_option("--config", config, "JSON study config")->required();
    ps->add_option("--out", out, "CSV output path (overrides config)");

    std::string in, which = "l2";
    int pmin = 0, pmax = 0;
    auto* rt = app.add_subcommand("rates", "Fit log(error) against log(p)");
    rt->add_option("--in", in, "Convergence CSV")->required();
    rt->add_option("--which", which, "l2 or dg")->check(CLI::IsMember({"l2", "dg"}));
    rt->add_option("--pmin", pmin, "Window start");
    rt->add_option("--pmax", pmax, "Window end");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*cm) return check_mesh(mesh_path, beta);
        if (*sv) return solve(config, p);
        if (*cv) return convergence(config, out, quiet);
        if (*ps) return projector_study(config, out);
        if (*rt) return rates(in, which, pmin, pmax);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
