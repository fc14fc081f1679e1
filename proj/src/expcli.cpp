#include "hyperdg/expcli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hyperdg/errors.hpp"
#include "hyperdg/norms.hpp"
#include "hyperdg/projectors.hpp"
#include "json.hpp"

namespace hyperdg {

using nlohmann::json;

namespace {

const char* case_name(StudyCase c)
{
    switch (c) {
    case StudyCase::testcase1: return "testcase1";
    case StudyCase::testcase2: return "testcase2";
    case StudyCase::manufactured: return "manufactured";
    default: return "projector_study";
    }
}

const char* solver_name(SolverChoice s)
{
    switch (s) {
    case SolverChoice::sweep: return "sweep";
    case SolverChoice::global: return "global";
    default: return "auto";
    }
}

const char* diagonal_name(Diagonal d) { return d == Diagonal::against_flow ? "against_flow" : "with_flow"; }

template <class T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("config key '") + key + "': " + e.what());
    }
}

std::string fmt17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomic(const std::string& path, const std::string& body)
{
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << body;
        if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace

StudyConfig parse_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    StudyConfig c;
    const std::string study = get_or<std::string>(j, "case", "testcase1");
    if (study == "testcase1") c.study = StudyCase::testcase1;
    else if (study == "testcase2") c.study = StudyCase::testcase2;
    else if (study == "manufactured") c.study = StudyCase::manufactured;
    else if (study == "projector_study") c.study = StudyCase::projector_study;
    else throw ParseError("unknown case '" + study + "'");

    c.alpha = get_or<double>(j, "alpha", c.alpha);
    if (!(c.alpha > 0)) throw ParseError("alpha must be positive");

    if (j.contains("mesh")) {
        const json& m = j.at("mesh");
        if (m.is_string()) {
            c.mesh.path = m.get<std::string>();
        } else if (m.is_object()) {
            c.mesh.nx = get_or<int>(m, "nx", c.mesh.nx);
            c.mesh.ny = get_or<int>(m, "ny", c.mesh.ny);
            const std::string d = get_or<std::string>(m, "diagonal", "against_flow");
            if (d == "against_flow") c.mesh.diagonal = Diagonal::against_flow;
            else if (d == "with_flow") c.mesh.diagonal = Diagonal::with_flow;
            else throw ParseError("unknown diagonal '" + d + "'");
            if (c.mesh.nx < 1 || c.mesh.ny < 1) throw ParseError("mesh nx, ny must be >= 1");
        } else {
            throw ParseError("mesh must be a file path or an object {nx, ny, diagonal}");
        }
    }
    if (j.contains("p_range")) {
        const auto r = get_or<std::vector<int>>(j, "p_range", {});
        if (r.size() != 2) throw ParseError("p_range must be [p_min, p_max]");
        c.p_min = r[0];
        c.p_max = r[1];
    }
    if (c.p_min < 1 || c.p_max > 40 || c.p_min > c.p_max) throw ParseError("p_range must lie within [1, 40]");

    const std::string solver = get_or<std::string>(j, "solver", "auto");
    if (solver == "sweep") c.solver = SolverChoice::sweep;
    else if (solver == "global") c.solver = SolverChoice::global;
    else if (solver == "auto") c.solver = SolverChoice::automatic;
    else throw ParseError("unknown solver '" + solver + "'");

    c.quadrature_margin = get_or<int>(j, "quadrature_margin", c.quadrature_margin);
    if (c.quadrature_margin < 0) throw ParseError("quadrature_margin must be >= 0");
    c.singular_refine_levels = get_or<int>(j, "singular_refine_levels", c.singular_refine_levels);
    c.output = get_or<std::string>(j, "output", "");
    if (j.contains("manufactured_degree")) {
        c.manufactured_degree = get_or<int>(j, "manufactured_degree", 3);
        if (*c.manufactured_degree < 0) throw ParseError("manufactured_degree must be >= 0");
    }
    return c;
}

std::string serialize_config(const StudyConfig& c)
{
    json j;
    j["case"] = case_name(c.study);
    j["alpha"] = c.alpha;
    if (!c.mesh.path.empty())
        j["mesh"] = c.mesh.path;
    else
        j["mesh"] = {{"nx", c.mesh.nx}, {"ny", c.mesh.ny}, {"diagonal", diagonal_name(c.mesh.diagonal)}};
    j["p_range"] = {c.p_min, c.p_max};
    j["solver"] = solver_name(c.solver);
    j["quadrature_margin"] = c.quadrature_margin;
    j["singular_refine_levels"] = c.singular_refine_levels;
    j["output"] = c.output;
    if (c.manufactured_degree) j["manufactured_degree"] = *c.manufactured_degree;
    return j.dump(2);
}

StudyConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

double singular_part(double alpha, double x) { return x > 0 ? std::pow(x, alpha) : 0.0; }

ScalarField testcase_u(double alpha)
{
    return [alpha](const Point& x) { return std::cos(std::numbers::pi * x[1] / 2) + singular_part(alpha, x[0]); };
}

Point testcase_grad(double alpha, const Point& x)
{
    const double ux = x[0] > 0 ? alpha * std::pow(x[0], alpha - 1) : 0.0;
    return {ux, -std::numbers::pi / 2 * std::sin(std::numbers::pi * x[1] / 2), 0};
}

}  // namespace

TestCase build_testcase1(double alpha)
{
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
    TestCase t;
    t.exact = testcase_u(alpha);
    ProblemSpec& s = t.spec;
    s.beta = ConvectionField::uniform({1, 1, 0});
    s.c = [](const Point&) { return 1.0; };
    s.c_constant = true;
    s.f = [alpha, u = t.exact](const Point& x) {
        const Point g = testcase_grad(alpha, x);
        return g[0] + g[1] + u(x);
    };
    s.g = t.exact;
    s.cbar0 = 1.0;
    s.singular_x = 0.0;
    return t;
}

TestCase build_testcase2(double alpha)
{
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
    TestCase t;
    t.exact = testcase_u(alpha);
    ProblemSpec& s = t.spec;
    s.beta = ConvectionField{[](const Point& x) { return Point{2 - x[1] * x[1], 2 - x[0], 0}; }, false};
    s.c = [](const Point& x) { return 1 + (1 + x[0]) * (1 + x[1] * x[1]); };
    s.c_constant = false;
    s.f = [alpha, u = t.exact, beta = s.beta, c = s.c](const Point& x) {
        return dot(beta(x), testcase_grad(alpha, x)) + c(x) * u(x);
    };
    s.g = t.exact;
    // div beta = 0 and c >= 1 on the square.
    s.cbar0 = 1.0;
    s.singular_x = 0.0;
    return t;
}

TestCase build_manufactured(int degree)
{
    if (degree < 0) throw std::invalid_argument("degree must be nonnegative");
    // u = sum_{i+j<=d} x^i y^j / (1 + i + 2j)
    const auto term = [](int i, int j) { return 1.0 / (1 + i + 2 * j); };
    TestCase t;
    t.exact = [degree, term](const Point& x) {
        double s = 0;
        for (int i = 0; i <= degree; ++i)
            for (int j = 0; i + j <= degree; ++j) s += term(i, j) * std::pow(x[0], i) * std::pow(x[1], j);
        return s;
    };
    ProblemSpec& s = t.spec;
    s.beta = ConvectionField::uniform({1, 1, 0});
    s.c = [](const Point&) { return 1.0; };
    s.c_constant = true;
    s.f = [degree, term, u = t.exact](const Point& x) {
        double d = 0;
        for (int i = 0; i <= degree; ++i)
            for (int j = 0; i + j <= degree; ++j) {
                if (i > 0) d += term(i, j) * i * std::pow(x[0], i - 1) * std::pow(x[1], j);
                if (j > 0) d += term(i, j) * j * std::pow(x[0], i) * std::pow(x[1], j - 1);
            }
        return d + u(x);
    };
    s.g = t.exact;
    s.cbar0 = 1.0;
    return t;
}

std::shared_ptr<const Mesh> make_mesh(const MeshSource& source)
{
    if (source.path.empty()) return std::make_shared<const Mesh>(gen_structured(source.nx, source.ny, source.diagonal));
    std::ifstream in(source.path);
    if (!in) throw ParseError("cannot open mesh " + source.path);
    return std::make_shared<const Mesh>(load_mesh(in));
}

std::vector<ConvergenceRecord> run_convergence(const StudyConfig& config, std::ostream* log)
{
    TestCase tc;
    switch (config.study) {
    case StudyCase::testcase1: tc = build_testcase1(config.alpha); break;
    case StudyCase::testcase2: tc = build_testcase2(config.alpha); break;
    case StudyCase::manufactured: tc = build_manufactured(config.manufactured_degree.value_or(3)); break;
    default: throw std::invalid_argument("run_convergence: use run_projector_study for projector_study configs");
    }
    const auto mesh = make_mesh(config.mesh);
    std::optional<AdmissibilityReport> report;
    if (tc.spec.beta.constant) report = check_admissible(*mesh, tc.spec.beta);
    const bool admissible = report && report->verdict;
    if (config.solver == SolverChoice::sweep && !admissible)
        throw std::invalid_argument("mesh is not admissible for this convection field; use \"solver\": \"auto\"");
    const bool use_sweep = config.solver == SolverChoice::sweep || (config.solver == SolverChoice::automatic && admissible);

    std::vector<ConvergenceRecord> records;
    for (int p = config.p_min; p <= config.p_max; ++p) {
        ConvergenceRecord r;
        r.p = p;
        r.dofs = mesh->n_elements() * dim_P(2, p);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const DGSpace space(mesh, p, tc.spec.beta, config.quad_policy(), tc.spec.singular_x);
            const DGSolution uh = use_sweep ? solve_sweep(space, tc.spec, *report) : solve_global(space, tc.spec);
            const ErrorReport err = dg_error(space, uh, tc.exact, tc.spec);
            r.error_l2 = err.l2_error;
            r.error_dg = err.dg_error;
            r.solver = uh.info.solver;
            r.residual = uh.info.residual;
        } catch (const SolverError& e) {
            r.error_l2 = r.error_dg = std::numeric_limits<double>::quiet_NaN();
            r.solver = "failed";
            r.residual = e.residual_history().empty() ? std::numeric_limits<double>::quiet_NaN()
                                                      : e.residual_history().back();
            if (log) *log << "p=" << p << ": " << e.what() << "\n";
        }
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (log)
            *log << "p=" << p << " l2=" << r.error_l2 << " dg=" << r.error_dg << " solver=" << r.solver
                 << " residual=" << r.residual << " time=" << r.wall_time << "s\n";
        records.push_back(r);
    }
    if (!config.output.empty()) write_convergence_csv(config.output, records);
    return records;
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRecord>& records)
{
    std::string body = "p,error_l2,error_dg,dofs,wall_time_s,solver,residual\n";
    for (const auto& r : records)
        body += std::to_string(r.p) + "," + fmt17(r.error_l2) + "," + fmt17(r.error_dg) + "," + std::to_string(r.dofs) +
                "," + fmt17(r.wall_time) + "," + r.solver + "," + fmt17(r.residual) + "\n";
    write_atomic(path, body);
}

std::vector<ConvergenceRecord> read_convergence_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    int lineno = 1;
    if (!std::getline(in, line) || line.rfind("p,error_l2,error_dg", 0) != 0)
        throw ParseError("missing convergence CSV header", lineno);
    std::vector<ConvergenceRecord> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) throw ParseError("expected 7 columns", lineno);
        try {
            ConvergenceRecord r;
            r.p = std::stoi(cells[0]);
            r.error_l2 = std::stod(cells[1]);
            r.error_dg = std::stod(cells[2]);
            r.dofs = std::stoul(cells[3]);
            r.wall_time = std::stod(cells[4]);
            r.solver = cells[5];
            r.residual = std::stod(cells[6]);
            out.push_back(r);
        } catch (const std::exception&) {
            throw ParseError("malformed number", lineno);
        }
    }
    return out;
}

RateFit fit_power_law(const std::vector<double>& p, const std::vector<double>& error)
{
    if (p.size() != error.size() || p.size() < 3) throw std::invalid_argument("fit needs at least 3 points");
    const auto n = static_cast<double>(p.size());
    double sx = 0, sy = 0;
    std::vector<double> x(p.size()), y(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(error[i] > 0) || !(p[i] > 0))
            throw std::invalid_argument("fit needs positive errors (p=" + std::to_string(p[i]) + ")");
        x[i] = std::log(p[i]);
        y[i] = std::log(error[i]);
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < p.size(); ++i) ss_res += std::pow(y[i] - fit.intercept - fit.slope * x[i], 2);
    fit.r_squared = syy > 0 ? std::clamp(1 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

RateFit fit_rate(const std::vector<ConvergenceRecord>& records, int p_min, int p_max, ErrorKind which)
{
    std::vector<double> p, e;
    for (const auto& r : records)
        if (r.p >= p_min && r.p <= p_max) {
            p.push_back(r.p);
            e.push_back(which == ErrorKind::l2 ? r.error_l2 : r.error_dg);
        }
    RateFit fit = fit_power_law(p, e);
    fit.p_min = p_min;
    fit.p_max = p_max;
    return fit;
}

std::vector<ProjectorRecord> run_projector_study(const ScalarField& f, int p_min, int p_max, QuadPolicy policy,
                                                 std::optional<double> singular_x)
{
    const auto map = ElementMap::identity(2);
    const auto ref = ReferenceSimplex::of(2);
    std::vector<ProjectorRecord> out;
    for (int p = p_min; p <= p_max; ++p) {
        const int levels = singular_x ? policy.levels(p) : 0;
        const double xs = singular_x.value_or(0.0);
        const QuadRule rule =
            composite_refine(simplex_rule(2, 2 * p + policy.margin), ReferenceLine{{1, 0, 0}, xs}, levels);
        const QuadRule gl = gauss_legendre(p + 1 + (policy.margin + 1) / 2);
        // Edge from a to b, graded toward the point where x = xs.
        const auto edge_rule = [&](const Point& a, const Point& b) {
            if (!singular_x || std::abs(b[0] - a[0]) < 1e-14) return gl;
            return composite_refine_interval(gl, 2 * (xs - a[0]) / (b[0] - a[0]) - 1, levels);
        };
        const QuadRule out_rule = edge_rule(ref.vertices[0], ref.vertices[1]);

        const ModalBasis basis(2, p);
        const auto q = cdg_project(f, map, p, rule, out_rule);
        const auto l2 = l2_project(f, map, p, rule);

        double vol = 0;
        for (std::size_t i = 0; i < rule.size(); ++i)
            vol += rule.weights[i] * std::pow(f(rule.points[i]) - q.eval(basis, rule.points[i]), 2);
        const auto edge_error = [&](const ModalCoeffs& c, const Point& a, const Point& b) {
            const QuadRule r = edge_rule(a, b);
            const double half = 0.5 * norm(b - a);
            double s = 0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                const double t = r.points[i][0];
                const Point x = 0.5 * (1 - t) * a + 0.5 * (1 + t) * b;
                s += half * r.weights[i] * std::pow(f(x) - c.eval(basis, x), 2);
            }
            return s;
        };
        const Point& v0 = ref.vertices[0];
        const Point& v1 = ref.vertices[1];
        const Point& v2 = ref.vertices[2];
        ProjectorRecord r;
        r.p = p;
        r.cdg_l2_error = std::sqrt(vol);
        r.cdg_outflow_trace_error = std::sqrt(edge_error(q, v0, v1));
        r.cdg_inflow_trace_error = std::sqrt(edge_error(q, v1, v2) + edge_error(q, v2, v0));
        r.l2proj_trace_error = std::sqrt(edge_error(l2, v0, v1));
        out.push_back(r);
    }
    return out;
}

std::vector<ProjectorRecord> run_projector_study(const StudyConfig& config)
{
    const double alpha = config.alpha;
    const ScalarField f = [alpha](const Point& x) { return singular_part(alpha, x[0]); };
    auto records = run_projector_study(f, config.p_min, config.p_max, config.quad_policy(), 0.0);
    if (!config.output.empty()) write_projector_csv(config.output, records);
    return records;
}

void write_projector_csv(const std::string& path, const std::vector<ProjectorRecord>& records)
{
    std::string body = "p,cdg_l2_error,cdg_outflow_trace_error,cdg_inflow_trace_error,l2proj_trace_error\n";
    for (const auto& r : records)
        body += std::to_string(r.p) + "," + fmt17(r.cdg_l2_error) + "," + fmt17(r.cdg_outflow_trace_error) + "," +
                fmt17(r.cdg_inflow_trace_error) + "," + fmt17(r.l2proj_trace_error) + "\n";
    write_atomic(path, body);
}

}  // namespace hyperdg
