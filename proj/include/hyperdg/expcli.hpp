#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hyperdg/dg_core.hpp"
#include "hyperdg/mesh.hpp"

namespace hyperdg {

enum class StudyCase { testcase1, testcase2, manufactured, projector_study };
enum class SolverChoice { sweep, global, automatic };

/// Mesh source: a file when `path` is set, otherwise the structured generator.
struct MeshSource {
    std::string path;
    int nx = 4;
    int ny = 4;
    Diagonal diagonal = Diagonal::against_flow;
};

struct StudyConfig {
    StudyCase study = StudyCase::testcase1;
    double alpha = 2.5;
    MeshSource mesh;
    int p_min = 1;
    int p_max = 24;
    SolverChoice solver = SolverChoice::automatic;
    int quadrature_margin = 4;
    int singular_refine_levels = -1;  // negative: max(8, p)
    std::string output;
    std::optional<int> manufactured_degree;  // defaults to 3

    QuadPolicy quad_policy() const { return {quadrature_margin, singular_refine_levels}; }
};

/// JSON with snake_case keys.  Throws ParseError on invalid input.
StudyConfig parse_config(const std::string& json_text);
std::string serialize_config(const StudyConfig& config);
StudyConfig load_config(const std::string& path);

struct TestCase {
    ProblemSpec spec;
    ScalarField exact;
};

/// beta = (1,1), c = 1, u = cos(pi y / 2) + max(x, 0)^alpha.
TestCase build_testcase1(double alpha);
/// beta = (2 - y^2, 2 - x), c = 1 + (1 + x)(1 + y^2), same u.
TestCase build_testcase2(double alpha);
/// Polynomial u of total degree `degree`, beta = (1,1), c = 1.
TestCase build_manufactured(int degree);

std::shared_ptr<const Mesh> make_mesh(const MeshSource& source);

struct ConvergenceRecord {
    int p = 0;
    double error_l2 = 0;
    double error_dg = 0;
    std::size_t dofs = 0;
    double wall_time = 0;
    std::string solver;
    double residual = 0;
};

/// Solve and measure for every p in the configured range.  Per-p failures are
/// recorded in the row (solver "failed", errors NaN).  Writes the CSV when
/// config.output is set.
std::vector<ConvergenceRecord> run_convergence(const StudyConfig& config, std::ostream* log = nullptr);

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_convergence_csv(const std::string& path);

enum class ErrorKind { l2, dg };

struct RateFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
    int p_min = 0;
    int p_max = 0;
};

/// Least-squares line through (log p, log error).
RateFit fit_power_law(const std::vector<double>& p, const std::vector<double>& error);
RateFit fit_rate(const std::vector<ConvergenceRecord>& records, int p_min, int p_max, ErrorKind which);

struct ProjectorRecord {
    int p = 0;
    double cdg_l2_error = 0;
    double cdg_outflow_trace_error = 0;
    double cdg_inflow_trace_error = 0;
    double l2proj_trace_error = 0;
};

/// Projection errors of f = max(x, 0)^alpha on the reference triangle, whose
/// outflow facet is y = -1.  Writes the CSV when config.output is set.
std::vector<ProjectorRecord> run_projector_study(const StudyConfig& config);
std::vector<ProjectorRecord> run_projector_study(const ScalarField& f, int p_min, int p_max, QuadPolicy policy,
                                                 std::optional<double> singular_x);

void write_projector_csv(const std::string& path, const std::vector<ProjectorRecord>& records);

}  // namespace hyperdg
