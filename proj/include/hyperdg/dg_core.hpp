#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hyperdg/fields.hpp"
#include "hyperdg/mesh.hpp"
#include "hyperdg/orthopoly.hpp"
#include "hyperdg/projectors.hpp"
#include "hyperdg/quadrature.hpp"

namespace hyperdg {

/// Steady transport problem  beta . grad u + c u = f,  u = g on the inflow boundary.
struct ProblemSpec {
    int dim = 2;
    ConvectionField beta;
    ScalarField c;
    bool c_constant = false;
    ScalarField f;
    ScalarField g;
    double cbar0 = 1.0;  // lower bound of c - div(beta)/2
    /// Vertical line x = value across which the data lose smoothness; elements
    /// and facets meeting it get geometrically graded quadrature.
    std::optional<double> singular_x;
};

struct QuadPolicy {
    int margin = 4;            // rules are exact for degree 2p + margin
    int singular_levels = -1;  // grading levels; negative means max(8, p)

    int levels(int p) const { return singular_levels >= 0 ? singular_levels : std::max(8, p); }
};

/// Quadrature on one mesh facet, in physical coordinates.
struct FacetQuad {
    std::vector<Point> points;
    std::vector<double> weights;  // include the facet measure
    Point normal{0, 0, 0};        // outward for the owner
    std::vector<double> flux;     // normal . beta, zeroed below the characteristic tolerance
    Eigen::MatrixXd owner_values;     // basis values of the owner (points x basis)
    Eigen::MatrixXd neighbor_values;  // empty on the boundary
};

/// Geometry, quadrature and basis tabulations for one mesh, degree and field.
///
/// Element coefficients refer to affine_map(mesh, e), the map that keeps the
/// stored vertex order.  Only 2D meshes are supported.
class DGSpace {
public:
    DGSpace(std::shared_ptr<const Mesh> mesh, int p, const ConvectionField& beta, QuadPolicy policy = {},
            std::optional<double> singular_x = std::nullopt);

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    int p() const { return p_; }
    const ModalBasis& basis() const { return basis_; }
    std::size_t n_basis() const { return basis_.size(); }
    std::size_t n_dofs() const { return basis_.size() * mesh_->n_elements(); }
    const ElementMap& map(int e) const { return maps_[e]; }
    const FacetQuad& facet(int f) const { return facets_[f]; }
    const ConvectionField& beta() const { return beta_; }
    const QuadPolicy& policy() const { return policy_; }

    /// Standard volume rule and its tabulations (reference coordinates).
    const QuadRule& volume_rule() const { return rule_; }
    const Eigen::MatrixXd& values() const { return V_; }
    const Eigen::MatrixXd& grad(int axis) const { return G_[axis]; }
    /// int phi_i d(phi_j)/d(xi_axis) over the reference element.
    const Eigen::MatrixXd& advection(int axis) const { return K_[axis]; }

    /// Whether element e meets the singular line.
    bool singular(int e) const { return singular_[e]; }
    /// Graded rule for element e (reference coordinates); the standard rule otherwise.
    const QuadRule& element_rule(int e) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    int p_;
    ConvectionField beta_;
    QuadPolicy policy_;
    ModalBasis basis_;
    std::vector<ElementMap> maps_;
    std::vector<FacetQuad> facets_;
    QuadRule rule_;
    Eigen::MatrixXd V_;
    std::array<Eigen::MatrixXd, 2> G_, K_;
    std::vector<bool> singular_;
    std::vector<std::optional<QuadRule>> graded_;
};

struct SolveInfo {
    std::string solver;
    double residual = 0.0;  // relative residual of the global system
    int iterations = 0;
    std::vector<double> history;
};

/// Element-wise coefficients in the space's orthonormal basis, one block per element.
struct DGSolution {
    std::shared_ptr<const Mesh> mesh;
    int p = 0;
    Eigen::VectorXd coeffs;
    SolveInfo info;

    std::size_t block_size() const { return dim_P(mesh->dim(), p); }
    ModalCoeffs element(int e) const;
};

/// Block form of the global system: diagonal blocks plus upwind couplings.
struct BlockSystem {
    struct Coupling {
        int col;
        Eigen::MatrixXd block;
    };
    int block_size = 0;
    std::vector<Eigen::MatrixXd> diag;
    std::vector<std::vector<Coupling>> couplings;  // couplings[e]: contributions to row block e
    Eigen::VectorXd rhs;

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    Eigen::SparseMatrix<double> to_sparse() const;
};

/// Volume part (beta . grad u + c u, v)_T for one element.
Eigen::MatrixXd element_matrix(const DGSpace& space, const ProblemSpec& spec, int e);
/// (f, v)_T, with graded quadrature on singular elements.
Eigen::VectorXd element_load(const DGSpace& space, const ScalarField& f, int e);

/// Trace used on the inflow part of a local facet: neighbour values or g.
struct UpwindTrace {
    int local_facet;
    ScalarField value;
};

/// Local system on element e given upwind traces on every facet part where
/// n . beta < 0.  Throws std::invalid_argument naming a facet without a trace.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_local(const DGSpace& space, const ProblemSpec& spec, int e,
                                                           const std::vector<UpwindTrace>& traces);

/// Global block system with pointwise upwinding; rhs is zero when f or g is empty.
BlockSystem assemble_global(const DGSpace& space, const ProblemSpec& spec);

/// Element-by-element solve in upwind order; requires an admissible mesh.
DGSolution solve_sweep(const DGSpace& space, const ProblemSpec& spec, const AdmissibilityReport& report);

struct GlobalSolverOptions {
    int max_iterations = 500;
    double tolerance = 1e-10;
};

/// Block Gauss-Seidel along the mean flow, then a sparse LU fallback.
DGSolution solve_global(const DGSpace& space, const ProblemSpec& spec, GlobalSolverOptions options = {});

/// Relative residual ||b - A u|| / ||b|| (absolute when b = 0).
double relative_residual(const BlockSystem& system, const Eigen::VectorXd& u);

/// Terms of the stability estimate for a discrete function.
struct StabilityTerms {
    double reaction = 0;  // cbar0 ||u||^2
    double jumps = 0;     // sum over interior inflow facet parts of |n.beta| [u]^2
    double boundary = 0;  // ||n.beta|^{1/2} u||^2 on the whole boundary

    double total() const { return reaction + jumps + boundary; }
};
StabilityTerms stability_functional(const DGSpace& space, const DGSolution& u, const ProblemSpec& spec);

/// ||f||^2 over the domain and ||g||^2 over the inflow boundary (unweighted).
std::pair<double, double> data_norms_sq(const DGSpace& space, const ProblemSpec& spec);

/// |B(v,v) - (||cbar^{1/2} v||^2 + jumps/2 + boundary/2)|, with B taken from
/// the assembled matrix and the right side from pointwise quadrature.
double energy_identity_check(const DGSpace& space, const DGSolution& v, const ProblemSpec& spec);

}  // namespace hyperdg
