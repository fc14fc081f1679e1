#include "hyperdg/norms.hpp"

#include <cmath>
#include <vector>

namespace hyperdg {

namespace {

// Sum over elements of int w(x) (exact - u_h)^2, graded on singular elements.
double volume_error_sq(const DGSpace& space, const DGSolution& uh, const ScalarField& exact, const ScalarField& weight)
{
    const Mesh& mesh = space.mesh();
    const auto nb = static_cast<Eigen::Index>(space.n_basis());
    std::vector<double> phi(nb);
    double total = 0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const int ei = static_cast<int>(e);
        const ElementMap& m = space.map(ei);
        const auto c = uh.coeffs.segment(ei * nb, nb);
        double s = 0;
        if (!space.singular(ei)) {
            const QuadRule& rule = space.volume_rule();
            const Eigen::VectorXd vals = space.values() * c;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Point x = m.to_physical(rule.points[q]);
                const double w = weight ? weight(x) : 1.0;
                s += rule.weights[q] * std::pow(w * (exact(x) - vals[q]), 2);
            }
        } else {
            const QuadRule& rule = space.element_rule(ei);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                space.basis().eval(rule.points[q], phi);
                const double v = Eigen::Map<const Eigen::VectorXd>(phi.data(), nb).dot(c);
                const Point x = m.to_physical(rule.points[q]);
                const double w = weight ? weight(x) : 1.0;
                s += rule.weights[q] * std::pow(w * (exact(x) - v), 2);
            }
        }
        total += m.abs_det() * s;
    }
    return total;
}

}  // namespace

double l2_error(const DGSpace& space, const DGSolution& uh, const ScalarField& exact)
{
    return std::sqrt(volume_error_sq(space, uh, exact, nullptr));
}

ErrorReport dg_error(const DGSpace& space, const DGSolution& uh, const ScalarField& exact, const ProblemSpec& spec)
{
    const Mesh& mesh = space.mesh();
    const auto nb = static_cast<Eigen::Index>(space.n_basis());
    ErrorReport r;
    r.l2_error = l2_error(space, uh, exact);
    r.reaction = std::sqrt(volume_error_sq(space, uh, exact, spec.c));
    double in = 0, out = 0, jumps = 0;
    for (std::size_t fid = 0; fid < mesh.facets().size(); ++fid) {
        const Facet& f = mesh.facets()[fid];
        const FacetQuad& fq = space.facet(static_cast<int>(fid));
        const Eigen::VectorXd uo = fq.owner_values * uh.coeffs.segment(f.owner * nb, nb);
        if (f.is_boundary()) {
            for (std::size_t q = 0; q < fq.points.size(); ++q) {
                const double v = fq.weights[q] * std::abs(fq.flux[q]) * std::pow(exact(fq.points[q]) - uo[q], 2);
                (fq.flux[q] < 0 ? in : out) += v;
            }
            continue;
        }
        const Eigen::VectorXd un = fq.neighbor_values * uh.coeffs.segment(f.neighbor * nb, nb);
        for (std::size_t q = 0; q < fq.points.size(); ++q)
            jumps += fq.weights[q] * std::abs(fq.flux[q]) * std::pow(uo[q] - un[q], 2);
    }
    r.inflow = std::sqrt(in);
    r.outflow = std::sqrt(out);
    r.jumps = std::sqrt(jumps);
    r.dg_error = std::sqrt(r.reaction * r.reaction + in + out + jumps);
    return r;
}

}  // namespace hyperdg
