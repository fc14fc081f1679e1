#pragma once

#include <optional>

#include <Eigen/Dense>

#include "hyperdg/fields.hpp"
#include "hyperdg/mesh.hpp"
#include "hyperdg/orthopoly.hpp"
#include "hyperdg/quadrature.hpp"

namespace hyperdg {

/// Coefficients in the orthonormal ModalBasis(dim, degree) of the reference simplex.
struct ModalCoeffs {
    int dim = 2;
    int degree = 0;
    Eigen::VectorXd values;

    double eval(const ModalBasis& basis, const Point& xi) const;
};

/// Rule on the reference outflow facet, in facet coordinates: a 1D rule on
/// [-1,1] (the edge y = -1) or a 2D rule on the reference triangle (the face
/// z = -1).  Unused in 1D.
QuadRule default_facet_rule(int dim, int p);
/// Embed a facet-coordinate point into the reference element's outflow facet.
Point outflow_facet_point(int dim, const Point& t);

/// L2 projection on the reference element; f is evaluated at map.to_physical(xi).
ModalCoeffs l2_project(const ScalarField& f, const ElementMap& map, int p, const QuadRule& rule);

/// H1 projection with the mean-value condition, in reference coordinates.
ModalCoeffs h1_project(const ScalarFieldWithGradient& f, const ElementMap& map, int p, const QuadRule& rule);

/// Projector defined by interior moments against P_{p-1} and outflow-facet
/// moments against P_p(facet).  `map` must send the reference outflow facet
/// to the element's outflow facet.
ModalCoeffs cdg_project(const ScalarField& f, const ElementMap& map, int p, const QuadRule& rule,
                        const std::optional<QuadRule>& facet_rule = std::nullopt);

/// The same projector evaluated from modal coefficients by alternating tail sums.
ModalCoeffs cdg_from_modal(const ModalCoeffs& coeffs, int p);

}  // namespace hyperdg
