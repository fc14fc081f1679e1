#pragma once

#include <vector>

#include "hyperdg/geometry.hpp"

namespace hyperdg {

/// Quadrature rule on a reference domain ([-1,1] or a reference simplex).
struct QuadRule {
    int dim = 1;
    std::vector<Point> points;
    std::vector<double> weights;
    int exactness_degree = 0;

    std::size_t size() const { return points.size(); }
    double total_weight() const;
};

/// n-point Gauss-Legendre rule on [-1,1]; exact for degree 2n-1.  1 <= n <= 200.
QuadRule gauss_legendre(int n);

/// Collapsed tensor Gauss rule on the reference simplex of dimension `dim`
/// (1, 2 or 3), exact for polynomials of total degree <= `degree`.
QuadRule simplex_rule(int dim, int degree);

/// Hyperplane {xi : normal . xi = offset} in reference coordinates.
struct ReferenceLine {
    Point normal;
    double offset;
};

/// Composite rule graded geometrically toward a singular line of a 2D rule.
///
/// The simplex is split along the line; each side is cut into slabs at
/// distances d_max 2^{-k} (k = 1..levels) from the line and the input rule is
/// mapped onto a fan triangulation of every slab.  Rules whose simplex does not
/// meet the line, and levels = 0, are returned unchanged.
QuadRule composite_refine(const QuadRule& rule, const ReferenceLine& line, int levels);

/// Convenience form for the vertical line x = axis_value.
QuadRule composite_refine(const QuadRule& rule, double axis_value, int levels);

/// 1D rule on [-1,1] graded geometrically toward the point t0 (which may be an
/// end point).  Returns `rule` unchanged when t0 lies outside [-1,1] or levels = 0.
QuadRule composite_refine_interval(const QuadRule& rule, double t0, int levels);

}  // namespace hyperdg
