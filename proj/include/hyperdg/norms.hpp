#pragma once

#include "hyperdg/dg_core.hpp"

namespace hyperdg {

/// Error of a discrete solution against an exact field.  The DG components are
/// norms; dg_error^2 is the sum of their squares.
struct ErrorReport {
    double l2_error = 0;
    double dg_error = 0;
    double reaction = 0;  // ||c (u - u_h)||
    double inflow = 0;    // |n.beta|^{1/2} (u - u_h) on the inflow boundary
    double outflow = 0;   // |n.beta|^{1/2} (u - u_h) on the outflow boundary
    double jumps = 0;     // |n.beta|^{1/2} [u_h] on interior facets
};

double l2_error(const DGSpace& space, const DGSolution& uh, const ScalarField& exact);

ErrorReport dg_error(const DGSpace& space, const DGSolution& uh, const ScalarField& exact, const ProblemSpec& spec);

}  // namespace hyperdg
