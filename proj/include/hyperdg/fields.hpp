#pragma once

#include <functional>

#include "hyperdg/geometry.hpp"

namespace hyperdg {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

/// Scalar field with its gradient, for projections that need derivatives.
struct ScalarFieldWithGradient {
    ScalarField value;
    VectorField gradient;
};

/// Convection field beta; `constant` promises the same vector everywhere.
struct ConvectionField {
    VectorField eval;
    bool constant = false;

    static ConvectionField uniform(const Point& b)
    {
        return {[b](const Point&) { return b; }, true};
    }
    Point operator()(const Point& x) const { return eval(x); }
};

}  // namespace hyperdg
