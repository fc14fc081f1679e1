#pragma once

// Small manufactured problems shared by the solver tests.

#include <cmath>
#include <memory>
#include <random>

#include "hyperdg/dg_core.hpp"

namespace testprob {

using namespace hyperdg;

/// Exact solution with gradient; f and g are derived from it.
struct Exact {
    ScalarField u;
    VectorField grad;
};

inline ProblemSpec manufactured(const Exact& ex, const Point& beta, double c)
{
    ProblemSpec s;
    s.beta = ConvectionField::uniform(beta);
    s.c = [c](const Point&) { return c; };
    s.c_constant = true;
    s.f = [ex, beta, c](const Point& x) { return dot(beta, ex.grad(x)) + c * ex.u(x); };
    s.g = ex.u;
    s.cbar0 = c;
    return s;
}

/// Random polynomial of total degree <= p in x, y.
inline Exact random_polynomial(int p, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<std::array<double, 3>> terms;  // (coef, i, j)
    for (int d = 0; d <= p; ++d)
        for (int i = 0; i <= d; ++i) terms.push_back({u(rng), double(i), double(d - i)});
    Exact ex;
    ex.u = [terms](const Point& x) {
        double s = 0;
        for (const auto& t : terms) s += t[0] * std::pow(x[0], t[1]) * std::pow(x[1], t[2]);
        return s;
    };
    ex.grad = [terms](const Point& x) {
        Point g{0, 0, 0};
        for (const auto& t : terms) {
            if (t[1] > 0) g[0] += t[0] * t[1] * std::pow(x[0], t[1] - 1) * std::pow(x[1], t[2]);
            if (t[2] > 0) g[1] += t[0] * t[2] * std::pow(x[0], t[1]) * std::pow(x[1], t[2] - 1);
        }
        return g;
    };
    return ex;
}

inline Exact smooth()
{
    return {[](const Point& x) { return std::sin(1.3 * x[0] + 0.4) * std::exp(0.5 * x[1]); },
            [](const Point& x) {
                return Point{1.3 * std::cos(1.3 * x[0] + 0.4) * std::exp(0.5 * x[1]),
                             0.5 * std::sin(1.3 * x[0] + 0.4) * std::exp(0.5 * x[1]), 0};
            }};
}

inline std::shared_ptr<const Mesh> structured(int n, Diagonal d = Diagonal::against_flow)
{
    return std::make_shared<const Mesh>(gen_structured(n, n, d));
}

}  // namespace testprob
