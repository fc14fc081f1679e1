#include <cmath>
#include <random>

#include "doctest.h"
#include "hyperdg/norms.hpp"
#include "problems.hpp"

using namespace hyperdg;
using namespace testprob;

namespace {

const Point diag{1, 1, 0};

DGSolution project(const DGSpace& space, const ScalarField& u)
{
    const auto nb = static_cast<Eigen::Index>(space.n_basis());
    Eigen::VectorXd c(space.n_dofs());
    for (std::size_t e = 0; e < space.mesh().n_elements(); ++e)
        c.segment(e * nb, nb) =
            l2_project(u, space.map(static_cast<int>(e)), space.p(), simplex_rule(2, 2 * space.p() + 8)).values;
    return {space.mesh_ptr(), space.p(), c, {}};
}

double squared_sum(const ErrorReport& r)
{
    return r.reaction * r.reaction + r.inflow * r.inflow + r.outflow * r.outflow + r.jumps * r.jumps;
}

}  // namespace

TEST_CASE("projection of a polynomial has zero error")
{
    std::mt19937 rng(31);
    const auto mesh = structured(3);
    for (int p : {1, 3, 5}) {
        const Exact ex = random_polynomial(p, rng);
        const ProblemSpec spec = manufactured(ex, diag, 1.0);
        const DGSpace space(mesh, p, spec.beta);
        const auto uh = project(space, ex.u);
        const auto r = dg_error(space, uh, ex.u, spec);
        CHECK(r.l2_error < 1e-11);
        CHECK(r.reaction < 1e-11);
        CHECK(r.inflow < 1e-11);
        CHECK(r.outflow < 1e-11);
        CHECK(r.jumps < 1e-11);
    }
}

TEST_CASE("constant error on the square")
{
    const auto mesh = structured(4, Diagonal::with_flow);
    const DGSpace space(mesh, 2, ConvectionField::uniform(diag));
    const DGSolution zero{mesh, 2, Eigen::VectorXd::Zero(space.n_dofs()), {}};
    const ScalarField one = [](const Point&) { return 1.0; };
    CHECK(l2_error(space, zero, one) == doctest::Approx(2.0).epsilon(1e-13));

    // Each of the four sides has length 2 and |n.beta| = 1.
    const ProblemSpec spec = manufactured({one, [](const Point&) { return Point{0, 0, 0}; }}, diag, 3.0);
    const auto r = dg_error(space, zero, one, spec);
    CHECK(r.reaction == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(r.inflow == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(r.outflow == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(r.jumps == 0.0);
}

TEST_CASE("components add up and scale")
{
    const auto mesh = structured(3);
    const ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    const DGSpace space(mesh, 3, spec.beta);
    const auto uh = solve_global(space, spec);
    const auto r = dg_error(space, uh, smooth().u, spec);
    CHECK(r.dg_error * r.dg_error == doctest::Approx(squared_sum(r)).epsilon(1e-13));
    CHECK(r.l2_error == doctest::Approx(r.reaction).epsilon(1e-12));
    CHECK(r.jumps > 0);

    // error of t*uh against t*u is t times the error
    const double t = -3.5;
    const DGSolution scaled{uh.mesh, uh.p, t * uh.coeffs, {}};
    const ScalarField tu = [t](const Point& x) { return t * smooth().u(x); };
    const auto rs = dg_error(space, scaled, tu, spec);
    CHECK(rs.l2_error == doctest::Approx(std::abs(t) * r.l2_error).epsilon(1e-12));
    CHECK(rs.dg_error == doctest::Approx(std::abs(t) * r.dg_error).epsilon(1e-12));
}

TEST_CASE("triangle inequality")
{
    std::mt19937 rng(5);
    std::normal_distribution<double> n01;
    const auto mesh = structured(2);
    const ProblemSpec spec = manufactured(smooth(), {0.4, 1.0, 0}, 2.0);
    const DGSpace space(mesh, 2, spec.beta);
    const ScalarField zero = [](const Point&) { return 0.0; };
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd a(space.n_dofs()), b(space.n_dofs());
        for (auto& v : a) v = n01(rng);
        for (auto& v : b) v = n01(rng);
        const DGSolution va{mesh, 2, a, {}}, vb{mesh, 2, b, {}}, vab{mesh, 2, a + b, {}};
        const double na = dg_error(space, va, zero, spec).dg_error;
        const double nb = dg_error(space, vb, zero, spec).dg_error;
        const double nab = dg_error(space, vab, zero, spec).dg_error;
        CHECK(nab <= na + nb + 1e-12);
        CHECK(l2_error(space, vab, zero) <= l2_error(space, va, zero) + l2_error(space, vb, zero) + 1e-12);
    }
}

TEST_CASE("jump component matches the stability functional")
{
    std::mt19937 rng(17);
    std::normal_distribution<double> n01;
    const auto mesh = structured(3, Diagonal::with_flow);
    const ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    const DGSpace space(mesh, 3, spec.beta);
    Eigen::VectorXd c(space.n_dofs());
    for (auto& v : c) v = n01(rng);
    const DGSolution v{mesh, 3, c, {}};
    const auto r = dg_error(space, v, [](const Point&) { return 0.0; }, spec);
    CHECK(r.jumps * r.jumps == doctest::Approx(stability_functional(space, v, spec).jumps).epsilon(1e-12));
}

TEST_CASE("quadrature margin does not change smooth errors")
{
    const auto mesh = structured(3);
    const ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    const DGSpace a(mesh, 4, spec.beta, QuadPolicy{4, -1});
    const DGSpace b(mesh, 4, spec.beta, QuadPolicy{8, -1});
    const auto ua = solve_global(a, spec), ub = solve_global(b, spec);
    const auto ra = dg_error(a, ua, smooth().u, spec), rb = dg_error(b, ub, smooth().u, spec);
    CHECK(ra.l2_error == doctest::Approx(rb.l2_error).epsilon(1e-6));
    CHECK(ra.dg_error == doctest::Approx(rb.dg_error).epsilon(1e-6));
}
