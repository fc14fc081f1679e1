#include <cmath>
#include <random>

#include "doctest.h"
#include "hyperdg/dg_core.hpp"
#include "hyperdg/errors.hpp"
#include "hyperdg/norms.hpp"
#include "problems.hpp"

using namespace hyperdg;
using namespace testprob;

namespace {

const Point diag{1, 1, 0};

std::shared_ptr<const Mesh> reference_mesh()
{
    return std::make_shared<const Mesh>(Mesh::build(2, {{-1, -1, 0}, {1, -1, 0}, {0, 1, 0}}, {{0, 1, 2, -1}}));
}

// Brute-force B(u, phi_k) for a smooth u with gradient, element by element.
Eigen::VectorXd bilinear_against_basis(const DGSpace& space, const Exact& u, const ProblemSpec& spec)
{
    const Mesh& mesh = space.mesh();
    const auto nb = static_cast<Eigen::Index>(space.n_basis());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(space.n_dofs());
    const QuadRule rule = simplex_rule(2, 2 * space.p() + 10);
    std::vector<double> phi(nb);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const ElementMap& m = space.map(static_cast<int>(e));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point x = m.to_physical(rule.points[q]);
            space.basis().eval(rule.points[q], phi);
            const double r = dot(spec.beta(x), u.grad(x)) + spec.c(x) * u.u(x);
            for (Eigen::Index k = 0; k < nb; ++k) out[e * nb + k] += m.abs_det() * rule.weights[q] * r * phi[k];
        }
    }
    // Continuous u has no jumps; only the inflow boundary term remains.
    const QuadRule gl = gauss_legendre(space.p() + 8);
    for (const Facet& f : mesh.facets()) {
        if (!f.is_boundary()) continue;
        const Point P0 = mesh.vertices()[f.vertices[0]], P1 = mesh.vertices()[f.vertices[1]];
        const Point opp = mesh.vertices()[mesh.elements()[f.owner][f.owner_local]];
        Point n{P1[1] - P0[1], P0[0] - P1[0], 0};
        n = (1 / norm(n)) * n;
        if (dot(n, opp - P0) > 0) n = -1.0 * n;
        for (std::size_t q = 0; q < gl.size(); ++q) {
            const double t = gl.points[q][0];
            const Point x = 0.5 * (1 - t) * P0 + 0.5 * (1 + t) * P1;
            const double s = dot(n, spec.beta(x));
            if (s >= 0) continue;
            space.basis().eval(space.map(f.owner).to_reference(x), phi);
            const double w = 0.5 * norm(P1 - P0) * gl.weights[q];
            for (Eigen::Index k = 0; k < nb; ++k) out[f.owner * nb + k] -= w * s * u.u(x) * phi[k];
        }
    }
    return out;
}

DGSolution random_discrete(const DGSpace& space, std::mt19937& rng)
{
    std::normal_distribution<double> n01;
    Eigen::VectorXd c(space.n_dofs());
    for (auto& v : c) v = n01(rng);
    return {space.mesh_ptr(), space.p(), c, {}};
}

}  // namespace

TEST_CASE("p = 0 local matrix on the reference triangle")
{
    const auto mesh = reference_mesh();
    const DGSpace space(mesh, 0, ConvectionField::uniform(diag));
    ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    std::vector<UpwindTrace> traces;
    for (int l = 0; l < 3; ++l) traces.push_back({l, [](const Point&) { return 0.0; }});
    spec.f = [](const Point&) { return 0.0; };
    const auto [A, b] = assemble_local(space, spec, 0, traces);
    // Reaction 1 plus the outflow flux |F| n.beta |phi_0|^2 = sqrt5 * 3/sqrt5 / 2.
    CHECK(A(0, 0) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(b.norm() == 0.0);
}

TEST_CASE("missing upwind trace is reported")
{
    const auto mesh = reference_mesh();
    const DGSpace space(mesh, 2, ConvectionField::uniform(diag));
    const ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    CHECK_THROWS_AS(assemble_local(space, spec, 0, {}), std::invalid_argument);
}

TEST_CASE("local solve reproduces a polynomial solution")
{
    const auto mesh = std::make_shared<const Mesh>(
        Mesh::build(2, {{0.2, -0.4, 0}, {1.1, 0.1, 0}, {0.1, 0.9, 0}}, {{0, 1, 2, -1}}));
    std::mt19937 rng(2);
    for (int p : {1, 3, 5}) {
        const Exact ex = random_polynomial(p, rng);
        const ProblemSpec spec = manufactured(ex, {0.7, -0.4, 0}, 1.5);
        const DGSpace space(mesh, p, spec.beta);
        std::vector<UpwindTrace> traces;
        for (int l = 0; l < 3; ++l) traces.push_back({l, ex.u});
        const auto [A, b] = assemble_local(space, spec, 0, traces);
        const Eigen::VectorXd c = A.partialPivLu().solve(b);
        const auto ref = l2_project(ex.u, space.map(0), p, simplex_rule(2, 2 * p + 4));
        CHECK((c - ref.values).norm() < 1e-10);
    }
}

TEST_CASE("single element: sweep equals one local solve")
{
    const auto mesh = reference_mesh();
    const ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    const DGSpace space(mesh, 4, spec.beta);
    const auto rep = check_admissible(*mesh, spec.beta);
    const auto sol = solve_sweep(space, spec, rep);
    std::vector<UpwindTrace> traces;
    for (int l = 0; l < 3; ++l) traces.push_back({l, spec.g});
    const auto [A, b] = assemble_local(space, spec, 0, traces);
    CHECK((A.partialPivLu().solve(b) - sol.coeffs).norm() < 1e-13);
}

TEST_CASE("manufactured polynomials are reproduced by both solvers")
{
    std::mt19937 rng(4);
    const auto mesh = structured(4);
    for (int p = 0; p <= 5; ++p) {
        const Exact ex = random_polynomial(p, rng);
        const ProblemSpec spec = manufactured(ex, diag, 1.0);
        const DGSpace space(mesh, p, spec.beta);
        const auto sweep = solve_sweep(space, spec, check_admissible(*mesh, spec.beta));
        const auto global = solve_global(space, spec);
        CHECK(l2_error(space, sweep, ex.u) < 1e-10);
        CHECK(dg_error(space, sweep, ex.u, spec).dg_error < 1e-9);
        CHECK((sweep.coeffs - global.coeffs).lpNorm<Eigen::Infinity>() < 1e-9);
        CHECK(global.info.residual < 1e-10);
    }
}

TEST_CASE("sweep and global solve agree on smooth data")
{
    for (int n : {2, 5, 10})
        for (int p : {1, 4, 8}) {
            const auto mesh = structured(n);
            const ProblemSpec spec = manufactured(smooth(), {0.8, 1.3, 0}, 0.5);
            const DGSpace space(mesh, p, spec.beta);
            const auto rep = check_admissible(*mesh, spec.beta);
            if (!rep.verdict) continue;
            const auto a = solve_sweep(space, spec, rep);
            const auto b = solve_global(space, spec);
            CHECK((a.coeffs - b.coeffs).lpNorm<Eigen::Infinity>() < 1e-9);
        }
}

TEST_CASE("sweep refuses inadmissible meshes")
{
    const auto mesh = structured(3, Diagonal::with_flow);
    const ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    const DGSpace space(mesh, 2, spec.beta);
    CHECK_THROWS_AS(solve_sweep(space, spec, check_admissible(*mesh, spec.beta)), TopologyError);
    const auto sol = solve_global(space, spec);
    CHECK(sol.info.residual < 1e-10);
    CHECK(l2_error(space, sol, smooth().u) < 1e-2);
}

TEST_CASE("galerkin orthogonality")
{
    std::mt19937 rng(8);
    const auto mesh = structured(3);
    for (int p : {2, 4}) {
        for (const Exact& ex : {random_polynomial(p, rng), smooth()}) {
            const ProblemSpec spec = manufactured(ex, diag, 1.0);
            const DGSpace space(mesh, p, spec.beta);
            const auto uh = solve_global(space, spec);
            const BlockSystem sys = assemble_global(space, spec);
            const Eigen::VectorXd r = bilinear_against_basis(space, ex, spec) - sys.apply(uh.coeffs);
            CHECK(r.lpNorm<Eigen::Infinity>() < 1e-9);
        }
    }
}

TEST_CASE("zero data gives the zero solution")
{
    const auto mesh = structured(2, Diagonal::with_flow);
    ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    spec.f = [](const Point&) { return 0.0; };
    spec.g = [](const Point&) { return 0.0; };
    const DGSpace space(mesh, 3, spec.beta);
    const auto sol = solve_global(space, spec);
    CHECK(sol.coeffs.norm() == 0.0);
}

TEST_CASE("linearity")
{
    const auto mesh = structured(3);
    const DGSpace space(mesh, 3, ConvectionField::uniform(diag));
    ProblemSpec s1 = manufactured(smooth(), diag, 1.0), s2 = s1, s3 = s1;
    s2.f = [](const Point& x) { return std::cos(x[0] * x[1]); };
    s2.g = [](const Point& x) { return x[0] - x[1] * x[1]; };
    const double a = 2.5, b = -0.75;
    s3.f = [&](const Point& x) { return a * s1.f(x) + b * s2.f(x); };
    s3.g = [&](const Point& x) { return a * s1.g(x) + b * s2.g(x); };
    const auto rep = check_admissible(*mesh, s1.beta);
    const auto u1 = solve_sweep(space, s1, rep), u2 = solve_sweep(space, s2, rep), u3 = solve_sweep(space, s3, rep);
    CHECK((a * u1.coeffs + b * u2.coeffs - u3.coeffs).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("solution is invariant under element reordering")
{
    const Mesh base = gen_structured(3, 3, Diagonal::against_flow);
    std::vector<Mesh::Element> perm(base.elements().rbegin(), base.elements().rend());
    std::mt19937 rng(3);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto m1 = std::make_shared<const Mesh>(base);
    const auto m2 = std::make_shared<const Mesh>(Mesh::build(2, base.vertices(), perm));
    const ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    const DGSpace s1(m1, 4, spec.beta), s2(m2, 4, spec.beta);
    const auto u1 = solve_sweep(s1, spec, check_admissible(*m1, spec.beta));
    const auto u2 = solve_sweep(s2, spec, check_admissible(*m2, spec.beta));
    const ModalBasis& basis = s1.basis();
    for (std::size_t e = 0; e < m1->n_elements(); ++e) {
        const Point x = m1->barycenter(static_cast<int>(e));
        for (std::size_t k = 0; k < m2->n_elements(); ++k) {
            if (norm(m2->barycenter(static_cast<int>(k)) - x) > 1e-12) continue;
            const double v1 = u1.element(static_cast<int>(e)).eval(basis, s1.map(static_cast<int>(e)).to_reference(x));
            const double v2 = u2.element(static_cast<int>(k)).eval(basis, s2.map(static_cast<int>(k)).to_reference(x));
            CHECK(v1 == doctest::Approx(v2).epsilon(1e-11));
        }
    }
}

TEST_CASE("energy identity")
{
    std::mt19937 rng(13);
    for (int p = 0; p <= 4; ++p) {
        const auto mesh = structured(2 + p % 2, p % 2 ? Diagonal::with_flow : Diagonal::against_flow);
        const ProblemSpec spec = manufactured(smooth(), {0.6, 1.1, 0}, 0.8);
        const DGSpace space(mesh, p, spec.beta);
        const auto v = random_discrete(space, rng);
        CHECK(energy_identity_check(space, v, spec) < 1e-10);
        const DGSolution zero{space.mesh_ptr(), p, Eigen::VectorXd::Zero(space.n_dofs()), {}};
        CHECK(energy_identity_check(space, zero, spec) == 0.0);
    }
}

TEST_CASE("continuous functions have no jump energy")
{
    const auto mesh = structured(3);
    const DGSpace space(mesh, 2, ConvectionField::uniform(diag));
    const ProblemSpec spec = manufactured(smooth(), diag, 1.0);
    Eigen::VectorXd c(space.n_dofs());
    const auto nb = static_cast<Eigen::Index>(space.n_basis());
    const ScalarField q = [](const Point& x) { return 1 + x[0] - 2 * x[0] * x[1]; };
    for (std::size_t e = 0; e < mesh->n_elements(); ++e)
        c.segment(e * nb, nb) = l2_project(q, space.map(static_cast<int>(e)), 2, simplex_rule(2, 8)).values;
    const DGSolution v{mesh, 2, c, {}};
    CHECK(stability_functional(space, v, spec).jumps < 1e-24);
    CHECK(energy_identity_check(space, v, spec) < 1e-10);
}

TEST_CASE("stability estimate")
{
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-2, 2);
    const auto mesh = structured(4);
    for (int trial = 0; trial < 6; ++trial) {
        const int p = 1 + trial;
        const double a = u(rng), b = u(rng), k = u(rng);
        ProblemSpec spec = manufactured(smooth(), diag, 1.0);
        spec.f = [=](const Point& x) { return a * std::sin(k * x[0] + x[1]) + b; };
        spec.g = [](const Point&) { return 0.0; };
        const DGSpace space(mesh, p, spec.beta);
        const auto uh = solve_global(space, spec);
        const auto [f2, g2] = data_norms_sq(space, spec);
        CHECK(stability_functional(space, uh, spec).total() <= f2 / spec.cbar0 + 1e-8);

        spec.f = [](const Point&) { return 0.0; };
        spec.g = [=](const Point& x) { return a * std::cos(k * x[0] - x[1]) + b; };
        const auto ug = solve_global(space, spec);
        const auto [f2g, g2g] = data_norms_sq(space, spec);
        CHECK(f2g == 0.0);
        CHECK(stability_functional(space, ug, spec).total() <= 2 * g2g + 1e-8);
    }
    const DGSpace space(mesh, 2, ConvectionField::uniform(diag));
    const DGSolution zero{mesh, 2, Eigen::VectorXd::Zero(space.n_dofs()), {}};
    CHECK(stability_functional(space, zero, manufactured(smooth(), diag, 1.0)).total() == 0.0);
}

TEST_CASE("variable field and reaction")
{
    // beta = (2 - y^2, 2 - x) is divergence free.
    const ConvectionField beta{[](const Point& x) { return Point{2 - x[1] * x[1], 2 - x[0], 0}; }, false};
    std::mt19937 rng(6);
    const Exact ex = random_polynomial(3, rng);
    ProblemSpec spec;
    spec.beta = beta;
    spec.c = [](const Point& x) { return 1 + (1 + x[0]) * (1 + x[1] * x[1]); };
    spec.f = [&](const Point& x) { return dot(beta(x), ex.grad(x)) + spec.c(x) * ex.u(x); };
    spec.g = ex.u;
    for (auto d : {Diagonal::against_flow, Diagonal::with_flow}) {
        const auto mesh = structured(4, d);
        const DGSpace space(mesh, 3, beta);
        const auto sol = solve_global(space, spec);
        CHECK(sol.info.residual < 1e-10);
        CHECK(l2_error(space, sol, ex.u) < 1e-10);
    }
}
