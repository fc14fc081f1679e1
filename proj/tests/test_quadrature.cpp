#include <cmath>
#include <vector>

#include "doctest.h"
#include "hyperdg/errors.hpp"
#include "hyperdg/orthopoly.hpp"
#include "hyperdg/quadrature.hpp"
#include "oracles.hpp"

using namespace hyperdg;

namespace {

template <class F>
double integrate(const QuadRule& r, F f)
{
    double s = 0;
    for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * f(r.points[q]);
    return s;
}

}  // namespace

TEST_CASE("gauss legendre small rules")
{
    const auto g1 = gauss_legendre(1);
    CHECK(g1.points[0][0] == 0.0);
    CHECK(g1.weights[0] == doctest::Approx(2.0));
    const auto g2 = gauss_legendre(2);
    CHECK(g2.points[0][0] == doctest::Approx(-0.5773502691896257).epsilon(1e-15));
    CHECK(g2.points[1][0] == doctest::Approx(0.5773502691896257).epsilon(1e-15));
    CHECK(g2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g2.weights[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gauss_legendre(7).total_weight() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_legendre(201), std::invalid_argument);
}

TEST_CASE("gauss legendre nodes are symmetric, increasing, and exact")
{
    for (int n : {3, 10, 41, 100, 200}) {
        const auto g = gauss_legendre(n);
        for (int i = 0; i < n; ++i) {
            CHECK(g.points[i][0] == -g.points[n - 1 - i][0]);
            CHECK(g.weights[i] > 0.0);
            if (i > 0) CHECK(g.points[i][0] > g.points[i - 1][0]);
        }
        CHECK(g.total_weight() == doctest::Approx(2.0).epsilon(1e-13));
        if (n <= 41)
            for (int m = 0; m <= 2 * n - 1; ++m)
                CHECK(integrate(g, [m](const Point& x) { return std::pow(x[0], m); }) ==
                      doctest::Approx(oracle::monomial_1d(m)).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("simplex rules: measure, positivity, monomial exactness")
{
    for (int dim = 1; dim <= 3; ++dim)
        for (int d : {0, 1, 4, 9}) {
            const auto r = simplex_rule(dim, d);
            CHECK(r.total_weight() == doctest::Approx(ReferenceSimplex::of(dim).measure()).epsilon(1e-12));
            for (double w : r.weights) CHECK(w > 0.0);
            for (int a = 0; a <= d; ++a)
                for (int b = 0; a + b <= d && (dim >= 2 || b == 0); ++b)
                    for (int c = 0; a + b + c <= d && (dim >= 3 || c == 0); ++c) {
                        const double got = integrate(
                            r, [&](const Point& x) { return std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], c); });
                        const double expect = oracle::simplex_monomial(dim, a, b, c);
                        CHECK(std::abs(got - expect) <= 1e-11 * std::max(1.0, std::abs(expect)));
                    }
        }
}

TEST_CASE("koornwinder orthogonality under a degree-4 rule")
{
    const auto r = simplex_rule(2, 4);
    const double ip = integrate(r, [](const Point& x) {
        return koornwinder_eval({2, {1, 0, 0}}, x) * koornwinder_eval({2, {0, 1, 0}}, x);
    });
    CHECK(std::abs(ip) < 1e-12);
}

TEST_CASE("gram matrix is the identity for rules of degree 2p")
{
    for (int dim = 1; dim <= 3; ++dim) {
        const int pmax = dim == 3 ? 8 : 12;
        for (int p = 0; p <= pmax; p += (dim == 3 ? 4 : 3)) {
            const ModalBasis basis(dim, p);
            const auto r = simplex_rule(dim, 2 * p);
            const std::size_t n = basis.size();
            std::vector<double> gram(n * n, 0.0), v(n);
            for (std::size_t q = 0; q < r.size(); ++q) {
                basis.eval(r.points[q], v);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) gram[i * n + j] += r.weights[q] * v[i] * v[j];
            }
            double err = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(gram[i * n + j] - (i == j)));
            CAPTURE(dim);
            CAPTURE(p);
            CHECK(err < 1e-11);
        }
    }
}

TEST_CASE("composite refinement")
{
    const auto base = simplex_rule(2, 10);
    SUBCASE("levels = 0 is the identity")
    {
        const auto r = composite_refine(base, 0.0, 0);
        CHECK(r.points == base.points);
        CHECK(r.weights == base.weights);
    }
    SUBCASE("line missing the simplex leaves the rule unchanged")
    {
        const auto r = composite_refine(base, 1.5, 6);
        CHECK(r.points == base.points);
    }
    SUBCASE("total weight preserved")
    {
        for (int levels : {1, 5, 12}) {
            CHECK(composite_refine(base, 0.0, levels).total_weight() == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(composite_refine(base, 0.37, levels).total_weight() == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(composite_refine(base, ReferenceLine{{0.3, 1.0, 0}, 0.1}, levels).total_weight() ==
                  doctest::Approx(2.0).epsilon(1e-12));
        }
    }
    SUBCASE("self-convergence on a sqrt singularity")
    {
        auto f = [](const Point& x) { return std::sqrt(std::max(x[0], 0.0)); };
        const double i12 = integrate(composite_refine(base, 0.0, 12), f);
        const double i13 = integrate(composite_refine(base, 0.0, 13), f);
        CHECK(std::abs(i12 - i13) / std::abs(i13) < 1e-7);
        // right part of the triangle: height 2 - 2x over x in [0,1]
        CHECK(i13 == doctest::Approx(8.0 / 15.0).epsilon(1e-8));
    }
    SUBCASE("shifted line: exact value and monotone accuracy")
    {
        for (double alpha : {0.5, 1.5}) {
            const double a = 0.3;
            auto f = [&](const Point& x) { return std::pow(std::max(x[0] - a, 0.0), alpha); };
            const double L = 1 - a;
            // int_0^L u^alpha (2L - 2u) du
            const double exact = 2 * std::pow(L, alpha + 2) * (1 / (alpha + 1) - 1 / (alpha + 2));
            double prev = INFINITY;
            for (int levels : {0, 2, 4, 8, 12}) {
                const double err = std::abs(integrate(composite_refine(base, a, levels), f) - exact);
                CHECK(err <= prev * (1 + 1e-12) + 1e-15);
                prev = err;
            }
            CHECK(prev < 1e-9);
        }
    }
    SUBCASE("interval grading")
    {
        const auto g = gauss_legendre(8);
        const auto r = composite_refine_interval(g, 0.0, 20);
        CHECK(r.total_weight() == doctest::Approx(2.0).epsilon(1e-14));
        double s = 0;
        for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::sqrt(std::max(r.points[q][0], 0.0));
        CHECK(s == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
        const auto e = composite_refine_interval(g, 1.0, 20);
        double s2 = 0;
        for (std::size_t q = 0; q < e.size(); ++q) s2 += e.weights[q] * std::sqrt(1 - e.points[q][0]);
        CHECK(s2 == doctest::Approx(2.0 / 3.0 * std::pow(2.0, 1.5)).epsilon(1e-10));
        CHECK(composite_refine_interval(g, 1.5, 5).points == g.points);
    }
}
