#include "hyperdg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "hyperdg/errors.hpp"
#include "hyperdg/orthopoly.hpp"

namespace hyperdg {

double QuadRule::total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

QuadRule gauss_legendre(int n)
{
    if (n < 1 || n > 200) throw std::invalid_argument("gauss_legendre: n must lie in [1, 200]");
    QuadRule rule;
    rule.dim = 1;
    rule.exactness_degree = 2 * n - 1;
    rule.points.assign(n, Point{0, 0, 0});
    rule.weights.assign(n, 0.0);
    // Roots of L_n are symmetric: compute the negative half and mirror.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            const auto [v, d] = legendre_eval_d(n, x);
            const double dx = v / d;
            x -= dx;
            if (std::abs(dx) <= 1e-15) {
                converged = true;
                break;
            }
        }
        if (!converged) throw SolverError("gauss_legendre: Newton iteration did not converge");
        dp = legendre_eval_d(n, x)[1];
        if (2 * i + 1 == n) x = 0.0;
        const double w = 2.0 / ((1 - x * x) * dp * dp);
        rule.points[i][0] = x;
        rule.points[n - 1 - i][0] = -x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

QuadRule simplex_rule(int dim, int degree)
{
    if (degree < 0) throw std::invalid_argument("simplex_rule: degree must be nonnegative");
    const int n = (degree + dim + 1) / 2 + 1;
    const QuadRule g = gauss_legendre(n);
    QuadRule rule;
    rule.dim = dim;
    rule.exactness_degree = degree;
    if (dim == 1) {
        rule.points = g.points;
        rule.weights = g.weights;
        return rule;
    }
    if (dim == 2) {
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) {
                const Point z{g.points[a][0], g.points[b][0], 0};
                rule.points.push_back(duffy_map(2, z));
                rule.weights.push_back(g.weights[a] * g.weights[b] * duffy_jacobian(2, z));
            }
        return rule;
    }
    if (dim == 3) {
        for (int c = 0; c < n; ++c)
            for (int b = 0; b < n; ++b)
                for (int a = 0; a < n; ++a) {
                    const Point z{g.points[a][0], g.points[b][0], g.points[c][0]};
                    rule.points.push_back(duffy_map(3, z));
                    rule.weights.push_back(g.weights[a] * g.weights[b] * g.weights[c] * duffy_jacobian(3, z));
                }
        return rule;
    }
    throw std::invalid_argument("simplex_rule: dimension must be 1, 2 or 3");
}

namespace {

using Polygon = std::vector<Point>;

// Sutherland-Hodgman clip against the half plane  sign * (n.x - c) >= 0.
Polygon clip(const Polygon& poly, const Point& n, double c, double sign)
{
    Polygon out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % m];
        const double da = sign * (dot(n, a) - c);
        const double db = sign * (dot(n, b) - c);
        if (da >= 0) out.push_back(a);
        if ((da > 0 && db < 0) || (da < 0 && db > 0)) {
            const double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

double signed_area(const Point& a, const Point& b, const Point& c)
{
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

// Append `rule` (on the reference triangle) mapped affinely onto triangle abc.
void append_mapped(QuadRule& out, const QuadRule& rule, const Point& a, const Point& b, const Point& c)
{
    const double area = std::abs(signed_area(a, b, c));
    if (area <= 0.0) return;
    const double scale = area / 2.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        // Barycentric coordinates on the reference triangle (-1,-1),(1,-1),(0,1).
        const double x = rule.points[q][0], y = rule.points[q][1];
        const double l2 = (1 + y) / 2;
        const double l1 = (x + 1) / 2 - l2 / 2;
        const double l0 = 1 - l1 - l2;
        out.points.push_back(l0 * a + l1 * b + l2 * c);
        out.weights.push_back(rule.weights[q] * scale);
    }
}

void append_polygon(QuadRule& out, const QuadRule& rule, const Polygon& poly)
{
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) append_mapped(out, rule, poly[0], poly[i], poly[i + 1]);
}

}  // namespace

QuadRule composite_refine(const QuadRule& rule, const ReferenceLine& line, int levels)
{
    if (rule.dim != 2) throw std::invalid_argument("composite_refine: 2D rules only");
    if (levels <= 0) return rule;
    const auto ref = ReferenceSimplex::of(2);
    const Point& n = line.normal;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& v : ref.vertices) {
        lo = std::min(lo, dot(n, v));
        hi = std::max(hi, dot(n, v));
    }
    const double span = hi - lo;
    if (span <= 0.0) return rule;
    const double tol = 1e-14 * span;
    if (line.offset < lo - tol || line.offset > hi + tol) return rule;

    QuadRule out;
    out.dim = 2;
    out.exactness_degree = rule.exactness_degree;
    const Polygon tri(ref.vertices.begin(), ref.vertices.end());
    for (double sign : {1.0, -1.0}) {
        const double reach = sign > 0 ? hi - line.offset : line.offset - lo;
        if (reach <= tol) continue;
        const Polygon side = clip(tri, n, line.offset, sign);
        // Slab k covers distances [reach 2^{-k-1}, reach 2^{-k}] from the line;
        // the innermost slab reaches down to the line itself.
        for (int k = 0; k <= levels; ++k) {
            const double outer = reach * std::ldexp(1.0, -k);
            const double inner = k == levels ? 0.0 : reach * std::ldexp(1.0, -k - 1);
            Polygon slab = clip(side, n, line.offset + sign * inner, sign);
            slab = clip(slab, n, line.offset + sign * outer, -sign);
            append_polygon(out, rule, slab);
        }
    }
    return out;
}

QuadRule composite_refine(const QuadRule& rule, double axis_value, int levels)
{
    return composite_refine(rule, ReferenceLine{{1, 0, 0}, axis_value}, levels);
}

QuadRule composite_refine_interval(const QuadRule& rule, double t0, int levels)
{
    if (rule.dim != 1) throw std::invalid_argument("composite_refine_interval: 1D rules only");
    if (levels <= 0 || t0 < -1 - 1e-14 || t0 > 1 + 1e-14) return rule;
    t0 = std::clamp(t0, -1.0, 1.0);
    QuadRule out;
    out.dim = 1;
    out.exactness_degree = rule.exactness_degree;
    auto append = [&](double a, double b) {
        const double half = 0.5 * (b - a);
        if (half <= 0) return;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            out.points.push_back({a + half * (rule.points[q][0] + 1), 0, 0});
            out.weights.push_back(rule.weights[q] * half);
        }
    };
    for (double sign : {1.0, -1.0}) {
        const double reach = sign > 0 ? 1 - t0 : t0 + 1;
        if (reach <= 0) continue;
        for (int k = 0; k <= levels; ++k) {
            const double outer = reach * std::ldexp(1.0, -k);
            const double inner = k == levels ? 0.0 : reach * std::ldexp(1.0, -k - 1);
            if (sign > 0)
                append(t0 + inner, t0 + outer);
            else
                append(t0 - outer, t0 - inner);
        }
    }
    return out;
}

}  // namespace hyperdg
