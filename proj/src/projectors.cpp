#include "hyperdg/projectors.hpp"

#include <stdexcept>
#include <vector>

#include "hyperdg/errors.hpp"

namespace hyperdg {

double ModalCoeffs::eval(const ModalBasis& basis, const Point& xi) const
{
    std::vector<double> phi(basis.size());
    basis.eval(xi, phi);
    double s = 0;
    for (std::size_t k = 0; k < phi.size(); ++k) s += values[k] * phi[k];
    return s;
}

QuadRule default_facet_rule(int dim, int p)
{
    if (dim == 3) return simplex_rule(2, 2 * p + 4);
    return gauss_legendre(p + 3);
}

Point outflow_facet_point(int dim, const Point& t)
{
    switch (dim) {
    case 1: return {-1, 0, 0};
    case 2: return {t[0], -1, 0};
    default: return {t[0], t[1], -1};
    }
}

ModalCoeffs l2_project(const ScalarField& f, const ElementMap& map, int p, const QuadRule& rule)
{
    const ModalBasis basis(map.dim, p);
    ModalCoeffs out{map.dim, p, Eigen::VectorXd::Zero(basis.size())};
    std::vector<double> phi(basis.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        basis.eval(rule.points[q], phi);
        const double wf = rule.weights[q] * f(map.to_physical(rule.points[q]));
        for (std::size_t k = 0; k < phi.size(); ++k) out.values[k] += wf * phi[k];
    }
    return out;
}

ModalCoeffs h1_project(const ScalarFieldWithGradient& f, const ElementMap& map, int p, const QuadRule& rule)
{
    const ModalBasis basis(map.dim, p);
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    double c0 = 0;
    std::vector<double> phi(n);
    std::vector<Point> grad(n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point& xi = rule.points[q];
        basis.eval_grad(xi, phi, grad);
        const Point x = map.to_physical(xi);
        // Chain rule: reference gradient = A^T physical gradient.
        const Point gx = f.gradient(x);
        Point g{0, 0, 0};
        for (int a = 0; a < map.dim; ++a)
            for (int b = 0; b < map.dim; ++b) g[a] += map.A(b, a) * gx[b];
        const double w = rule.weights[q];
        c0 += w * f.value(x) * phi[0];
        for (Eigen::Index i = 0; i < n; ++i) {
            rhs[i] += w * dot(g, grad[i]);
            for (Eigen::Index j = 0; j <= i; ++j) K(i, j) += w * dot(grad[i], grad[j]);
        }
    }
    ModalCoeffs out{map.dim, p, Eigen::VectorXd::Zero(n)};
    out.values[0] = c0;
    if (n == 1) return out;
    // Constants are the nullspace of K; the mean condition fixes coefficient 0.
    const Eigen::MatrixXd Ks = K.bottomRightCorner(n - 1, n - 1).selfadjointView<Eigen::Lower>();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(Ks);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) throw SolverError("h1_project: singular stiffness block");
    out.values.tail(n - 1) = ldlt.solve(rhs.tail(n - 1));
    return out;
}

ModalCoeffs cdg_project(const ScalarField& f, const ElementMap& map, int p, const QuadRule& rule,
                        const std::optional<QuadRule>& facet_rule)
{
    const int dim = map.dim;
    ModalCoeffs out = l2_project(f, map, p, rule);
    const ModalBasis basis(dim, p);
    const std::size_t low = dim_P(dim, p - 1);
    const std::size_t n_top = basis.size() - low;
    out.values.tail(static_cast<Eigen::Index>(n_top)).setZero();

    // Facet test space P_p(facet): a point, Legendre polynomials, or a triangle basis.
    QuadRule frule;
    if (dim == 1) {
        frule.dim = 0;
        frule.points = {{0, 0, 0}};
        frule.weights = {1.0};
    } else {
        frule = facet_rule ? *facet_rule : default_facet_rule(dim, p);
    }
    std::optional<ModalBasis> facet_basis;
    if (dim == 3) facet_basis.emplace(2, p);

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_top, n_top);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_top);
    std::vector<double> phi(basis.size()), psi(n_top);
    for (std::size_t q = 0; q < frule.size(); ++q) {
        const Point& t = frule.points[q];
        const Point xi = outflow_facet_point(dim, t);
        basis.eval(xi, phi);
        if (dim == 1) psi[0] = 1.0;
        if (dim == 2)
            for (std::size_t m = 0; m < n_top; ++m) psi[m] = legendre_eval(static_cast<int>(m), t[0]);
        if (dim == 3) facet_basis->eval(t, psi);
        double r = f(map.to_physical(xi));
        for (std::size_t k = 0; k < low; ++k) r -= out.values[k] * phi[k];
        const double w = frule.weights[q];
        for (std::size_t m = 0; m < n_top; ++m) {
            rhs[m] += w * r * psi[m];
            for (std::size_t k = 0; k < n_top; ++k) M(m, k) += w * psi[m] * phi[low + k];
        }
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible() || lu.rcond() < 1e-12)
        throw SolverError("cdg_project: singular outflow-facet block (element not aligned with its outflow facet?)");
    out.values.tail(static_cast<Eigen::Index>(n_top)) = lu.solve(rhs);
    return out;
}

ModalCoeffs cdg_from_modal(const ModalCoeffs& coeffs, int p)
{
    if (p < 0) throw std::invalid_argument("cdg_from_modal: p must be nonnegative");
    const int dim = coeffs.dim;
    const ModalBasis out_basis(dim, p);
    ModalCoeffs out{dim, p, Eigen::VectorXd::Zero(out_basis.size())};
    if (coeffs.degree <= p) {
        out.values.head(coeffs.values.size()) = coeffs.values;
        return out;
    }
    const ModalBasis in_basis(dim, coeffs.degree);
    const std::size_t low = dim_P(dim, p - 1);
    out.values.head(low) = coeffs.values.head(low);
    // Un-normalised coefficients v = c / ||Phi||; the tail keeps all but the last index fixed.
    std::vector<double> vhat(out_basis.size() - low, 0.0);
    for (std::size_t k = low; k < in_basis.size(); ++k) {
        const PolyIndex& idx = in_basis.indices()[k];
        const int excess = idx.total_degree() - p;
        PolyIndex top = idx;
        top.idx[dim - 1] -= excess;
        if (top.idx[dim - 1] < 0) continue;
        const double v = coeffs.values[k] * in_basis.normalization(k);
        vhat[out_basis.position(top) - low] += (excess % 2 == 0 ? v : -v);
    }
    for (std::size_t k = low; k < out_basis.size(); ++k) out.values[k] = vhat[k - low] / out_basis.normalization(k);
    return out;
}

}  // namespace hyperdg
