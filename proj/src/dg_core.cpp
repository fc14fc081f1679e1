#include "hyperdg/dg_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "hyperdg/errors.hpp"

namespace hyperdg {

namespace {

Point outward_normal_2d(const Point& a, const Point& b, const Point& opposite)
{
    Point n{b[1] - a[1], a[0] - b[0], 0};
    n = (1.0 / norm(n)) * n;
    if (dot(n, opposite - a) > 0) n = -1.0 * n;
    return n;
}

Eigen::VectorXd column(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

}  // namespace

DGSpace::DGSpace(std::shared_ptr<const Mesh> mesh, int p, const ConvectionField& beta, QuadPolicy policy,
                 std::optional<double> singular_x)
    : mesh_(std::move(mesh)), p_(p), beta_(beta), policy_(policy), basis_(2, p)
{
    if (mesh_->dim() != 2) throw std::invalid_argument("DGSpace: only 2D meshes are supported");
    if (p < 0) throw std::invalid_argument("DGSpace: p must be nonnegative");
    const auto n_el = static_cast<int>(mesh_->n_elements());
    const auto nb = static_cast<Eigen::Index>(basis_.size());
    const int levels = policy_.levels(p);

    maps_.reserve(n_el);
    for (int e = 0; e < n_el; ++e) maps_.push_back(affine_map(*mesh_, e));

    rule_ = simplex_rule(2, 2 * p + policy_.margin);
    const auto nq = static_cast<Eigen::Index>(rule_.size());
    V_.resize(nq, nb);
    G_[0].resize(nq, nb);
    G_[1].resize(nq, nb);
    std::vector<double> phi(nb);
    std::vector<Point> dphi(nb);
    for (Eigen::Index q = 0; q < nq; ++q) {
        basis_.eval_grad(rule_.points[q], phi, dphi);
        for (Eigen::Index k = 0; k < nb; ++k) {
            V_(q, k) = phi[k];
            G_[0](q, k) = dphi[k][0];
            G_[1](q, k) = dphi[k][1];
        }
    }
    const Eigen::VectorXd w = column(rule_.weights);
    for (int a = 0; a < 2; ++a) K_[a] = V_.transpose() * w.asDiagonal() * G_[a];

    singular_.assign(n_el, false);
    graded_.resize(n_el);
    if (singular_x) {
        const double xs = *singular_x;
        for (int e = 0; e < n_el; ++e) {
            double lo = INFINITY, hi = -INFINITY;
            for (int i = 0; i < 3; ++i) {
                const double x = mesh_->vertices()[mesh_->elements()[e][i]][0];
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
            const double tol = 1e-12 * (hi - lo + 1);
            if (lo > xs + tol || hi < xs - tol) continue;
            singular_[e] = true;
            const ElementMap& m = maps_[e];
            graded_[e] = composite_refine(rule_, ReferenceLine{m.row(0), xs - m.origin[0]}, levels);
        }
    }

    const QuadRule gl = gauss_legendre(p + 1 + (policy_.margin + 1) / 2);
    facets_.resize(mesh_->facets().size());
    for (std::size_t fid = 0; fid < mesh_->facets().size(); ++fid) {
        const Facet& f = mesh_->facets()[fid];
        const Point P0 = mesh_->vertices()[f.vertices[0]];
        const Point P1 = mesh_->vertices()[f.vertices[1]];
        const double half = 0.5 * norm(P1 - P0);
        QuadRule rule1 = gl;
        if (singular_x && std::abs(P1[0] - P0[0]) > 1e-14) {
            const double t0 = 2 * (*singular_x - P0[0]) / (P1[0] - P0[0]) - 1;
            rule1 = composite_refine_interval(gl, t0, levels);
        }
        FacetQuad& fq = facets_[fid];
        const Point opposite = mesh_->vertices()[mesh_->elements()[f.owner][f.owner_local]];
        fq.normal = outward_normal_2d(P0, P1, opposite);
        const auto n = static_cast<Eigen::Index>(rule1.size());
        fq.owner_values.resize(n, nb);
        if (!f.is_boundary()) fq.neighbor_values.resize(n, nb);
        for (Eigen::Index q = 0; q < n; ++q) {
            const double t = rule1.points[q][0];
            const Point x = 0.5 * (1 - t) * P0 + 0.5 * (1 + t) * P1;
            fq.points.push_back(x);
            fq.weights.push_back(rule1.weights[q] * half);
            const Point b = beta_(x);
            double s = dot(fq.normal, b);
            if (std::abs(s) <= characteristic_tolerance * norm(b)) s = 0;
            fq.flux.push_back(s);
            basis_.eval(maps_[f.owner].to_reference(x), phi);
            for (Eigen::Index k = 0; k < nb; ++k) fq.owner_values(q, k) = phi[k];
            if (!f.is_boundary()) {
                basis_.eval(maps_[f.neighbor].to_reference(x), phi);
                for (Eigen::Index k = 0; k < nb; ++k) fq.neighbor_values(q, k) = phi[k];
            }
        }
    }
}

const QuadRule& DGSpace::element_rule(int e) const { return graded_[e] ? *graded_[e] : rule_; }

ModalCoeffs DGSolution::element(int e) const
{
    const auto n = static_cast<Eigen::Index>(block_size());
    return {mesh->dim(), p, coeffs.segment(e * n, n)};
}

Eigen::VectorXd BlockSystem::apply(const Eigen::VectorXd& u) const
{
    const Eigen::Index n = block_size;
    Eigen::VectorXd out(u.size());
    for (std::size_t e = 0; e < diag.size(); ++e) {
        auto row = out.segment(e * n, n);
        row = diag[e] * u.segment(e * n, n);
        for (const auto& c : couplings[e]) row += c.block * u.segment(c.col * n, n);
    }
    return out;
}

Eigen::SparseMatrix<double> BlockSystem::to_sparse() const
{
    const Eigen::Index n = block_size;
    std::vector<Eigen::Triplet<double>> trip;
    auto put = [&](Eigen::Index r0, Eigen::Index c0, const Eigen::MatrixXd& B) {
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i)
                if (B(i, j) != 0.0) trip.emplace_back(r0 + i, c0 + j, B(i, j));
    };
    for (std::size_t e = 0; e < diag.size(); ++e) {
        put(e * n, e * n, diag[e]);
        for (const auto& c : couplings[e]) put(e * n, c.col * n, c.block);
    }
    const Eigen::Index N = n * static_cast<Eigen::Index>(diag.size());
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

Eigen::MatrixXd element_matrix(const DGSpace& space, const ProblemSpec& spec, int e)
{
    const ElementMap& m = space.map(e);
    const auto nb = static_cast<Eigen::Index>(space.n_basis());
    if (spec.beta.constant && spec.c_constant) {
        const Point b = m.pull_back(spec.beta(m.origin));
        const double c = spec.c(m.origin);
        Eigen::MatrixXd A = b[0] * space.advection(0) + b[1] * space.advection(1);
        A.diagonal().array() += c;
        return m.abs_det() * A;
    }
    const QuadRule& rule = space.volume_rule();
    const auto nq = static_cast<Eigen::Index>(rule.size());
    Eigen::VectorXd b0(nq), b1(nq), cw(nq);
    for (Eigen::Index q = 0; q < nq; ++q) {
        const Point x = m.to_physical(rule.points[q]);
        const Point b = m.pull_back(spec.beta(x));
        b0[q] = b[0];
        b1[q] = b[1];
        cw[q] = spec.c(x);
    }
    const Eigen::VectorXd w = column(rule.weights);
    Eigen::MatrixXd trial = b0.asDiagonal() * space.grad(0);
    trial.noalias() += b1.asDiagonal() * space.grad(1);
    trial.noalias() += cw.asDiagonal() * space.values();
    Eigen::MatrixXd A(nb, nb);
    A.noalias() = space.values().transpose() * (w.asDiagonal() * trial);
    return m.abs_det() * A;
}

Eigen::VectorXd element_load(const DGSpace& space, const ScalarField& f, int e)
{
    const ElementMap& m = space.map(e);
    const auto nb = static_cast<Eigen::Index>(space.n_basis());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nb);
    if (!space.singular(e)) {
        const QuadRule& rule = space.volume_rule();
        Eigen::VectorXd wf(rule.size());
        for (std::size_t q = 0; q < rule.size(); ++q) wf[q] = rule.weights[q] * f(m.to_physical(rule.points[q]));
        out.noalias() = space.values().transpose() * wf;
    } else {
        const QuadRule& rule = space.element_rule(e);
        std::vector<double> phi(nb);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            space.basis().eval(rule.points[q], phi);
            out += (rule.weights[q] * f(m.to_physical(rule.points[q]))) * column(phi);
        }
    }
    return m.abs_det() * out;
}

namespace {

// Facet values and outward flux as seen from element e.
struct Side {
    const Eigen::MatrixXd* values;
    double sign;
};

Side side_of(const Facet& f, const FacetQuad& fq, int e)
{
    return f.owner == e ? Side{&fq.owner_values, 1.0} : Side{&fq.neighbor_values, -1.0};
}

void add_coupling(std::vector<BlockSystem::Coupling>& row, int col, const Eigen::MatrixXd& block)
{
    for (auto& c : row)
        if (c.col == col) {
            c.block += block;
            return;
        }
    row.push_back({col, block});
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_local(const DGSpace& space, const ProblemSpec& spec, int e,
                                                           const std::vector<UpwindTrace>& traces)
{
    const Mesh& mesh = space.mesh();
    Eigen::MatrixXd A = element_matrix(space, spec, e);
    Eigen::VectorXd b = spec.f ? element_load(space, spec.f, e) : Eigen::VectorXd::Zero(space.n_basis());
    for (int l = 0; l < 3; ++l) {
        const int fid = mesh.element_facet(e, l);
        const Facet& f = mesh.facets()[fid];
        const FacetQuad& fq = space.facet(fid);
        const Side s = side_of(f, fq, e);
        const auto n = static_cast<Eigen::Index>(fq.points.size());
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        for (Eigen::Index q = 0; q < n; ++q) d[q] = std::min(s.sign * fq.flux[q], 0.0) * fq.weights[q];
        if (d.isZero(0.0)) continue;
        const auto it = std::find_if(traces.begin(), traces.end(), [l](const UpwindTrace& t) { return t.local_facet == l; });
        if (it == traces.end())
            throw std::invalid_argument("assemble_local: element " + std::to_string(e) + ", local facet " +
                                        std::to_string(l) + " (facet " + std::to_string(fid) +
                                        ") is inflow but has no upwind trace");
        const Eigen::MatrixXd& P = *s.values;
        A.noalias() -= P.transpose() * d.asDiagonal() * P;
        Eigen::VectorXd tv(n);
        for (Eigen::Index q = 0; q < n; ++q) tv[q] = d[q] * it->value(fq.points[q]);
        b.noalias() -= P.transpose() * tv;
    }
    return {A, b};
}

BlockSystem assemble_global(const DGSpace& space, const ProblemSpec& spec)
{
    const Mesh& mesh = space.mesh();
    const auto n_el = static_cast<int>(mesh.n_elements());
    const auto nb = static_cast<Eigen::Index>(space.n_basis());
    BlockSystem sys;
    sys.block_size = static_cast<int>(nb);
    sys.diag.resize(n_el);
    sys.couplings.resize(n_el);
    sys.rhs = Eigen::VectorXd::Zero(nb * n_el);
    const bool with_rhs = spec.f && spec.g;
    for (int e = 0; e < n_el; ++e) {
        sys.diag[e] = element_matrix(space, spec, e);
        if (with_rhs) sys.rhs.segment(e * nb, nb) = element_load(space, spec.f, e);
    }
    for (std::size_t fid = 0; fid < mesh.facets().size(); ++fid) {
        const Facet& f = mesh.facets()[fid];
        const FacetQuad& fq = space.facet(static_cast<int>(fid));
        const auto n = static_cast<Eigen::Index>(fq.points.size());
        // Weighted inflow fluxes for the owner (s < 0) and for the neighbour (s > 0).
        Eigen::VectorXd d_own(n), d_nb(n);
        for (Eigen::Index q = 0; q < n; ++q) {
            d_own[q] = -std::min(fq.flux[q], 0.0) * fq.weights[q];
            d_nb[q] = std::max(fq.flux[q], 0.0) * fq.weights[q];
        }
        const Eigen::MatrixXd& Po = fq.owner_values;
        if (!d_own.isZero(0.0)) {
            sys.diag[f.owner].noalias() += Po.transpose() * d_own.asDiagonal() * Po;
            if (!f.is_boundary()) {
                add_coupling(sys.couplings[f.owner], f.neighbor,
                             -(Po.transpose() * d_own.asDiagonal() * fq.neighbor_values));
            } else if (with_rhs) {
                Eigen::VectorXd gv(n);
                for (Eigen::Index q = 0; q < n; ++q) gv[q] = d_own[q] == 0.0 ? 0.0 : d_own[q] * spec.g(fq.points[q]);
                sys.rhs.segment(f.owner * nb, nb).noalias() += Po.transpose() * gv;
            }
        }
        if (!f.is_boundary() && !d_nb.isZero(0.0)) {
            const Eigen::MatrixXd& Pn = fq.neighbor_values;
            sys.diag[f.neighbor].noalias() += Pn.transpose() * d_nb.asDiagonal() * Pn;
            add_coupling(sys.couplings[f.neighbor], f.owner, -(Pn.transpose() * d_nb.asDiagonal() * Po));
        }
    }
    return sys;
}

double relative_residual(const BlockSystem& system, const Eigen::VectorXd& u)
{
    const double r = (system.rhs - system.apply(u)).norm();
    const double b = system.rhs.norm();
    return b > 0 ? r / b : r;
}

namespace {

DGSolution make_solution(const DGSpace& space, Eigen::VectorXd coeffs, SolveInfo info)
{
    return {space.mesh_ptr(), space.p(), std::move(coeffs), std::move(info)};
}

}  // namespace

DGSolution solve_sweep(const DGSpace& space, const ProblemSpec& spec, const AdmissibilityReport& report)
{
    if (!spec.beta.constant) throw std::invalid_argument("solve_sweep: requires a constant convection field");
    if (!report.verdict || report.upwind_order.size() != space.mesh().n_elements())
        throw TopologyError("solve_sweep: mesh is not admissible for this field; use the global solver (solver=auto)");
    const BlockSystem sys = assemble_global(space, spec);
    const Eigen::Index nb = sys.block_size;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(sys.rhs.size());
    std::vector<bool> done(sys.diag.size(), false);
    for (int e : report.upwind_order) {
        Eigen::VectorXd r = sys.rhs.segment(e * nb, nb);
        for (const auto& c : sys.couplings[e]) {
            if (!done[c.col])
                throw SolverError("solve_sweep: element " + std::to_string(e) + " depends on unsolved element " +
                                  std::to_string(c.col));
            r.noalias() -= c.block * u.segment(c.col * nb, nb);
        }
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.diag[e]);
        u.segment(e * nb, nb) = lu.solve(r);
        if (!u.segment(e * nb, nb).allFinite())
            throw SolverError("solve_sweep: singular local system on element " + std::to_string(e));
        done[e] = true;
    }
    SolveInfo info;
    info.solver = "sweep";
    info.iterations = 1;
    info.residual = relative_residual(sys, u);
    info.history = {info.residual};
    return make_solution(space, std::move(u), std::move(info));
}

DGSolution solve_global(const DGSpace& space, const ProblemSpec& spec, GlobalSolverOptions options)
{
    const BlockSystem sys = assemble_global(space, spec);
    const Mesh& mesh = space.mesh();
    const auto n_el = static_cast<int>(mesh.n_elements());
    const Eigen::Index nb = sys.block_size;
    SolveInfo info;
    info.solver = "gauss-seidel";
    Eigen::VectorXd u = Eigen::VectorXd::Zero(sys.rhs.size());
    if (sys.rhs.norm() == 0.0) return make_solution(space, std::move(u), std::move(info));

    // Approximate upwind order: barycentres sorted along the mean field.
    Point mean{0, 0, 0};
    for (int e = 0; e < n_el; ++e) mean = mean + spec.beta(mesh.barycenter(e));
    std::vector<int> order(n_el);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> key(n_el);
    for (int e = 0; e < n_el; ++e) key[e] = dot(mesh.barycenter(e), mean);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });

    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lu;
    lu.reserve(n_el);
    for (int e = 0; e < n_el; ++e) lu.emplace_back(sys.diag[e]);

    bool converged = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
        for (int e : order) {
            Eigen::VectorXd r = sys.rhs.segment(e * nb, nb);
            for (const auto& c : sys.couplings[e]) r.noalias() -= c.block * u.segment(c.col * nb, nb);
            u.segment(e * nb, nb) = lu[e].solve(r);
        }
        const double res = relative_residual(sys, u);
        info.history.push_back(res);
        info.iterations = it;
        if (!std::isfinite(res)) break;
        if (res < options.tolerance) {
            converged = true;
            break;
        }
        if (it >= 20 && res > 0.99 * info.history[it - 11]) break;
    }
    if (!converged) {
        info.solver = "sparse-lu";
        const Eigen::SparseMatrix<double> A = sys.to_sparse();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> slu;
        slu.compute(A);
        if (slu.info() != Eigen::Success) throw SolverError("solve_global: sparse LU factorization failed", info.history);
        u = slu.solve(sys.rhs);
        double res = relative_residual(sys, u);
        info.history.push_back(res);
        // One step of iterative refinement.
        if (res >= options.tolerance) {
            u += slu.solve(sys.rhs - sys.apply(u));
            res = relative_residual(sys, u);
            info.history.push_back(res);
        }
        if (!(res < options.tolerance))
            throw SolverError("solve_global: residual " + std::to_string(res) + " above tolerance", info.history);
    }
    info.residual = info.history.back();
    return make_solution(space, std::move(u), std::move(info));
}

StabilityTerms stability_functional(const DGSpace& space, const DGSolution& u, const ProblemSpec& spec)
{
    const Mesh& mesh = space.mesh();
    const Eigen::Index nb = static_cast<Eigen::Index>(space.n_basis());
    StabilityTerms t;
    const Eigen::VectorXd w = column(space.volume_rule().weights);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const Eigen::VectorXd vals = space.values() * u.coeffs.segment(e * nb, nb);
        t.reaction += space.map(static_cast<int>(e)).abs_det() * w.dot(vals.cwiseAbs2());
    }
    t.reaction *= spec.cbar0;
    for (std::size_t fid = 0; fid < mesh.facets().size(); ++fid) {
        const Facet& f = mesh.facets()[fid];
        const FacetQuad& fq = space.facet(static_cast<int>(fid));
        const Eigen::VectorXd uo = fq.owner_values * u.coeffs.segment(f.owner * nb, nb);
        if (f.is_boundary()) {
            for (std::size_t q = 0; q < fq.points.size(); ++q) t.boundary += fq.weights[q] * std::abs(fq.flux[q]) * uo[q] * uo[q];
            continue;
        }
        const Eigen::VectorXd un = fq.neighbor_values * u.coeffs.segment(f.neighbor * nb, nb);
        for (std::size_t q = 0; q < fq.points.size(); ++q)
            t.jumps += fq.weights[q] * std::abs(fq.flux[q]) * (uo[q] - un[q]) * (uo[q] - un[q]);
    }
    return t;
}

std::pair<double, double> data_norms_sq(const DGSpace& space, const ProblemSpec& spec)
{
    const Mesh& mesh = space.mesh();
    double f2 = 0, g2 = 0;
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const int ei = static_cast<int>(e);
        const QuadRule& rule = space.element_rule(ei);
        const ElementMap& m = space.map(ei);
        double s = 0;
        for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * std::pow(spec.f(m.to_physical(rule.points[q])), 2);
        f2 += m.abs_det() * s;
    }
    for (std::size_t fid = 0; fid < mesh.facets().size(); ++fid) {
        if (!mesh.facets()[fid].is_boundary()) continue;
        const FacetQuad& fq = space.facet(static_cast<int>(fid));
        for (std::size_t q = 0; q < fq.points.size(); ++q)
            if (fq.flux[q] < 0) g2 += fq.weights[q] * std::pow(spec.g(fq.points[q]), 2);
    }
    return {f2, g2};
}

double energy_identity_check(const DGSpace& space, const DGSolution& v, const ProblemSpec& spec)
{
    if (!spec.beta.constant) throw std::invalid_argument("energy_identity_check: requires a constant convection field");
    ProblemSpec homogeneous = spec;
    homogeneous.f = nullptr;
    homogeneous.g = nullptr;
    const BlockSystem sys = assemble_global(space, homogeneous);
    const double bvv = v.coeffs.dot(sys.apply(v.coeffs));

    // Independent pointwise evaluation of the right-hand side.
    const Mesh& mesh = space.mesh();
    const ModalBasis& basis = space.basis();
    const auto value = [&](int e, const Point& x) {
        return v.element(e).eval(basis, space.map(e).to_reference(x));
    };
    double rhs = 0;
    const QuadRule rule = simplex_rule(2, 2 * space.p() + 2);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const int ei = static_cast<int>(e);
        const ElementMap& m = space.map(ei);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point x = m.to_physical(rule.points[q]);
            rhs += m.abs_det() * rule.weights[q] * spec.c(x) * std::pow(value(ei, x), 2);
        }
    }
    const QuadRule gl = gauss_legendre(space.p() + 2);
    for (const Facet& f : mesh.facets()) {
        const Point P0 = mesh.vertices()[f.vertices[0]];
        const Point P1 = mesh.vertices()[f.vertices[1]];
        const Point opposite = mesh.vertices()[mesh.elements()[f.owner][f.owner_local]];
        const Point n = outward_normal_2d(P0, P1, opposite);
        const double half = 0.5 * norm(P1 - P0);
        for (std::size_t q = 0; q < gl.size(); ++q) {
            const double t = gl.points[q][0];
            const Point x = 0.5 * (1 - t) * P0 + 0.5 * (1 + t) * P1;
            const double s = std::abs(dot(n, spec.beta(x)));
            const double vo = value(f.owner, x);
            const double jump = f.is_boundary() ? vo : vo - value(f.neighbor, x);
            rhs += 0.5 * half * gl.weights[q] * s * jump * jump;
        }
    }
    return std::abs(bvv - rhs);
}

}  // namespace hyperdg
