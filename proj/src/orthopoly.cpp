#include "hyperdg/orthopoly.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperdg {

namespace {

// Homogenised Jacobi recurrence: r_n(x, s) = J_n^{(a,0)}(x/s) s^n, together with
// its partial derivatives in x and s.  With s = 1 this is the plain Jacobi
// polynomial; with a = 0 it is the homogenised Legendre polynomial.  The
// homogenised form is a polynomial in (x, s), so it stays finite where the
// collapsed coordinate x/s is undefined.
void jacobi_homogeneous(int a, int n_max, double x, double s, double* r, double* rx, double* rs)
{
    r[0] = 1.0;
    rx[0] = 0.0;
    rs[0] = 0.0;
    if (n_max == 0) return;
    const double ad = a;
    {
        const double A = 0.5 * (ad + 2.0);
        const double B = 0.5 * ad;
        r[1] = A * x + B * s;
        rx[1] = A;
        rs[1] = B;
    }
    for (int n = 1; n < n_max; ++n) {
        const double nd = n;
        const double k = 2.0 * nd + ad;
        const double A = (k + 1.0) * (k + 2.0) / (2.0 * (nd + 1.0) * (nd + ad + 1.0));
        const double B = (k + 1.0) * ad * ad / (2.0 * (nd + 1.0) * (nd + ad + 1.0) * k);
        const double C = nd * (nd + ad) * (k + 2.0) / ((nd + 1.0) * (nd + ad + 1.0) * k);
        const double lin = A * x + B * s;
        const double s2 = s * s;
        r[n + 1] = lin * r[n] - C * s2 * r[n - 1];
        rx[n + 1] = A * r[n] + lin * rx[n] - C * s2 * rx[n - 1];
        rs[n + 1] = B * r[n] + lin * rs[n] - C * (2.0 * s * r[n - 1] + s2 * rs[n - 1]);
    }
}

struct Scratch {
    std::vector<double> v, dx, ds;
    explicit Scratch(int n) : v(n + 1), dx(n + 1), ds(n + 1) {}
};

std::size_t binom_dim(int dim, int p)
{
    if (p < 0) return 0;
    const std::size_t q = static_cast<std::size_t>(p);
    switch (dim) {
    case 1: return q + 1;
    case 2: return (q + 1) * (q + 2) / 2;
    case 3: return (q + 1) * (q + 2) * (q + 3) / 6;
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
}

}  // namespace

std::size_t dim_P(int dim, int p) { return binom_dim(dim, p); }

double ReferenceSimplex::measure() const
{
    switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0;
    default: return 4.0 / 3.0;
    }
}

std::vector<int> ReferenceSimplex::facet_vertices(int k) const
{
    std::vector<int> out;
    for (int v = 0; v <= dim; ++v)
        if (v != k) out.push_back(v);
    return out;
}

ReferenceSimplex ReferenceSimplex::of(int dim)
{
    switch (dim) {
    case 1: return {1, {{-1, 0, 0}, {1, 0, 0}}, 1};
    case 2: return {2, {{-1, -1, 0}, {1, -1, 0}, {0, 1, 0}}, 2};
    case 3: return {3, {{-1, -1, -1}, {1, -1, -1}, {0, 1, -1}, {0, 0, 1}}, 3};
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
}

std::array<double, 2> legendre_eval_d(int j, double x) { return jacobi_eval_d(0, j, x); }

double legendre_eval(int j, double x) { return legendre_eval_d(j, x)[0]; }

std::array<double, 2> jacobi_eval_d(int ell, int j, double x)
{
    if (j < 0) throw std::invalid_argument("polynomial degree must be nonnegative");
    Scratch w(j);
    jacobi_homogeneous(ell, j, x, 1.0, w.v.data(), w.dx.data(), w.ds.data());
    return {w.v[j], w.dx[j]};
}

double jacobi_eval(int ell, int j, double x) { return jacobi_eval_d(ell, j, x)[0]; }

Point duffy_map(int dim, const Point& z)
{
    switch (dim) {
    case 1: return {z[0], 0, 0};
    case 2: return {z[0] * (1 - z[1]) / 2, z[1], 0};
    case 3: return {z[0] * (1 - z[1]) / 2 * (1 - z[2]) / 2, z[1] * (1 - z[2]) / 2, z[2]};
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
}

double duffy_jacobian(int dim, const Point& z)
{
    switch (dim) {
    case 1: return 1.0;
    case 2: return (1 - z[1]) / 2;
    case 3: {
        const double t = (1 - z[2]) / 2;
        return (1 - z[1]) / 2 * t * t;
    }
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
}

double koornwinder_eval(const PolyIndex& index, const Point& x)
{
    const auto& j = index.idx;
    switch (index.dim) {
    case 1: return legendre_eval(j[0], x[0]);
    case 2: {
        Scratch q(j[0]);
        jacobi_homogeneous(0, j[0], x[0], (1 - x[1]) / 2, q.v.data(), q.dx.data(), q.ds.data());
        return q.v[j[0]] * jacobi_eval(2 * j[0] + 1, j[1], x[1]);
    }
    case 3: {
        Scratch q(j[0]);
        jacobi_homogeneous(0, j[0], x[0], (1 - 2 * x[1] - x[2]) / 4, q.v.data(), q.dx.data(), q.ds.data());
        Scratch r(j[1]);
        jacobi_homogeneous(2 * j[0] + 1, j[1], x[1], (1 - x[2]) / 2, r.v.data(), r.dx.data(), r.ds.data());
        return q.v[j[0]] * r.v[j[1]] * jacobi_eval(2 * j[0] + 2 * j[1] + 2, j[2], x[2]);
    }
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
}

double koornwinder_norm_sq(const PolyIndex& index)
{
    const auto& j = index.idx;
    switch (index.dim) {
    case 1: return 2.0 / (2 * j[0] + 1);
    case 2: return 2.0 / ((2.0 * j[0] + 1) * (j[0] + j[1] + 1));
    case 3:
        // The last factor follows from the weighted Jacobi norm with weight
        // exponent 2j1+2j2+2; for j = 0 the product is the tetrahedron volume.
        return 2.0 / (2 * j[0] + 1) * 2.0 / (2 * j[0] + 2 * j[1] + 2) *
               2.0 / (2 * j[0] + 2 * j[1] + 2 * j[2] + 3);
    default: throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
}

std::vector<PolyIndex> graded_indices(int dim, int p)
{
    std::vector<PolyIndex> out;
    out.reserve(dim_P(dim, p));
    for (int d = 0; d <= p; ++d) {
        switch (dim) {
        case 1: out.push_back({1, {d, 0, 0}}); break;
        case 2:
            for (int j = 0; j <= d; ++j) out.push_back({2, {j, d - j, 0}});
            break;
        case 3:
            for (int j1 = 0; j1 <= d; ++j1)
                for (int j2 = 0; j1 + j2 <= d; ++j2) out.push_back({3, {j1, j2, d - j1 - j2}});
            break;
        default: throw std::invalid_argument("dimension must be 1, 2 or 3");
        }
    }
    return out;
}

ModalBasis::ModalBasis(int dim, int degree) : dim_(dim), degree_(degree)
{
    if (degree < 0) throw std::invalid_argument("basis degree must be nonnegative");
    indices_ = graded_indices(dim, degree);
    scale_.reserve(indices_.size());
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        scale_.push_back(1.0 / std::sqrt(koornwinder_norm_sq(indices_[k])));
        lookup_.emplace(indices_[k], k);
    }
}

std::size_t ModalBasis::position(const PolyIndex& index) const { return lookup_.at(index); }

void ModalBasis::eval(const Point& xi, std::span<double> values) const
{
    // One code path for values and gradients keeps both consistent; the
    // gradient terms cost a few multiplies per function.
    thread_local std::vector<Point> grads;
    grads.resize(size());
    eval_grad(xi, values, grads);
}

namespace {

// Flat workspace for one family of recurrences: block b holds n_b + 1 entries.
struct Blocks {
    std::vector<double> v, dx, ds;
    std::vector<std::size_t> offset;

    void reset() { offset.assign(1, 0); }
    std::size_t add(int n)
    {
        const std::size_t start = offset.back();
        offset.push_back(start + static_cast<std::size_t>(n) + 1);
        if (v.size() < offset.back()) {
            v.resize(offset.back());
            dx.resize(offset.back());
            ds.resize(offset.back());
        }
        return start;
    }
};

}  // namespace

void ModalBasis::eval_grad(const Point& xi, std::span<double> values, std::span<Point> grads) const
{
    const int p = degree_;
    thread_local Blocks q, r, t;
    q.reset();
    q.add(p);
    std::size_t k = 0;
    if (dim_ == 1) {
        jacobi_homogeneous(0, p, xi[0], 1.0, q.v.data(), q.dx.data(), q.ds.data());
        for (int j = 0; j <= p; ++j, ++k) {
            values[k] = scale_[k] * q.v[j];
            grads[k] = {scale_[k] * q.dx[j], 0, 0};
        }
        return;
    }
    if (dim_ == 2) {
        const double x = xi[0], y = xi[1];
        jacobi_homogeneous(0, p, x, (1 - y) / 2, q.v.data(), q.dx.data(), q.ds.data());
        r.reset();
        for (int j = 0; j <= p; ++j) {
            const std::size_t o = r.add(p - j);
            jacobi_homogeneous(2 * j + 1, p - j, y, 1.0, &r.v[o], &r.dx[o], &r.ds[o]);
        }
        // Graded order: degree d, then j = 0..d with l = d - j.
        for (int d = 0; d <= p; ++d) {
            for (int j = 0; j <= d; ++j, ++k) {
                const std::size_t o = r.offset[j] + static_cast<std::size_t>(d - j);
                const double Jv = r.v[o];
                const double s = scale_[k];
                values[k] = s * q.v[j] * Jv;
                grads[k] = {s * q.dx[j] * Jv, s * (-0.5 * q.ds[j] * Jv + q.v[j] * r.dx[o]), 0};
            }
        }
        return;
    }
    const double x1 = xi[0], x2 = xi[1], x3 = xi[2];
    jacobi_homogeneous(0, p, x1, (1 - 2 * x2 - x3) / 4, q.v.data(), q.dx.data(), q.ds.data());
    const double s2 = (1 - x3) / 2;
    // r block j1 : homogenised J^{2j1+1}_{j2}(x2 / s2) s2^{j2}
    // t block (j1, j2) : J^{2j1+2j2+2}_{j3}(x3)
    r.reset();
    t.reset();
    std::vector<std::size_t> t_block(static_cast<std::size_t>((p + 1) * (p + 1)));
    for (int j1 = 0; j1 <= p; ++j1) {
        const std::size_t o = r.add(p - j1);
        jacobi_homogeneous(2 * j1 + 1, p - j1, x2, s2, &r.v[o], &r.dx[o], &r.ds[o]);
        for (int j2 = 0; j1 + j2 <= p; ++j2) {
            const std::size_t ot = t.add(p - j1 - j2);
            t_block[j1 * (p + 1) + j2] = ot;
            jacobi_homogeneous(2 * j1 + 2 * j2 + 2, p - j1 - j2, x3, 1.0, &t.v[ot], &t.dx[ot], &t.ds[ot]);
        }
    }
    for (int d = 0; d <= p; ++d) {
        for (int j1 = 0; j1 <= d; ++j1) {
            for (int j2 = 0; j1 + j2 <= d; ++j2, ++k) {
                const int j3 = d - j1 - j2;
                const std::size_t orr = r.offset[j1] + j2;
                const std::size_t ot = t_block[j1 * (p + 1) + j2] + j3;
                const double Q = q.v[j1], R = r.v[orr], T = t.v[ot];
                const double s = scale_[k];
                values[k] = s * Q * R * T;
                grads[k] = {s * q.dx[j1] * R * T,
                            s * (-0.5 * q.ds[j1] * R * T + Q * r.dx[orr] * T),
                            s * (-0.25 * q.ds[j1] * R * T - 0.5 * Q * r.ds[orr] * T + Q * R * t.dx[ot])};
            }
        }
    }
}

}  // namespace hyperdg
