#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "hyperdg/geometry.hpp"

namespace hyperdg {

/// Multi-index of a Legendre/Koornwinder polynomial: (j), (j, l) or (j1, j2, j3).
struct PolyIndex {
    int dim = 1;
    std::array<int, 3> idx{0, 0, 0};

    int total_degree() const { return idx[0] + idx[1] + idx[2]; }
    bool operator==(const PolyIndex&) const = default;
    auto operator<=>(const PolyIndex&) const = default;
};

/// Reference interval [-1,1], triangle (-1,-1),(1,-1),(0,1), tetrahedron
/// (-1,-1,-1),(1,-1,-1),(0,1,-1),(0,0,1).
///
/// Local facet k is the facet opposite vertex k.  The distinguished outflow
/// facet is the one opposite the last vertex: the point -1 in 1D, the edge
/// y = -1 in 2D, the face z = -1 in 3D.
struct ReferenceSimplex {
    int dim;
    std::vector<Point> vertices;
    int outflow_facet_id;

    double measure() const;
    /// Vertex ids of local facet k, increasing order.
    std::vector<int> facet_vertices(int k) const;

    static ReferenceSimplex of(int dim);
};

/// Number of polynomials of total degree <= p in `dim` variables (0 for p < 0).
std::size_t dim_P(int dim, int p);

/// Legendre polynomial L_j(x) by the three-term recurrence.
double legendre_eval(int j, double x);
/// L_j(x) and L_j'(x).
std::array<double, 2> legendre_eval_d(int j, double x);

/// Jacobi polynomial with weight (1-x)^ell (1+x)^0, normalised so that
/// J_j(-1) = (-1)^j and  int (1-x)^ell J_i J_j = 2^{ell+1}/(2j+ell+1) delta_ij.
double jacobi_eval(int ell, int j, double x);
std::array<double, 2> jacobi_eval_d(int ell, int j, double x);

/// Collapsed-coordinate map from the cube [-1,1]^dim onto the reference simplex.
Point duffy_map(int dim, const Point& z);
double duffy_jacobian(int dim, const Point& z);

/// Un-normalised Koornwinder polynomial; total on the closed simplex.
double koornwinder_eval(const PolyIndex& index, const Point& x);
/// Closed-form squared L2 norm of the un-normalised polynomial on the reference simplex.
double koornwinder_norm_sq(const PolyIndex& index);

/// Graded-lexicographic indices with total degree <= p.
std::vector<PolyIndex> graded_indices(int dim, int p);

/// L2-orthonormal modal basis of P_p on the reference simplex.
///
/// Function k is koornwinder(indices()[k]) / sqrt(koornwinder_norm_sq).  All
/// functions of degree d precede those of degree d+1, so the first
/// dim_P(dim, p-1) entries span P_{p-1}.
class ModalBasis {
public:
    ModalBasis(int dim, int degree);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    std::size_t size() const { return indices_.size(); }
    const std::vector<PolyIndex>& indices() const { return indices_; }
    /// 1 / ||Phi_k|| for the un-normalised Koornwinder function.
    double normalization(std::size_t k) const { return scale_[k]; }
    /// Position of an index in the ordering; throws std::out_of_range if absent.
    std::size_t position(const PolyIndex& index) const;

    /// Values of all basis functions at a reference point.
    void eval(const Point& xi, std::span<double> values) const;
    /// Values and reference gradients of all basis functions.
    void eval_grad(const Point& xi, std::span<double> values, std::span<Point> grads) const;

private:
    int dim_;
    int degree_;
    std::vector<PolyIndex> indices_;
    std::vector<double> scale_;
    std::map<PolyIndex, std::size_t> lookup_;
};

}  // namespace hyperdg
