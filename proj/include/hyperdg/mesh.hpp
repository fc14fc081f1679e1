#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "hyperdg/fields.hpp"
#include "hyperdg/geometry.hpp"

namespace hyperdg {

/// (dim-1)-simplex shared by one (boundary) or two (interior) elements.
struct Facet {
    std::array<int, 3> vertices{-1, -1, -1};  // sorted, first `dim` entries used
    int owner = -1;
    int owner_local = -1;  // local facet index in the owner (opposite local vertex)
    int neighbor = -1;     // -1 on the boundary
    int neighbor_local = -1;

    bool is_boundary() const { return neighbor < 0; }
};

/// Conforming simplicial mesh with facet topology.
///
/// Local facet i of an element is the facet opposite its local vertex i.
/// Elements are stored with positive orientation.
class Mesh {
public:
    using Element = std::array<int, 4>;

    /// Validates and builds the topology.  Throws TopologyError on repeated or
    /// out-of-range vertex ids, zero-measure elements, facets shared by more
    /// than two elements, and hanging vertices.
    static Mesh build(int dim, std::vector<Point> vertices, std::vector<Element> elements);

    int dim() const { return dim_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Facet>& facets() const { return facets_; }
    std::size_t n_elements() const { return elements_.size(); }

    /// Facet id of local facet `local` of element `e`.
    int element_facet(int e, int local) const { return element_facets_[e][local]; }
    /// Physical vertices of local facet `local` of element `e`.
    std::vector<Point> facet_points(int e, int local) const;
    Point barycenter(int e) const;
    double measure(int e) const;

    /// Maximum element diameter.
    double h() const { return h_; }
    /// Maximum over elements of diameter / inradius.
    double sigma() const { return sigma_; }

private:
    int dim_ = 2;
    std::vector<Point> vertices_;
    std::vector<Element> elements_;
    std::vector<Facet> facets_;
    std::vector<std::array<int, 4>> element_facets_;
    double h_ = 0;
    double sigma_ = 0;
};

/// Read the ASCII `simplexmesh` format.  Throws ParseError (with line number)
/// or TopologyError.
Mesh load_mesh(std::istream& in);
void save_mesh(std::ostream& out, const Mesh& mesh);

enum class Diagonal { against_flow, with_flow };

/// nx x ny squares on (-1,1)^2, each split into two triangles.  `against_flow`
/// cuts along the (1,1) direction so that every triangle has exactly one
/// outflow facet for beta = (1,1); `with_flow` uses the other diagonal.
Mesh gen_structured(int nx, int ny, Diagonal diagonal);

enum class FacetClass { outflow, inflow, characteristic, mixed };

struct FacetFlux {
    FacetClass cls = FacetClass::characteristic;
    Point normal{0, 0, 0};         // unit outward normal of the element
    std::vector<Point> points;     // physical sample points on the facet
    std::vector<double> flux;      // n . beta at `points`
};

/// Per element, per local facet classification with respect to beta.
struct FacetClassification {
    std::vector<std::vector<FacetFlux>> facets;

    const FacetFlux& at(int e, int local) const { return facets[e][local]; }
    int outflow_count(int e) const;
    /// Local facet index of the unique outflow facet, or -1.
    int unique_outflow(int e) const;
};

/// Relative threshold |n . beta| <= tol |beta| for characteristic facets.
inline constexpr double characteristic_tolerance = 1e-12;

FacetClassification classify_facets(const Mesh& mesh, const ConvectionField& beta);

struct InflowFacetCheck {
    int facet;
    int element;   // element for which the facet is inflow
    int neighbor;  // upwind element
    bool a2_ok;
};

struct AdmissibilityReport {
    bool applicable = true;  // false for variable beta
    std::vector<int> outflow_facet_count;
    std::vector<bool> a1_ok;
    std::vector<InflowFacetCheck> a2;
    std::vector<int> upwind_order;  // empty when a cycle exists
    std::vector<int> cycle;         // element ids along a cycle, if any
    bool verdict = false;
};

AdmissibilityReport check_admissible(const Mesh& mesh, const ConvectionField& beta);

/// Affine map x = A xi + origin from the reference simplex onto an element.
struct ElementMap {
    int dim = 2;
    std::array<int, 4> vertex_ids{-1, -1, -1, -1};  // mesh vertices in reference order
    std::array<int, 4> local_facet{0, 1, 2, 3};     // element local facet for reference facet k
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d A_inv = Eigen::Matrix3d::Identity();
    Point origin{0, 0, 0};
    double det = 1.0;                          // signed
    std::array<double, 4> facet_scale{1, 1, 1, 1};  // physical / reference facet measure

    Point to_physical(const Point& xi) const;
    Point to_reference(const Point& x) const;
    double abs_det() const { return std::abs(det); }
    /// Pull a physical vector back: A^{-1} v (for beta . grad with reference gradients).
    Point pull_back(const Point& v) const;
    /// Reference direction whose component equals the physical coordinate `axis`:
    /// x_axis = row . xi + origin[axis].
    Point row(int axis) const { return {A(axis, 0), A(axis, 1), A(axis, 2)}; }

    static ElementMap identity(int dim);
};

/// Map using the element's stored vertex order (reference facet k = local facet k).
ElementMap affine_map(const Mesh& mesh, int element);

/// Map whose reference outflow facet lands on the element's unique outflow
/// facet.  Throws TopologyError when the element violates A1.
ElementMap affine_map(const Mesh& mesh, int element, const FacetClassification& cls);

}  // namespace hyperdg
