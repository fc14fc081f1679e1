#include "hyperdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>

#include "hyperdg/errors.hpp"
#include "hyperdg/orthopoly.hpp"
#include "hyperdg/quadrature.hpp"

namespace hyperdg {

namespace {

double signed_measure(int dim, const std::vector<Point>& v)
{
    switch (dim) {
    case 1: return v[1][0] - v[0][0];
    case 2: return 0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
    default: return dot(cross(v[1] - v[0], v[2] - v[0]), v[3] - v[0]) / 6.0;
    }
}

double facet_measure(int dim, const std::vector<Point>& f)
{
    switch (dim) {
    case 1: return 1.0;
    case 2: return norm(f[1] - f[0]);
    default: return 0.5 * norm(cross(f[1] - f[0], f[2] - f[0]));
    }
}

double diameter(const std::vector<Point>& v)
{
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, norm(v[i] - v[j]));
    return d;
}

Point outward_normal(int dim, const std::vector<Point>& f, const Point& opposite)
{
    Point n{0, 0, 0};
    switch (dim) {
    case 1: n = {1, 0, 0}; break;
    case 2: {
        const Point t = f[1] - f[0];
        n = {t[1], -t[0], 0};
        break;
    }
    default: n = cross(f[1] - f[0], f[2] - f[0]);
    }
    n = (1.0 / norm(n)) * n;
    if (dot(n, opposite - f[0]) > 0) n = -1.0 * n;
    return n;
}

// Does point x lie in the relative interior of the facet?
bool inside_facet(int dim, const std::vector<Point>& f, const Point& x, double scale)
{
    const double tol = 1e-10 * scale;
    if (dim == 2) {
        const Point t = f[1] - f[0];
        const double len2 = dot(t, t);
        const double s = dot(x - f[0], t) / len2;
        const Point off = x - (f[0] + s * t);
        return norm(off) <= tol && s > 1e-10 && s < 1 - 1e-10;
    }
    if (dim == 3) {
        const Point nrm = cross(f[1] - f[0], f[2] - f[0]);
        const double a2 = norm(nrm);
        if (std::abs(dot(x - f[0], nrm)) > tol * a2) return false;
        const double l0 = dot(cross(f[1] - x, f[2] - x), nrm) / (a2 * a2);
        const double l1 = dot(cross(f[2] - x, f[0] - x), nrm) / (a2 * a2);
        const double l2 = 1 - l0 - l1;
        return l0 > 1e-10 && l1 > 1e-10 && l2 > 1e-10;
    }
    return false;
}

std::string facet_name(const std::array<int, 3>& v, int dim)
{
    std::string s = "facet {";
    for (int i = 0; i < dim; ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + "}";
}

std::vector<Point> facet_samples(int dim, const std::vector<Point>& f)
{
    std::vector<Point> out;
    if (dim == 1) return {f[0]};
    if (dim == 2) {
        const auto g = gauss_legendre(4);
        for (const auto& t : g.points) out.push_back(0.5 * (1 - t[0]) * f[0] + 0.5 * (1 + t[0]) * f[1]);
        return out;
    }
    const auto r = simplex_rule(2, 4);
    for (const auto& xi : r.points) {
        const double l2 = (1 + xi[1]) / 2;
        const double l1 = (xi[0] + 1) / 2 - l2 / 2;
        out.push_back((1 - l1 - l2) * f[0] + l1 * f[1] + l2 * f[2]);
    }
    return out;
}

}  // namespace

Mesh Mesh::build(int dim, std::vector<Point> vertices, std::vector<Element> elements)
{
    if (dim < 1 || dim > 3) throw TopologyError("mesh dimension must be 1, 2 or 3");
    Mesh m;
    m.dim_ = dim;
    m.vertices_ = std::move(vertices);
    m.elements_ = std::move(elements);
    const int nv = static_cast<int>(m.vertices_.size());

    std::map<std::array<int, 3>, int> lookup;
    m.element_facets_.assign(m.elements_.size(), {-1, -1, -1, -1});
    for (std::size_t e = 0; e < m.elements_.size(); ++e) {
        auto& el = m.elements_[e];
        std::set<int> seen;
        for (int i = 0; i <= dim; ++i) {
            if (el[i] < 0 || el[i] >= nv)
                throw TopologyError("element " + std::to_string(e) + ": vertex id " + std::to_string(el[i]) +
                                    " out of range");
            if (!seen.insert(el[i]).second)
                throw TopologyError("element " + std::to_string(e) + ": repeated vertex id " + std::to_string(el[i]));
        }
        for (int i = dim + 1; i < 4; ++i) el[i] = -1;
        std::vector<Point> pts;
        for (int i = 0; i <= dim; ++i) pts.push_back(m.vertices_[el[i]]);
        const double meas = signed_measure(dim, pts);
        const double d = diameter(pts);
        if (std::abs(meas) <= 1e-14 * std::pow(d, dim))
            throw TopologyError("element " + std::to_string(e) + " is degenerate (zero measure)");
        if (meas < 0) std::swap(el[0], el[1]);

        for (int local = 0; local <= dim; ++local) {
            std::array<int, 3> key{-1, -1, -1};
            int k = 0;
            for (int i = 0; i <= dim; ++i)
                if (i != local) key[k++] = el[i];
            std::sort(key.begin(), key.begin() + dim);
            auto [it, inserted] = lookup.emplace(key, static_cast<int>(m.facets_.size()));
            if (inserted) {
                Facet f;
                f.vertices = key;
                f.owner = static_cast<int>(e);
                f.owner_local = local;
                m.facets_.push_back(f);
            } else {
                Facet& f = m.facets_[it->second];
                if (f.neighbor >= 0) throw TopologyError(facet_name(key, dim) + " is shared by more than two elements");
                f.neighbor = static_cast<int>(e);
                f.neighbor_local = local;
            }
            m.element_facets_[e][local] = it->second;
        }
    }

    // Hanging vertices: a vertex inside a boundary facet means a non-matching interface.
    if (dim >= 2) {
        double extent = 0;
        for (const auto& v : m.vertices_) extent = std::max({extent, std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
        for (const auto& f : m.facets_) {
            if (!f.is_boundary()) continue;
            std::vector<Point> fp;
            for (int i = 0; i < dim; ++i) fp.push_back(m.vertices_[f.vertices[i]]);
            for (int v = 0; v < nv; ++v) {
                if (std::find(f.vertices.begin(), f.vertices.begin() + dim, v) != f.vertices.begin() + dim) continue;
                if (inside_facet(dim, fp, m.vertices_[v], std::max(extent, 1.0)))
                    throw TopologyError(facet_name(f.vertices, dim) + " is non-conforming: vertex " +
                                        std::to_string(v) + " lies inside it");
            }
        }
    }

    for (std::size_t e = 0; e < m.elements_.size(); ++e) {
        std::vector<Point> pts;
        for (int i = 0; i <= dim; ++i) pts.push_back(m.vertices_[m.elements_[e][i]]);
        const double d = diameter(pts);
        double surface = 0;
        for (int local = 0; local <= dim; ++local) surface += facet_measure(dim, m.facet_points(static_cast<int>(e), local));
        const double inradius = dim * std::abs(signed_measure(dim, pts)) / surface;
        m.h_ = std::max(m.h_, d);
        m.sigma_ = std::max(m.sigma_, d / inradius);
    }
    return m;
}

std::vector<Point> Mesh::facet_points(int e, int local) const
{
    std::vector<Point> out;
    for (int i = 0; i <= dim_; ++i)
        if (i != local) out.push_back(vertices_[elements_[e][i]]);
    return out;
}

Point Mesh::barycenter(int e) const
{
    Point c{0, 0, 0};
    for (int i = 0; i <= dim_; ++i) c = c + vertices_[elements_[e][i]];
    return (1.0 / (dim_ + 1)) * c;
}

double Mesh::measure(int e) const
{
    std::vector<Point> pts;
    for (int i = 0; i <= dim_; ++i) pts.push_back(vertices_[elements_[e][i]]);
    return std::abs(signed_measure(dim_, pts));
}

Mesh load_mesh(std::istream& in)
{
    std::string line;
    int lineno = 0;
    // Next non-empty, non-comment line.
    auto next = [&](const char* what) -> std::istringstream {
        while (std::getline(in, line)) {
            ++lineno;
            const auto pos = line.find_first_not_of(" \t\r");
            if (pos == std::string::npos || line[pos] == '#') continue;
            return std::istringstream(line);
        }
        throw ParseError(std::string("unexpected end of file, expected ") + what, lineno + 1);
    };
    auto expect_end = [&](std::istringstream& ss) {
        std::string extra;
        if (ss >> extra) throw ParseError("unexpected token '" + extra + "'", lineno);
    };

    int dim = 0;
    {
        auto ss = next("header");
        std::string magic;
        if (!(ss >> magic) || magic != "simplexmesh") throw ParseError("expected 'simplexmesh <dim>'", lineno);
        if (!(ss >> dim) || dim < 1 || dim > 3) throw ParseError("dimension must be 1, 2 or 3", lineno);
        expect_end(ss);
    }
    long nv = 0, ne = 0;
    {
        auto ss = next("counts");
        if (!(ss >> nv >> ne) || nv < 0 || ne < 0) throw ParseError("expected '<n_vertices> <n_elements>'", lineno);
        expect_end(ss);
    }
    std::vector<Point> vertices(nv, Point{0, 0, 0});
    for (long i = 0; i < nv; ++i) {
        auto ss = next("vertex");
        for (int c = 0; c < dim; ++c)
            if (!(ss >> vertices[i][c])) throw ParseError("expected " + std::to_string(dim) + " coordinates", lineno);
        expect_end(ss);
    }
    std::vector<Mesh::Element> elements(ne, Mesh::Element{-1, -1, -1, -1});
    for (long e = 0; e < ne; ++e) {
        auto ss = next("element");
        for (int c = 0; c <= dim; ++c)
            if (!(ss >> elements[e][c]))
                throw ParseError("expected " + std::to_string(dim + 1) + " vertex indices", lineno);
        expect_end(ss);
    }
    return Mesh::build(dim, std::move(vertices), std::move(elements));
}

void save_mesh(std::ostream& out, const Mesh& mesh)
{
    const int dim = mesh.dim();
    out << "simplexmesh " << dim << "\n" << mesh.vertices().size() << " " << mesh.n_elements() << "\n";
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices()) {
        for (int c = 0; c < dim; ++c) out << (c ? " " : "") << v[c];
        out << "\n";
    }
    for (const auto& el : mesh.elements()) {
        for (int c = 0; c <= dim; ++c) out << (c ? " " : "") << el[c];
        out << "\n";
    }
}

Mesh gen_structured(int nx, int ny, Diagonal diagonal)
{
    if (nx < 1 || ny < 1) throw std::invalid_argument("gen_structured: nx, ny must be >= 1");
    std::vector<Point> vertices;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) vertices.push_back({-1.0 + 2.0 * i / nx, -1.0 + 2.0 * j / ny, 0});
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Mesh::Element> elements;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if (diagonal == Diagonal::against_flow) {
                elements.push_back({a, b, c, -1});
                elements.push_back({a, c, d, -1});
            } else {
                elements.push_back({a, b, d, -1});
                elements.push_back({b, c, d, -1});
            }
        }
    return Mesh::build(2, std::move(vertices), std::move(elements));
}

int FacetClassification::outflow_count(int e) const
{
    return static_cast<int>(std::count_if(facets[e].begin(), facets[e].end(),
                                          [](const FacetFlux& f) { return f.cls == FacetClass::outflow; }));
}

int FacetClassification::unique_outflow(int e) const
{
    if (outflow_count(e) != 1) return -1;
    for (std::size_t k = 0; k < facets[e].size(); ++k)
        if (facets[e][k].cls == FacetClass::outflow) return static_cast<int>(k);
    return -1;
}

FacetClassification classify_facets(const Mesh& mesh, const ConvectionField& beta)
{
    const int dim = mesh.dim();
    FacetClassification out;
    out.facets.resize(mesh.n_elements());
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const int ei = static_cast<int>(e);
        for (int local = 0; local <= dim; ++local) {
            FacetFlux ff;
            const auto fp = mesh.facet_points(ei, local);
            ff.normal = outward_normal(dim, fp, mesh.vertices()[mesh.elements()[e][local]]);
            ff.points = facet_samples(dim, fp);
            bool pos = false, neg = false;
            for (const auto& x : ff.points) {
                const Point b = beta(x);
                const double v = dot(ff.normal, b);
                ff.flux.push_back(v);
                const double tol = characteristic_tolerance * norm(b);
                if (v > tol) pos = true;
                if (v < -tol) neg = true;
            }
            ff.cls = pos && neg ? FacetClass::mixed
                   : pos        ? FacetClass::outflow
                   : neg        ? FacetClass::inflow
                                : FacetClass::characteristic;
            out.facets[e].push_back(std::move(ff));
        }
    }
    return out;
}

AdmissibilityReport check_admissible(const Mesh& mesh, const ConvectionField& beta)
{
    AdmissibilityReport rep;
    if (!beta.constant) {
        rep.applicable = false;
        rep.verdict = false;
        return rep;
    }
    const auto cls = classify_facets(mesh, beta);
    const std::size_t n = mesh.n_elements();
    rep.outflow_facet_count.resize(n);
    rep.a1_ok.resize(n);
    bool all_ok = true;
    for (std::size_t e = 0; e < n; ++e) {
        rep.outflow_facet_count[e] = cls.outflow_count(static_cast<int>(e));
        rep.a1_ok[e] = rep.outflow_facet_count[e] == 1;
        all_ok = all_ok && rep.a1_ok[e];
    }

    // Upwind DAG: edge upwind -> downwind across every interior inflow facet.
    std::vector<std::vector<int>> downstream(n);
    std::vector<int> indegree(n, 0);
    for (std::size_t fid = 0; fid < mesh.facets().size(); ++fid) {
        const Facet& f = mesh.facets()[fid];
        if (f.is_boundary()) continue;
        for (int side = 0; side < 2; ++side) {
            const int e = side == 0 ? f.owner : f.neighbor;
            const int local = side == 0 ? f.owner_local : f.neighbor_local;
            const int other = side == 0 ? f.neighbor : f.owner;
            const int other_local = side == 0 ? f.neighbor_local : f.owner_local;
            if (cls.at(e, local).cls != FacetClass::inflow) continue;
            // Conforming meshes: A2 holds iff the shared facet is the neighbour's only outflow facet.
            const bool ok = cls.at(other, other_local).cls == FacetClass::outflow && rep.a1_ok[other];
            rep.a2.push_back({static_cast<int>(fid), e, other, ok});
            all_ok = all_ok && ok;
            downstream[other].push_back(e);
            ++indegree[e];
        }
    }
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (std::size_t e = 0; e < n; ++e)
        if (indegree[e] == 0) ready.push(static_cast<int>(e));
    std::vector<int> order;
    auto deg = indegree;
    while (!ready.empty()) {
        const int e = ready.top();
        ready.pop();
        order.push_back(e);
        for (int d : downstream[e])
            if (--deg[d] == 0) ready.push(d);
    }
    if (order.size() == n) {
        rep.upwind_order = std::move(order);
    } else {
        // Every unsorted element has an unsorted upwind predecessor; walk back until a repeat.
        std::vector<std::vector<int>> upstream(n);
        for (std::size_t e = 0; e < n; ++e)
            for (int d : downstream[e]) upstream[d].push_back(static_cast<int>(e));
        int cur = -1;
        for (std::size_t e = 0; e < n; ++e)
            if (deg[e] > 0) {
                cur = static_cast<int>(e);
                break;
            }
        std::vector<int> pos(n, -1), path;
        while (pos[cur] < 0) {
            pos[cur] = static_cast<int>(path.size());
            path.push_back(cur);
            for (int u : upstream[cur])
                if (deg[u] > 0) {
                    cur = u;
                    break;
                }
        }
        rep.cycle.assign(path.begin() + pos[cur], path.end());
        std::reverse(rep.cycle.begin(), rep.cycle.end());
        all_ok = false;
    }
    rep.verdict = all_ok;
    return rep;
}

namespace {

double reference_facet_measure(int dim, int k)
{
    const auto ref = ReferenceSimplex::of(dim);
    std::vector<Point> f;
    for (int v : ref.facet_vertices(k)) f.push_back(ref.vertices[v]);
    return facet_measure(dim, f);
}

ElementMap make_map(const Mesh& mesh, int element, const std::array<int, 4>& local_order)
{
    const int dim = mesh.dim();
    const auto ref = ReferenceSimplex::of(dim);
    ElementMap m;
    m.dim = dim;
    Eigen::Matrix3d P = Eigen::Matrix3d::Identity(), R = Eigen::Matrix3d::Identity();
    std::vector<Point> phys;
    for (int k = 0; k <= dim; ++k) {
        m.vertex_ids[k] = mesh.elements()[element][local_order[k]];
        m.local_facet[k] = local_order[k];
        phys.push_back(mesh.vertices()[m.vertex_ids[k]]);
    }
    for (int k = 1; k <= dim; ++k)
        for (int c = 0; c < dim; ++c) {
            P(c, k - 1) = phys[k][c] - phys[0][c];
            R(c, k - 1) = ref.vertices[k][c] - ref.vertices[0][c];
        }
    m.A = P * R.inverse();
    m.A_inv = m.A.inverse();
    m.det = m.A.determinant();
    const Eigen::Vector3d r0(ref.vertices[0][0], ref.vertices[0][1], ref.vertices[0][2]);
    const Eigen::Vector3d o = Eigen::Vector3d(phys[0][0], phys[0][1], phys[0][2]) - m.A * r0;
    m.origin = {o[0], o[1], o[2]};
    for (int k = 0; k <= dim; ++k) {
        std::vector<Point> f;
        for (int i = 0; i <= dim; ++i)
            if (i != k) f.push_back(phys[i]);
        m.facet_scale[k] = facet_measure(dim, f) / reference_facet_measure(dim, k);
    }
    return m;
}

}  // namespace

Point ElementMap::to_physical(const Point& xi) const
{
    const Eigen::Vector3d x = A * Eigen::Vector3d(xi[0], xi[1], xi[2]);
    Point out{x[0] + origin[0], x[1] + origin[1], x[2] + origin[2]};
    for (int c = dim; c < 3; ++c) out[c] = 0;
    return out;
}

Point ElementMap::to_reference(const Point& x) const
{
    const Eigen::Vector3d xi = A_inv * Eigen::Vector3d(x[0] - origin[0], x[1] - origin[1], x[2] - origin[2]);
    Point out{xi[0], xi[1], xi[2]};
    for (int c = dim; c < 3; ++c) out[c] = 0;
    return out;
}

Point ElementMap::pull_back(const Point& v) const
{
    const Eigen::Vector3d r = A_inv * Eigen::Vector3d(v[0], v[1], v[2]);
    Point out{r[0], r[1], r[2]};
    for (int c = dim; c < 3; ++c) out[c] = 0;
    return out;
}

ElementMap ElementMap::identity(int dim)
{
    ElementMap m;
    m.dim = dim;
    for (int k = 0; k <= dim; ++k) m.vertex_ids[k] = k;
    return m;
}

ElementMap affine_map(const Mesh& mesh, int element) { return make_map(mesh, element, {0, 1, 2, 3}); }

ElementMap affine_map(const Mesh& mesh, int element, const FacetClassification& cls)
{
    const int out = cls.unique_outflow(element);
    if (out < 0)
        throw TopologyError("element " + std::to_string(element) + " has " +
                            std::to_string(cls.outflow_count(element)) + " outflow facets; A1 requires exactly one");
    std::array<int, 4> order{-1, -1, -1, -1};
    int k = 0;
    for (int i = 0; i <= mesh.dim(); ++i)
        if (i != out) order[k++] = i;
    order[k] = out;
    return make_map(mesh, element, order);
}

}  // namespace hyperdg
