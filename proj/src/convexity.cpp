#include "cshape/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cshape/errors.hpp"

namespace cshape {

namespace {

struct Edge3d {
    int i, j;  // edge endpoints
    int l, r;  // opposite vertices of the faces containing (i,j) resp. (j,i)
};

// Outer edges with the left/right opposite vertices taken from the two
// outward-oriented boundary triangles. The face listing the edge as (i,j)
// in cyclic order contributes l, the one listing (j,i) contributes r;
// on a convex polyhedron this makes the triple product
// (x_l - x_i) . ((x_j - x_i) x (x_r - x_i)) nonnegative.
std::vector<Edge3d> outer_edges(const SimplicialMesh& mesh) {
    std::map<std::pair<int, int>, int> opposite;  // directed edge -> third vertex
    const auto& facets = mesh.boundary().facets;
    for (int f = 0; f < facets.rows(); ++f) {
        for (int k = 0; k < 3; ++k) {
            const int a = facets(f, k), b = facets(f, (k + 1) % 3), c = facets(f, (k + 2) % 3);
            if (!opposite.emplace(std::make_pair(a, b), c).second)
                fail(ErrorKind::invalid_argument, "boundary surface is not consistently oriented");
        }
    }
    std::vector<Edge3d> edges;
    for (const auto& [dir, l] : opposite) {
        const auto [i, j] = dir;
        if (i > j) continue;  // one entry per undirected edge
        auto rev = opposite.find({j, i});
        if (rev == opposite.end())
            fail(ErrorKind::invalid_argument, "boundary surface is not closed");
        edges.push_back({i, j, l, rev->second});
    }
    return edges;
}

ConstraintSystem build(const SimplicialMesh& mesh, bool with_jacobian) {
    const int d = mesh.dim();
    const int nv = mesh.num_vertices();
    ConstraintSystem sys;
    std::vector<Eigen::Triplet<double>> trip;

    if (d == 2) {
        const std::vector<int>& loop = mesh.boundary().loop;
        const int N = static_cast<int>(loop.size());
        if (N < 3) fail(ErrorKind::invalid_argument, "boundary loop is degenerate");
        sys.values.resize(N);
        sys.index_map.resize(N);
        const auto& X = mesh.vertices();
        for (int i = 0; i < N; ++i) {
            const int vp = loop[(i + N - 1) % N], v = loop[i], vn = loop[(i + 1) % N];
            const double ax = X(vp, 0) - X(v, 0), ay = X(vp, 1) - X(v, 1);
            const double bx = X(vn, 0) - X(v, 0), by = X(vn, 1) - X(v, 1);
            sys.values[i] = ax * by - ay * bx;
            sys.index_map[i] = {vp, v, vn};
            if (with_jacobian) {
                trip.emplace_back(i, 2 * vp + 0, by);
                trip.emplace_back(i, 2 * vp + 1, -bx);
                trip.emplace_back(i, 2 * vn + 0, -ay);
                trip.emplace_back(i, 2 * vn + 1, ax);
                trip.emplace_back(i, 2 * v + 0, ay - by);
                trip.emplace_back(i, 2 * v + 1, bx - ax);
            }
        }
    } else {
        const std::vector<Edge3d> edges = outer_edges(mesh);
        const int N = static_cast<int>(edges.size());
        sys.values.resize(N);
        sys.index_map.resize(N);
        const auto& X = mesh.vertices();
        for (int n = 0; n < N; ++n) {
            const Edge3d& e = edges[n];
            const Eigen::Vector3d xi = X.row(e.i), xj = X.row(e.j), xl = X.row(e.l),
                                  xr = X.row(e.r);
            const Eigen::Vector3d a = xl - xi, b = xj - xi, c = xr - xi;
            // stored negated so convexity reads C <= 0 in both dimensions
            sys.values[n] = -a.dot(b.cross(c));
            sys.index_map[n] = {e.i, e.j, e.l, e.r};
            if (with_jacobian) {
                const Eigen::Vector3d dl = -b.cross(c);      // dC/dx_l
                const Eigen::Vector3d dj = -c.cross(a);      // dC/dx_j
                const Eigen::Vector3d dr = -a.cross(b);      // dC/dx_r
                const Eigen::Vector3d di = -(dl + dj + dr);  // dC/dx_i
                for (int k = 0; k < 3; ++k) {
                    trip.emplace_back(n, 3 * e.l + k, dl[k]);
                    trip.emplace_back(n, 3 * e.j + k, dj[k]);
                    trip.emplace_back(n, 3 * e.r + k, dr[k]);
                    trip.emplace_back(n, 3 * e.i + k, di[k]);
                }
            }
        }
    }

    if (with_jacobian) {
        sys.jacobian.resize(sys.values.size(), static_cast<Eigen::Index>(d) * nv);
        sys.jacobian.setFromTriplets(trip.begin(), trip.end());
        sys.jacobian.makeCompressed();
    }
    return sys;
}

}  // namespace

ConstraintSystem constraint_values(const SimplicialMesh& mesh) { return build(mesh, false); }

ConstraintSystem constraint_jacobian(const SimplicialMesh& mesh) { return build(mesh, true); }

bool is_convex(const SimplicialMesh& mesh, double tol) {
    if (tol < 0) fail(ErrorKind::invalid_argument, "is_convex: tolerance must be nonnegative");
    return constraint_values(mesh).values.maxCoeff() <= tol;
}

namespace {

// Monotone chain; returns hull vertex positions in CCW order, collinear
// points dropped.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
    std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a == b; }),
              pts.end());
    const auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                          const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    const int n = static_cast<int>(pts.size());
    if (n < 3) fail(ErrorKind::numeric, "convexify: hull is degenerate");
    std::vector<Eigen::Vector2d> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) k--;
        hull[k++] = pts[i];
    }
    for (int i = n - 2, lower = k + 1; i >= 0; --i) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) k--;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

Eigen::Vector2d closest_point_on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                         const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double t = std::clamp(ab.dot(p - a) / ab.squaredNorm(), 0.0, 1.0);
    return a + t * ab;
}

}  // namespace

MeshPtr convexify(const SimplicialMesh& mesh) {
    if (mesh.dim() != 2)
        fail(ErrorKind::unsupported, "convexify: convex-hull repair is only available in 2D");
    if (is_convex(mesh, 0.0))
        return std::make_shared<SimplicialMesh>(mesh.dim(), mesh.vertices(), mesh.cells());

    std::vector<Eigen::Vector2d> bpts;
    for (int v : mesh.boundary().boundary_vertices) bpts.push_back(mesh.vertices().row(v));
    const std::vector<Eigen::Vector2d> hull = convex_hull(bpts);

    Eigen::MatrixXd verts = mesh.vertices();
    for (int v : mesh.boundary().boundary_vertices) {
        const Eigen::Vector2d p = verts.row(v);
        bool on_hull = false;
        for (const auto& h : hull)
            if (h == p) {
                on_hull = true;
                break;
            }
        if (on_hull) continue;
        double best = std::numeric_limits<double>::infinity();
        Eigen::Vector2d proj = p;
        for (size_t i = 0; i < hull.size(); ++i) {
            const Eigen::Vector2d q =
                closest_point_on_segment(p, hull[i], hull[(i + 1) % hull.size()]);
            const double dist = (q - p).squaredNorm();
            if (dist < best) {
                best = dist;
                proj = q;
            }
        }
        verts.row(v) = proj;
    }

    MeshPtr out;
    try {
        out = std::make_shared<SimplicialMesh>(mesh.dim(), std::move(verts), mesh.cells());
    } catch (const Error& e) {
        fail(ErrorKind::numeric,
             std::string("convexify: projected mesh is invalid (self-intersecting boundary?): ") +
                 e.what());
    }
    if (!is_convex(*out, 1e-12 * mesh.diameter() * mesh.diameter()))
        fail(ErrorKind::numeric, "convexify: hull projection did not produce a convex mesh");
    return out;
}

}  // namespace cshape
