#include "cshape/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "cshape/errors.hpp"

namespace cshape {

namespace {

double signed_volume(int dim, const Eigen::MatrixXd& verts, const Eigen::VectorXi& cell) {
    if (dim == 2) {
        const Eigen::Vector2d a = verts.row(cell[0]), b = verts.row(cell[1]), c = verts.row(cell[2]);
        return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    }
    const Eigen::Vector3d a = verts.row(cell[0]), b = verts.row(cell[1]), c = verts.row(cell[2]),
                          d = verts.row(cell[3]);
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

std::vector<int> sorted_facet(const Eigen::VectorXi& cell, int skip) {
    std::vector<int> f;
    for (int k = 0; k < cell.size(); ++k)
        if (k != skip) f.push_back(cell[k]);
    std::sort(f.begin(), f.end());
    return f;
}

}  // namespace

Eigen::VectorXd VectorFieldP1::at(int vertex) const {
    const int d = mesh->dim();
    return coeffs.segment(static_cast<Eigen::Index>(d) * vertex, d);
}

SimplicialMesh::SimplicialMesh(int dim, Eigen::MatrixXd vertices, Eigen::MatrixXi cells)
    : dim_(dim), vertices_(std::move(vertices)), cells_(std::move(cells)) {
    if (dim_ != 2 && dim_ != 3) fail(ErrorKind::invalid_argument, "mesh dimension must be 2 or 3");
    if (vertices_.cols() != dim_)
        fail(ErrorKind::invalid_argument, "vertex coordinate count does not match dimension");
    if (cells_.cols() != dim_ + 1)
        fail(ErrorKind::invalid_argument, "cells must have dim+1 vertex indices");
    const int nv = num_vertices();
    const int nc = num_cells();
    if (nv < dim_ + 1 || nc < 1) fail(ErrorKind::invalid_argument, "mesh is empty");

    std::vector<char> used(nv, 0);
    for (int c = 0; c < nc; ++c) {
        for (int k = 0; k <= dim_; ++k) {
            const int v = cells_(c, k);
            if (v < 0 || v >= nv) {
                std::ostringstream os;
                os << "cell " << c << " references vertex " << v << " out of range";
                fail(ErrorKind::invalid_argument, os.str());
            }
            used[v] = 1;
        }
    }
    for (int v = 0; v < nv; ++v)
        if (!used[v]) {
            std::ostringstream os;
            os << "vertex " << v << " is not referenced by any cell";
            fail(ErrorKind::invalid_argument, os.str());
        }

    // Fix orientation, then reject degenerate cells.
    cell_volumes_.resize(nc);
    for (int c = 0; c < nc; ++c) {
        Eigen::VectorXi cell = cells_.row(c);
        double vol = signed_volume(dim_, vertices_, cell);
        if (vol < 0) {
            std::swap(cells_(c, dim_ - 1), cells_(c, dim_));
            vol = -vol;
        }
        if (!(vol > 0) || !std::isfinite(vol)) {
            std::ostringstream os;
            os << "cell " << c << " is degenerate (zero volume)";
            fail(ErrorKind::numeric, os.str());
        }
        cell_volumes_[c] = vol;
        total_volume_ += vol;
    }

    // Conformity: every facet appears in exactly 1 (boundary) or 2 cells.
    std::map<std::vector<int>, std::vector<std::pair<int, int>>> facet_map;  // facet -> (cell, skip)
    for (int c = 0; c < nc; ++c) {
        const Eigen::VectorXi cell = cells_.row(c);
        for (int k = 0; k <= dim_; ++k) facet_map[sorted_facet(cell, k)].push_back({c, k});
    }
    std::vector<std::pair<int, int>> boundary_owner;  // (cell, skip) per boundary facet
    for (const auto& [facet, owners] : facet_map) {
        if (owners.size() > 2) {
            std::ostringstream os;
            os << "non-conforming mesh: facet (";
            for (size_t i = 0; i < facet.size(); ++i) os << (i ? "," : "") << facet[i];
            os << ") is shared by " << owners.size() << " cells";
            fail(ErrorKind::invalid_argument, os.str());
        }
        if (owners.size() == 1) boundary_owner.push_back(owners[0]);
    }

    // Outward-oriented boundary facets with normals and measures.
    const int nf = static_cast<int>(boundary_owner.size());
    boundary_.facets.resize(nf, dim_);
    boundary_.facet_normals.resize(nf, dim_);
    boundary_.facet_measures.resize(nf);
    std::vector<char> on_boundary(nv, 0);
    for (int f = 0; f < nf; ++f) {
        const auto [c, skip] = boundary_owner[f];
        const Eigen::VectorXi cell = cells_.row(c);
        const int opposite = cell[skip];
        if (dim_ == 2) {
            // keep the cell's cyclic order so the domain lies to the left
            const int a = cell[(skip + 1) % 3], b = cell[(skip + 2) % 3];
            boundary_.facets(f, 0) = a;
            boundary_.facets(f, 1) = b;
            const Eigen::Vector2d t = vertices_.row(b) - vertices_.row(a);
            const double len = t.norm();
            boundary_.facet_measures[f] = len;
            boundary_.facet_normals.row(f) = Eigen::Vector2d(t.y() / len, -t.x() / len);
            on_boundary[a] = on_boundary[b] = 1;
        } else {
            std::array<int, 3> tri;
            int idx = 0;
            for (int k = 0; k <= dim_; ++k)
                if (k != skip) tri[idx++] = cell[k];
            const Eigen::Vector3d a = vertices_.row(tri[0]), b = vertices_.row(tri[1]),
                                  cc = vertices_.row(tri[2]), o = vertices_.row(opposite);
            Eigen::Vector3d n = (b - a).cross(cc - a);
            if (n.dot(o - a) > 0) {  // flip so the normal points away from the cell
                std::swap(tri[1], tri[2]);
                n = -n;
            }
            const double area2 = n.norm();
            boundary_.facets(f, 0) = tri[0];
            boundary_.facets(f, 1) = tri[1];
            boundary_.facets(f, 2) = tri[2];
            boundary_.facet_measures[f] = 0.5 * area2;
            boundary_.facet_normals.row(f) = n / area2;
            on_boundary[tri[0]] = on_boundary[tri[1]] = on_boundary[tri[2]] = 1;
        }
    }
    for (int v = 0; v < nv; ++v)
        if (on_boundary[v]) boundary_.boundary_vertices.push_back(v);

    if (dim_ == 2) {
        // Chain the directed boundary edges into a loop; each boundary
        // vertex must have exactly one outgoing edge.
        std::map<int, int> next;
        for (int f = 0; f < nf; ++f) {
            if (!next.emplace(boundary_.facets(f, 0), boundary_.facets(f, 1)).second)
                fail(ErrorKind::invalid_argument, "boundary is not a single closed loop");
        }
        const int start = boundary_.boundary_vertices.front();
        int v = start;
        do {
            boundary_.loop.push_back(v);
            auto it = next.find(v);
            if (it == next.end())
                fail(ErrorKind::invalid_argument, "boundary is not a single closed loop");
            v = it->second;
        } while (v != start && boundary_.loop.size() <= next.size());
        if (boundary_.loop.size() != next.size())
            fail(ErrorKind::invalid_argument,
                 "boundary is not a single closed loop (multiply connected domain?)");
        double area2 = 0;
        for (size_t i = 0; i < boundary_.loop.size(); ++i) {
            const Eigen::Vector2d a = vertices_.row(boundary_.loop[i]);
            const Eigen::Vector2d b =
                vertices_.row(boundary_.loop[(i + 1) % boundary_.loop.size()]);
            area2 += a.x() * b.y() - a.y() * b.x();
        }
        if (area2 <= 0)
            fail(ErrorKind::numeric, "boundary loop is not counterclockwise");
    }

    // Hat-function gradients per cell: grads.row(i) = grad of the hat of
    // local vertex i. With J = [x_1-x_0 ... x_d-x_0], rows 1..d are J^{-1}.
    hat_gradients_.resize(nc);
    for (int c = 0; c < nc; ++c) {
        const Eigen::VectorXi cell = cells_.row(c);
        Eigen::MatrixXd J(dim_, dim_);
        for (int k = 1; k <= dim_; ++k)
            J.col(k - 1) = (vertices_.row(cell[k]) - vertices_.row(cell[0])).transpose();
        const Eigen::MatrixXd Jinv = J.inverse();
        Eigen::MatrixXd grads(dim_ + 1, dim_);
        for (int k = 1; k <= dim_; ++k) grads.row(k) = Jinv.row(k - 1);
        grads.row(0) = -grads.bottomRows(dim_).colwise().sum();
        hat_gradients_[c] = std::move(grads);
    }

    // Domain diameter over boundary vertices (hull diameter of the domain).
    const auto& bverts = boundary_.boundary_vertices;
    for (size_t i = 0; i < bverts.size(); ++i)
        for (size_t j = i + 1; j < bverts.size(); ++j)
            diameter_ = std::max(
                diameter_, (vertices_.row(bverts[i]) - vertices_.row(bverts[j])).norm());
}

const BoundaryTopology& extract_boundary(const SimplicialMesh& mesh) { return mesh.boundary(); }

// ---------------------------------------------------------------------------
// Text format

MeshPtr load_mesh(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    auto next_data_line = [&](std::vector<std::string>& tokens) -> bool {
        while (std::getline(in, line)) {
            lineno++;
            std::istringstream ls(line);
            tokens.clear();
            std::string tok;
            while (ls >> tok) {
                if (tok[0] == '#') break;
                tokens.push_back(tok);
            }
            if (!tokens.empty()) return true;
        }
        return false;
    };
    auto parse_err = [&](int column, const std::string& msg) {
        std::ostringstream os;
        os << "mesh parse error at line " << lineno << ", column " << column << ": " << msg;
        fail(ErrorKind::parse, os.str());
    };

    std::vector<std::string> tokens;
    if (!next_data_line(tokens)) fail(ErrorKind::parse, "mesh parse error: empty input");
    if (tokens.size() != 3) parse_err(1, "expected header 'dim nv nc'");
    int dim = 0, nv = 0, nc = 0;
    try {
        dim = std::stoi(tokens[0]);
        nv = std::stoi(tokens[1]);
        nc = std::stoi(tokens[2]);
    } catch (const std::exception&) {
        parse_err(1, "expected header 'dim nv nc'");
    }
    if (dim != 2 && dim != 3) parse_err(1, "dimension must be 2 or 3");
    if (nv <= 0 || nc <= 0) parse_err(1, "vertex and cell counts must be positive");

    Eigen::MatrixXd vertices(nv, dim);
    for (int i = 0; i < nv; ++i) {
        if (!next_data_line(tokens)) parse_err(1, "unexpected end of input in vertex block");
        if (static_cast<int>(tokens.size()) != dim) parse_err(1, "expected " + std::to_string(dim) + " coordinates");
        for (int k = 0; k < dim; ++k) {
            char* end = nullptr;
            vertices(i, k) = std::strtod(tokens[k].c_str(), &end);
            if (end == tokens[k].c_str() || *end != '\0') parse_err(k + 1, "invalid coordinate '" + tokens[k] + "'");
        }
    }
    Eigen::MatrixXi cells(nc, dim + 1);
    for (int i = 0; i < nc; ++i) {
        if (!next_data_line(tokens)) parse_err(1, "unexpected end of input in cell block");
        if (static_cast<int>(tokens.size()) != dim + 1)
            parse_err(1, "expected " + std::to_string(dim + 1) + " vertex indices");
        for (int k = 0; k <= dim; ++k) {
            try {
                size_t used = 0;
                cells(i, k) = std::stoi(tokens[k], &used);
                if (used != tokens[k].size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                parse_err(k + 1, "invalid vertex index '" + tokens[k] + "'");
            }
        }
    }
    return std::make_shared<SimplicialMesh>(dim, std::move(vertices), std::move(cells));
}

MeshPtr load_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open mesh file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_mesh(ss.str());
}

std::string write_mesh_text(const SimplicialMesh& mesh) {
    std::ostringstream os;
    os << mesh.dim() << " " << mesh.num_vertices() << " " << mesh.num_cells() << "\n";
    char buf[64];
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        for (int k = 0; k < mesh.dim(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", mesh.vertices()(i, k));
            os << (k ? " " : "") << buf;
        }
        os << "\n";
    }
    for (int c = 0; c < mesh.num_cells(); ++c) {
        for (int k = 0; k <= mesh.dim(); ++k) os << (k ? " " : "") << mesh.cells()(c, k);
        os << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Primitives and refinement

namespace {

MeshPtr project_boundary_to_circle(const SimplicialMesh& mesh) {
    Eigen::MatrixXd verts = mesh.vertices();
    for (int v : mesh.boundary().boundary_vertices) verts.row(v) /= verts.row(v).norm();
    return std::make_shared<SimplicialMesh>(mesh.dim(), std::move(verts), mesh.cells());
}

MeshPtr disk_level0() {
    // hexagon fan inscribed in the unit circle
    Eigen::MatrixXd verts(7, 2);
    verts.row(0) << 0, 0;
    for (int i = 0; i < 6; ++i) {
        const double a = M_PI / 3.0 * i;
        verts.row(i + 1) << std::cos(a), std::sin(a);
    }
    Eigen::MatrixXi cells(6, 3);
    for (int i = 0; i < 6; ++i) cells.row(i) << 0, i + 1, (i + 1) % 6 + 1;
    return std::make_shared<SimplicialMesh>(2, std::move(verts), std::move(cells));
}

MeshPtr square_level0() {
    Eigen::MatrixXd verts(4, 2);
    verts << 0, 0, 1, 0, 1, 1, 0, 1;
    Eigen::MatrixXi cells(2, 3);
    cells << 0, 1, 2, 0, 2, 3;
    return std::make_shared<SimplicialMesh>(2, std::move(verts), std::move(cells));
}

MeshPtr cube_level0() {
    // Kuhn decomposition of [-1/2,1/2]^3 into 6 tetrahedra sharing the
    // main diagonal; refines conformly under Bey's rule.
    Eigen::MatrixXd verts(8, 3);
    for (int i = 0; i < 8; ++i)
        verts.row(i) << (i & 1) - 0.5, ((i >> 1) & 1) - 0.5, ((i >> 2) & 1) - 0.5;
    const int paths[6][2] = {{1, 3}, {1, 5}, {2, 3}, {2, 6}, {4, 5}, {4, 6}};
    Eigen::MatrixXi cells(6, 4);
    for (int t = 0; t < 6; ++t) cells.row(t) << 0, paths[t][0], paths[t][1], 7;
    return std::make_shared<SimplicialMesh>(3, std::move(verts), std::move(cells));
}

}  // namespace

MeshPtr uniform_refine(const SimplicialMesh& mesh) {
    const int dim = mesh.dim();
    const int nv = mesh.num_vertices();
    const Eigen::MatrixXd& verts = mesh.vertices();

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        return it == midpoint.end() ? (midpoint[key] = nv + static_cast<int>(midpoint.size()))
                                    : it->second;
    };

    std::vector<Eigen::VectorXi> new_cells;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh.cells().row(c);
        if (dim == 2) {
            const int v0 = cell[0], v1 = cell[1], v2 = cell[2];
            const int m01 = mid(v0, v1), m12 = mid(v1, v2), m02 = mid(v0, v2);
            const int children[4][3] = {
                {v0, m01, m02}, {m01, v1, m12}, {m02, m12, v2}, {m01, m12, m02}};
            for (auto& ch : children)
                new_cells.push_back(Eigen::Vector3i(ch[0], ch[1], ch[2]));
        } else {
            // Bey's red refinement
            const int v0 = cell[0], v1 = cell[1], v2 = cell[2], v3 = cell[3];
            const int m01 = mid(v0, v1), m02 = mid(v0, v2), m03 = mid(v0, v3);
            const int m12 = mid(v1, v2), m13 = mid(v1, v3), m23 = mid(v2, v3);
            const int children[8][4] = {{v0, m01, m02, m03},  {m01, v1, m12, m13},
                                        {m02, m12, v2, m23},  {m03, m13, m23, v3},
                                        {m01, m02, m03, m13}, {m01, m02, m12, m13},
                                        {m02, m03, m13, m23}, {m02, m12, m13, m23}};
            for (auto& ch : children)
                new_cells.push_back(Eigen::Vector4i(ch[0], ch[1], ch[2], ch[3]));
        }
    }

    Eigen::MatrixXd new_verts(nv + static_cast<int>(midpoint.size()), dim);
    new_verts.topRows(nv) = verts;
    for (const auto& [edge, idx] : midpoint)
        new_verts.row(idx) = 0.5 * (verts.row(edge.first) + verts.row(edge.second));

    Eigen::MatrixXi cells(static_cast<int>(new_cells.size()), dim + 1);
    for (size_t i = 0; i < new_cells.size(); ++i) cells.row(static_cast<int>(i)) = new_cells[i];
    return std::make_shared<SimplicialMesh>(dim, std::move(new_verts), std::move(cells));
}

MeshPtr generate_primitive(Primitive kind, int refinement_level) {
    if (refinement_level < 0 || refinement_level > 8)
        fail(ErrorKind::invalid_argument, "refinement_level must be in [0, 8]");
    MeshPtr mesh;
    switch (kind) {
        case Primitive::unit_disk: mesh = disk_level0(); break;
        case Primitive::unit_square: mesh = square_level0(); break;
        case Primitive::unit_cube_centered: mesh = cube_level0(); break;
        default: fail(ErrorKind::invalid_argument, "unknown primitive kind");
    }
    for (int l = 0; l < refinement_level; ++l) {
        mesh = uniform_refine(*mesh);
        if (kind == Primitive::unit_disk) mesh = project_boundary_to_circle(*mesh);
    }
    return mesh;
}

Primitive primitive_from_name(const std::string& name) {
    if (name == "unit_disk") return Primitive::unit_disk;
    if (name == "unit_square") return Primitive::unit_square;
    if (name == "unit_cube_centered") return Primitive::unit_cube_centered;
    fail(ErrorKind::invalid_argument, "unknown primitive kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Deformation

namespace {

Eigen::MatrixXd field_jacobian(const SimplicialMesh& mesh, const VectorFieldP1& V, int c) {
    const int d = mesh.dim();
    const Eigen::VectorXi cell = mesh.cells().row(c);
    const Eigen::MatrixXd& grads = mesh.hat_gradients(c);
    Eigen::MatrixXd DV = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k <= d; ++k) DV += V.at(cell[k]) * grads.row(k);
    return DV;
}

double spectral_norm(const Eigen::MatrixXd& B) {
    if (B.rows() == 2) {
        const double f = B.squaredNorm();
        const double det = B.determinant();
        const double disc = std::max(0.0, f * f - 4.0 * det * det);
        return std::sqrt(0.5 * (f + std::sqrt(disc)));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.computeDirect(Eigen::Matrix3d(B.transpose() * B));
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

}  // namespace

QualityReport deformation_quality(const SimplicialMesh& mesh, const VectorFieldP1& V, double t) {
    if (V.mesh.get() != &mesh)
        fail(ErrorKind::invalid_argument, "deformation field does not live on this mesh");
    const int d = mesh.dim();
    QualityReport rep;
    rep.min_det = std::numeric_limits<double>::infinity();
    rep.max_det = -std::numeric_limits<double>::infinity();
    rep.max_norm = 0;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::MatrixXd tDV = t * field_jacobian(mesh, V, c);
        const double det = (I + tDV).determinant();
        rep.min_det = std::min(rep.min_det, det);
        rep.max_det = std::max(rep.max_det, det);
        rep.max_norm = std::max(rep.max_norm, spectral_norm(tDV));
    }
    rep.pass = rep.min_det >= 0.5 && rep.max_det <= 2.0 && rep.max_norm <= 0.3;
    return rep;
}

MeshPtr apply_deformation(const SimplicialMesh& mesh, const VectorFieldP1& V, double t) {
    const QualityReport rep = deformation_quality(mesh, V, t);
    if (!rep.pass) {
        std::ostringstream os;
        os << "deformation rejected by quality check (min_det=" << rep.min_det
           << ", max_det=" << rep.max_det << ", max_norm=" << rep.max_norm << ")";
        fail(ErrorKind::numeric, os.str());
    }
    const int d = mesh.dim();
    Eigen::MatrixXd verts = mesh.vertices();
    for (int v = 0; v < mesh.num_vertices(); ++v)
        verts.row(v) += t * V.coeffs.segment(static_cast<Eigen::Index>(d) * v, d).transpose();
    return std::make_shared<SimplicialMesh>(d, std::move(verts), mesh.cells());
}

}  // namespace cshape
