#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace cshape {

class SimplicialMesh;
using MeshPtr = std::shared_ptr<const SimplicialMesh>;

// Boundary connectivity of a simplicial mesh. Facets are oriented so the
// induced normal points out of the domain; in 2D the directed boundary
// edges chain into a single counterclockwise loop.
struct BoundaryTopology {
    Eigen::MatrixXi facets;             // nf x d, outward-oriented vertex indices
    std::vector<int> boundary_vertices; // ascending vertex ids
    std::vector<int> loop;              // 2D only: vertices in CCW cyclic order
    Eigen::MatrixXd facet_normals;      // nf x d, unit outward normals
    Eigen::VectorXd facet_measures;     // edge length / triangle area
};

// Result of the per-cell mesh-quality check for a deformation t*V:
// pass iff min_det >= 1/2, max_det <= 2 and max_norm <= 0.3.
struct QualityReport {
    double min_det = 1.0;
    double max_det = 1.0;
    double max_norm = 0.0;
    bool pass = true;
};

struct VectorFieldP1 {
    MeshPtr mesh;
    Eigen::VectorXd coeffs;  // d*nv, vertex-major: [v0_x v0_y (v0_z) v1_x ...]

    Eigen::VectorXd at(int vertex) const;
};

// Conforming simplicial mesh of a polygonal/polyhedral domain in R^d,
// d in {2,3}. Cells are stored positively oriented; instances are
// immutable after construction and safe to share across threads.
class SimplicialMesh {
public:
    // Validates conformity, index ranges and non-degeneracy; cells with
    // negative signed volume are reordered.
    SimplicialMesh(int dim, Eigen::MatrixXd vertices, Eigen::MatrixXi cells);

    int dim() const { return dim_; }
    int num_vertices() const { return static_cast<int>(vertices_.rows()); }
    int num_cells() const { return static_cast<int>(cells_.rows()); }

    const Eigen::MatrixXd& vertices() const { return vertices_; }
    const Eigen::MatrixXi& cells() const { return cells_; }
    const BoundaryTopology& boundary() const { return boundary_; }

    double cell_volume(int c) const { return cell_volumes_[c]; }
    // Gradients of the d+1 nodal hat functions on cell c, one per row.
    const Eigen::MatrixXd& hat_gradients(int c) const { return hat_gradients_[c]; }

    double volume() const { return total_volume_; }
    double diameter() const { return diameter_; }
    Eigen::VectorXd vertex(int i) const { return vertices_.row(i); }

private:
    int dim_;
    Eigen::MatrixXd vertices_;
    Eigen::MatrixXi cells_;
    BoundaryTopology boundary_;
    std::vector<double> cell_volumes_;
    std::vector<Eigen::MatrixXd> hat_gradients_;
    double total_volume_ = 0;
    double diameter_ = 0;
};

enum class Primitive { unit_disk, unit_square, unit_cube_centered };

// Mesh text format: "dim nv nc" header, nv coordinate lines, nc index
// lines (zero-based); '#' starts a comment line.
MeshPtr load_mesh(const std::string& text);
MeshPtr load_mesh_file(const std::string& path);
std::string write_mesh_text(const SimplicialMesh& mesh);

MeshPtr generate_primitive(Primitive kind, int refinement_level);
Primitive primitive_from_name(const std::string& name);

const BoundaryTopology& extract_boundary(const SimplicialMesh& mesh);

// Red refinement: each triangle into 4 congruent children, each
// tetrahedron into 8 (Bey's rule).
MeshPtr uniform_refine(const SimplicialMesh& mesh);

// Moves vertex i to x_i + t*V(x_i); requires the quality check to pass.
MeshPtr apply_deformation(const SimplicialMesh& mesh, const VectorFieldP1& V, double t);

QualityReport deformation_quality(const SimplicialMesh& mesh, const VectorFieldP1& V, double t);

}  // namespace cshape
