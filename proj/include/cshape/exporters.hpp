#pragma once

#include <string>
#include <vector>

#include "cshape/fem.hpp"
#include "cshape/optimize.hpp"

namespace cshape {

struct NamedField {
    std::string name;
    const ScalarFieldP1* field;
};

enum class ExportFormat { vtk_legacy, svg2d };

// ASCII legacy VTK unstructured grid (cell type 5/10) with one POINT_DATA
// scalar block per field; byte-stable for identical inputs.
std::string render_vtk(const SimplicialMesh& mesh, const std::vector<NamedField>& fields);

// Filled triangles colored by the first field through a fixed two-color
// ramp plus the boundary polyline; 2D only.
std::string render_svg(const SimplicialMesh& mesh, const std::vector<NamedField>& fields);

void export_mesh(const SimplicialMesh& mesh, const std::vector<NamedField>& fields,
                 ExportFormat format, const std::string& path);

// Iteration trace with the fixed column set
// iter,J,phi0,slope,t,k,maxC,gradnorm,M,qp_status.
std::string render_trace_csv(const OptTrace& trace);

// Writes via a temporary file and rename so readers never observe a
// partially written artifact.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace cshape
