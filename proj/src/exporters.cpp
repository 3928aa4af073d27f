#include "cshape/exporters.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cshape/errors.hpp"

namespace cshape {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string render_vtk(const SimplicialMesh& mesh, const std::vector<NamedField>& fields) {
    const int d = mesh.dim();
    const int nv = mesh.num_vertices();
    const int nc = mesh.num_cells();
    std::ostringstream os;
    os << "# vtk DataFile Version 3.0\n";
    os << "convexshape mesh\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << nv << " double\n";
    for (int v = 0; v < nv; ++v) {
        os << fmt(mesh.vertices()(v, 0)) << " " << fmt(mesh.vertices()(v, 1)) << " "
           << (d == 3 ? fmt(mesh.vertices()(v, 2)) : "0") << "\n";
    }
    os << "CELLS " << nc << " " << nc * (d + 2) << "\n";
    for (int c = 0; c < nc; ++c) {
        os << (d + 1);
        for (int k = 0; k <= d; ++k) os << " " << mesh.cells()(c, k);
        os << "\n";
    }
    os << "CELL_TYPES " << nc << "\n";
    for (int c = 0; c < nc; ++c) os << (d == 2 ? 5 : 10) << "\n";
    if (!fields.empty()) {
        os << "POINT_DATA " << nv << "\n";
        for (const NamedField& f : fields) {
            if (!f.field || f.field->coeffs.size() != nv)
                fail(ErrorKind::invalid_argument, "vtk export: field size mismatch");
            os << "SCALARS " << f.name << " double 1\n";
            os << "LOOKUP_TABLE default\n";
            for (int v = 0; v < nv; ++v) os << fmt(f.field->coeffs[v]) << "\n";
        }
    }
    return os.str();
}

std::string render_svg(const SimplicialMesh& mesh, const std::vector<NamedField>& fields) {
    if (mesh.dim() != 2) fail(ErrorKind::invalid_argument, "svg export requires a 2D mesh");
    const auto& X = mesh.vertices();
    const double xmin = X.col(0).minCoeff(), xmax = X.col(0).maxCoeff();
    const double ymin = X.col(1).minCoeff(), ymax = X.col(1).maxCoeff();
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double scale = 720.0 / span;
    const double pad = 40.0;
    const double width = (xmax - xmin) * scale + 2 * pad;
    const double height = (ymax - ymin) * scale + 2 * pad;
    auto px = [&](double x) { return pad + (x - xmin) * scale; };
    auto py = [&](double y) { return pad + (ymax - y) * scale; };  // flip the y axis

    const ScalarFieldP1* u = fields.empty() ? nullptr : fields.front().field;
    double umin = 0, umax = 1;
    if (u && u->coeffs.size() > 0) {
        umin = u->coeffs.minCoeff();
        umax = u->coeffs.maxCoeff();
        if (umax - umin < 1e-300) umax = umin + 1;
    }
    // two-color ramp: low #2166ac, high #b2182b
    const int lo[3] = {0x21, 0x66, 0xac}, hi[3] = {0xb2, 0x18, 0x2b};
    auto color = [&](double val) {
        const double s = std::clamp((val - umin) / (umax - umin), 0.0, 1.0);
        char buf[8];
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                      static_cast<int>(std::lround(lo[0] + s * (hi[0] - lo[0]))),
                      static_cast<int>(std::lround(lo[1] + s * (hi[1] - lo[1]))),
                      static_cast<int>(std::lround(lo[2] + s * (hi[2] - lo[2]))));
        return std::string(buf);
    };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt6(width) << "\" height=\""
       << fmt6(height) << "\" viewBox=\"0 0 " << fmt6(width) << " " << fmt6(height) << "\">\n";
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh.cells().row(c);
        double mean = 0;
        if (u)
            mean = (u->coeffs[cell[0]] + u->coeffs[cell[1]] + u->coeffs[cell[2]]) / 3.0;
        os << "  <polygon points=\"";
        for (int k = 0; k < 3; ++k)
            os << (k ? " " : "") << fmt6(px(X(cell[k], 0))) << "," << fmt6(py(X(cell[k], 1)));
        os << "\" fill=\"" << (u ? color(mean) : std::string("#dddddd"))
           << "\" stroke=\"#ffffff\" stroke-width=\"0.4\"/>\n";
    }
    const std::vector<int>& loop = mesh.boundary().loop;
    os << "  <polygon points=\"";
    for (size_t i = 0; i < loop.size(); ++i)
        os << (i ? " " : "") << fmt6(px(X(loop[i], 0))) << "," << fmt6(py(X(loop[i], 1)));
    os << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
    os << "</svg>\n";
    return os.str();
}

void export_mesh(const SimplicialMesh& mesh, const std::vector<NamedField>& fields,
                 ExportFormat format, const std::string& path) {
    std::string content;
    switch (format) {
        case ExportFormat::vtk_legacy: content = render_vtk(mesh, fields); break;
        case ExportFormat::svg2d: content = render_svg(mesh, fields); break;
    }
    atomic_write_file(path, content);
}

std::string render_trace_csv(const OptTrace& trace) {
    std::ostringstream os;
    os << "iter,J,phi0,slope,t,k,maxC,gradnorm,M,qp_status\n";
    for (const IterationRecord& r : trace.rows) {
        os << r.iter << "," << fmt(r.objective) << "," << fmt(r.phi0) << "," << fmt(r.slope)
           << "," << fmt(r.step) << "," << r.backtracks << "," << fmt(r.max_constraint) << ","
           << fmt(std::sqrt(std::abs(r.grad_pair))) << "," << fmt(r.merit_m) << ","
           << qp_status_name(r.qp_status) << "\n";
    }
    return os.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot open '" + tmp + "' for writing");
        out << content;
        if (!out.good()) fail(ErrorKind::io, "write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        fail(ErrorKind::io, "cannot rename '" + tmp + "' to '" + path + "'");
}

}  // namespace cshape
