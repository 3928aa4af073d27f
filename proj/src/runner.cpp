#include "cshape/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cshape/errors.hpp"
#include "cshape/exporters.hpp"

namespace cshape {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int hold_all_violations(const SimplicialMesh& mesh, const std::optional<HoldAllBox>& box) {
    if (!box) return 0;
    int count = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        for (int k = 0; k < mesh.dim(); ++k) {
            const double x = mesh.vertices()(v, k);
            if (x < box->min[k] || x > box->max[k]) {
                count++;
                break;
            }
        }
    }
    return count;
}

}  // namespace

RunOutcome run_config(const RunConfig& config) {
    namespace fs = std::filesystem;
    const fs::path outdir(config.output_dir);
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + config.output_dir + "'");

    auto level_path = [&](int level, const char* ext) {
        std::ostringstream os;
        os << "level_" << level << ext;
        return (outdir / os.str()).string();
    };

    RunOutcome outcome;
    try {
        const ProblemSpec problem = build_problem(config);
        MeshPtr mesh = generate_primitive(config.initial_primitive, config.initial_level);

        for (int level = 1; level <= config.cycles; ++level) {
            OptimizeResult opt = run_optimizer(mesh, problem, config.params);
            mesh = opt.mesh;

            if (config.write_vtk)
                export_mesh(*mesh, {{"u", &opt.state}}, ExportFormat::vtk_legacy,
                            level_path(level, ".vtk"));
            if (config.write_svg && config.dim == 2)
                export_mesh(*mesh, {{"u", &opt.state}}, ExportFormat::svg2d,
                            level_path(level, ".svg"));
            if (config.write_csv)
                atomic_write_file(level_path(level, ".csv"), render_trace_csv(opt.trace));

            LevelSummary sum;
            sum.level = level;
            sum.vertices = mesh->num_vertices();
            sum.objective = opt.objective;
            sum.iterations = opt.trace.iterations;
            sum.max_constraint = constraint_values(*mesh).values.maxCoeff();
            sum.stop = opt.trace.stop;
            sum.hold_all_violations = hold_all_violations(*mesh, config.hold_all);
            outcome.levels.push_back(sum);
            outcome.traces.push_back(std::move(opt.trace));

            if (opt.trace.stop == StopReason::qp_failure ||
                opt.trace.stop == StopReason::step_failure) {
                std::ostringstream os;
                os << "optimizer aborted on level " << level << " ("
                   << stop_reason_name(opt.trace.stop) << ")";
                fail(ErrorKind::numeric, os.str());
            }
            if (level < config.cycles) mesh = uniform_refine(*mesh);
        }
        outcome.final_mesh = mesh;

        std::ostringstream sum;
        sum << "level,vertices,objective,iterations,max_constraint,stop,hold_all_violations\n";
        for (const LevelSummary& s : outcome.levels)
            sum << s.level << "," << s.vertices << "," << fmt(s.objective) << "," << s.iterations
                << "," << fmt(s.max_constraint) << "," << stop_reason_name(s.stop) << ","
                << s.hold_all_violations << "\n";
        atomic_write_file((outdir / "summary.csv").string(), sum.str());
    } catch (const std::exception& e) {
        // keep partial artifacts, leave a marker describing the failure
        std::ofstream marker(outdir / "FAILED");
        marker << e.what() << "\n";
        throw;
    }
    return outcome;
}

}  // namespace cshape
