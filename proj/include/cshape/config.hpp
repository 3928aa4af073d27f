#pragma once

#include <optional>
#include <string>

#include "cshape/optimize.hpp"

namespace cshape {

enum class ProblemPreset { example1, example2, example3_convex, example3_unconstrained, custom };

struct HoldAllBox {
    Eigen::Vector3d min = Eigen::Vector3d::Zero();
    Eigen::Vector3d max = Eigen::Vector3d::Zero();
};

// Parsed and validated run configuration. Presets fill the problem data
// of the built-in experiments; every field can be overridden in the
// config file.
struct RunConfig {
    ProblemPreset preset = ProblemPreset::custom;
    int dim = 2;
    std::string objective_expr = "u";
    std::string rhs_expr;
    BoundaryCondition bc = BoundaryCondition::dirichlet_zero;
    Primitive initial_primitive = Primitive::unit_disk;
    int initial_level = 2;
    int cycles = 1;
    AlgorithmParams params;
    std::string output_dir = "out";
    bool write_vtk = true;
    bool write_svg = true;
    bool write_csv = true;
    std::optional<HoldAllBox> hold_all;  // report-only containment check
    unsigned long seed = 0;              // recorded; the pipeline is deterministic
};

RunConfig parse_config(const std::string& json_text);
RunConfig parse_config_file(const std::string& path);

// Builds the state problem (integrand, rhs, boundary condition) from the
// configured expressions.
ProblemSpec build_problem(const RunConfig& config);

// Right-hand side of the five-fold-symmetric experiment, generated with
// n = 5 attraction points on radius 6/5 and repulsion points on radius 1.
std::string fivefold_rhs_expression();

const char* preset_name(ProblemPreset p);

}  // namespace cshape
