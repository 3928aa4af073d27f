#pragma once

#include "cshape/config.hpp"

namespace cshape {

struct LevelSummary {
    int level = 0;  // 1-based optimize-refine cycle
    int vertices = 0;
    double objective = 0;
    int iterations = 0;
    double max_constraint = 0;
    StopReason stop = StopReason::max_outer;
    int hold_all_violations = 0;  // vertices outside the configured box
};

struct RunOutcome {
    std::vector<LevelSummary> levels;
    MeshPtr final_mesh;
    std::vector<OptTrace> traces;
};

// Multi-level driver: optimize, write artifacts, refine, repeat. Artifacts
// per level: level_<k>.vtk / .svg / .csv plus a summary.csv at the end; a
// FAILED marker file is left next to partial artifacts on error.
RunOutcome run_config(const RunConfig& config);

}  // namespace cshape
