#include "convexshape.h"

#include <cstring>
#include <string>

#include "cshape/config.hpp"
#include "cshape/convexity.hpp"
#include "cshape/errors.hpp"
#include "cshape/exporters.hpp"
#include "cshape/expression.hpp"
#include "cshape/mesh.hpp"
#include "cshape/runner.hpp"

using namespace cshape;

struct csh_mesh {
    MeshPtr mesh;
};
struct csh_expression {
    Expression expr;
};
struct csh_config {
    RunConfig config;
};
struct csh_run_result {
    RunOutcome outcome;
};

namespace {

thread_local std::string g_last_error;

csh_status status_of(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return CSH_ERROR_INVALID_ARGUMENT;
        case ErrorKind::parse: return CSH_ERROR_PARSE;
        case ErrorKind::numeric: return CSH_ERROR_NUMERIC;
        case ErrorKind::io: return CSH_ERROR_IO;
        case ErrorKind::unsupported: return CSH_ERROR_UNSUPPORTED;
    }
    return CSH_ERROR_INVALID_ARGUMENT;
}

template <typename Fn>
csh_status guarded(Fn&& fn) {
    try {
        fn();
        return CSH_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CSH_ERROR_NUMERIC;
    }
}

csh_status require(bool cond, const char* msg) {
    if (cond) return CSH_OK;
    g_last_error = msg;
    return CSH_ERROR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* csh_version(void) { return "1.0.0"; }

const char* csh_last_error(void) { return g_last_error.c_str(); }

csh_status csh_mesh_load_text(const char* text, csh_mesh** out) {
    if (csh_status s = require(text && out, "null argument")) return s;
    return guarded([&] { *out = new csh_mesh{load_mesh(text)}; });
}

csh_status csh_mesh_load_file(const char* path, csh_mesh** out) {
    if (csh_status s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new csh_mesh{load_mesh_file(path)}; });
}

csh_status csh_mesh_write_file(const csh_mesh* mesh, const char* path) {
    if (csh_status s = require(mesh && path, "null argument")) return s;
    return guarded([&] { atomic_write_file(path, write_mesh_text(*mesh->mesh)); });
}

csh_status csh_mesh_primitive(const char* kind, int refinement_level, csh_mesh** out) {
    if (csh_status s = require(kind && out, "null argument")) return s;
    return guarded(
        [&] { *out = new csh_mesh{generate_primitive(primitive_from_name(kind), refinement_level)}; });
}

csh_status csh_mesh_refine(const csh_mesh* mesh, csh_mesh** out) {
    if (csh_status s = require(mesh && out, "null argument")) return s;
    return guarded([&] { *out = new csh_mesh{uniform_refine(*mesh->mesh)}; });
}

csh_status csh_mesh_info(const csh_mesh* mesh, int* dim, long* num_vertices, long* num_cells,
                         long* num_boundary_vertices) {
    if (csh_status s = require(mesh != nullptr, "null mesh")) return s;
    if (dim) *dim = mesh->mesh->dim();
    if (num_vertices) *num_vertices = mesh->mesh->num_vertices();
    if (num_cells) *num_cells = mesh->mesh->num_cells();
    if (num_boundary_vertices)
        *num_boundary_vertices = static_cast<long>(mesh->mesh->boundary().boundary_vertices.size());
    return CSH_OK;
}

csh_status csh_mesh_volume(const csh_mesh* mesh, double* out) {
    if (csh_status s = require(mesh && out, "null argument")) return s;
    *out = mesh->mesh->volume();
    return CSH_OK;
}

csh_status csh_mesh_is_convex(const csh_mesh* mesh, double tol, int* out) {
    if (csh_status s = require(mesh && out, "null argument")) return s;
    return guarded([&] { *out = is_convex(*mesh->mesh, tol) ? 1 : 0; });
}

void csh_mesh_free(csh_mesh* mesh) { delete mesh; }

csh_status csh_expression_parse(const char* text, csh_expression** out) {
    if (csh_status s = require(text && out, "null argument")) return s;
    return guarded([&] { *out = new csh_expression{Expression::parse(text)}; });
}

csh_status csh_expression_eval(const csh_expression* expr, const double* x, double u,
                               const double* g, double* out) {
    if (csh_status s = require(expr && out, "null argument")) return s;
    return guarded([&] {
        ExprEvalPoint p;
        for (int k = 0; k < 3; ++k) {
            p.x[k] = x ? x[k] : 0.0;
            p.g[k] = g ? g[k] : 0.0;
        }
        p.u = u;
        *out = expr->expr.eval(p);
    });
}

csh_status csh_expression_derivative(const csh_expression* expr, const char* var,
                                     csh_expression** out) {
    if (csh_status s = require(expr && var && out, "null argument")) return s;
    return guarded([&] {
        ExprVar v;
        const std::string name(var);
        if (name == "x1")
            v = ExprVar::x1;
        else if (name == "x2")
            v = ExprVar::x2;
        else if (name == "x3")
            v = ExprVar::x3;
        else if (name == "u")
            v = ExprVar::u;
        else if (name == "g1")
            v = ExprVar::g1;
        else if (name == "g2")
            v = ExprVar::g2;
        else if (name == "g3")
            v = ExprVar::g3;
        else
            fail(ErrorKind::invalid_argument, "unknown variable '" + name + "'");
        *out = new csh_expression{expr->expr.derivative(v)};
    });
}

void csh_expression_free(csh_expression* expr) { delete expr; }

csh_status csh_config_load_text(const char* text, csh_config** out) {
    if (csh_status s = require(text && out, "null argument")) return s;
    return guarded([&] { *out = new csh_config{parse_config(text)}; });
}

csh_status csh_config_load_file(const char* path, csh_config** out) {
    if (csh_status s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new csh_config{parse_config_file(path)}; });
}

csh_status csh_config_set_output_dir(csh_config* config, const char* dir) {
    if (csh_status s = require(config && dir, "null argument")) return s;
    config->config.output_dir = dir;
    return CSH_OK;
}

csh_status csh_config_set_cycles(csh_config* config, int cycles) {
    if (csh_status s = require(config != nullptr, "null config")) return s;
    if (csh_status s = require(cycles >= 1, "cycles must be at least 1")) return s;
    config->config.cycles = cycles;
    return CSH_OK;
}

csh_status csh_config_set_seed(csh_config* config, unsigned long seed) {
    if (csh_status s = require(config != nullptr, "null config")) return s;
    config->config.seed = seed;
    return CSH_OK;
}

csh_status csh_run(const csh_config* config, csh_run_result** out) {
    if (csh_status s = require(config && out, "null argument")) return s;
    return guarded([&] { *out = new csh_run_result{run_config(config->config)}; });
}

csh_status csh_run_result_levels(const csh_run_result* result, int* out) {
    if (csh_status s = require(result && out, "null argument")) return s;
    *out = static_cast<int>(result->outcome.levels.size());
    return CSH_OK;
}

csh_status csh_run_result_level_stats(const csh_run_result* result, int level, double* objective,
                                      int* iterations, double* max_constraint) {
    if (csh_status s = require(result != nullptr, "null result")) return s;
    if (csh_status s = require(level >= 1 && level <= static_cast<int>(result->outcome.levels.size()),
                               "level out of range"))
        return s;
    const LevelSummary& sum = result->outcome.levels[level - 1];
    if (objective) *objective = sum.objective;
    if (iterations) *iterations = sum.iterations;
    if (max_constraint) *max_constraint = sum.max_constraint;
    return CSH_OK;
}

void csh_run_result_free(csh_run_result* result) { delete result; }

void csh_config_free(csh_config* config) { delete config; }

}  // extern "C"
