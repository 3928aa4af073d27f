/* convexshape: PDE-constrained shape optimization over convex polygonal
 * and polyhedral domains.
 *
 * C API of the shared library. All objects are opaque handles created and
 * destroyed through these functions; every fallible call returns a
 * csh_status and leaves a message retrievable via csh_last_error() on
 * failure. Handles are not thread-safe; distinct handles may be used from
 * distinct threads concurrently.
 */

#ifndef CONVEXSHAPE_H
#define CONVEXSHAPE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum csh_status {
    CSH_OK = 0,
    CSH_ERROR_INVALID_ARGUMENT = 1,
    CSH_ERROR_PARSE = 2,
    CSH_ERROR_NUMERIC = 3,
    CSH_ERROR_IO = 4,
    CSH_ERROR_UNSUPPORTED = 5
} csh_status;

typedef struct csh_mesh csh_mesh;
typedef struct csh_expression csh_expression;
typedef struct csh_config csh_config;
typedef struct csh_run_result csh_run_result;

const char* csh_version(void);

/* Message of the most recent failure on the calling thread. */
const char* csh_last_error(void);

/* ---- meshes ---------------------------------------------------------- */

/* Text format: "dim nv nc" header, nv coordinate lines, nc zero-based
 * index lines; '#' starts a comment. */
csh_status csh_mesh_load_text(const char* text, csh_mesh** out);
csh_status csh_mesh_load_file(const char* path, csh_mesh** out);
csh_status csh_mesh_write_file(const csh_mesh* mesh, const char* path);

/* kind: "unit_disk", "unit_square" or "unit_cube_centered"; level >= 0. */
csh_status csh_mesh_primitive(const char* kind, int refinement_level, csh_mesh** out);
csh_status csh_mesh_refine(const csh_mesh* mesh, csh_mesh** out);

csh_status csh_mesh_info(const csh_mesh* mesh, int* dim, long* num_vertices, long* num_cells,
                         long* num_boundary_vertices);
csh_status csh_mesh_volume(const csh_mesh* mesh, double* out);

/* 1 if all convexity constraint values are <= tol, else 0. */
csh_status csh_mesh_is_convex(const csh_mesh* mesh, double tol, int* out);

void csh_mesh_free(csh_mesh* mesh);

/* ---- expressions ------------------------------------------------------ */

/* Arithmetic over x1..x3, u, g1..g3 with + - * / ^, unary -, exp, sin,
 * cos, sqrt and parentheses. */
csh_status csh_expression_parse(const char* text, csh_expression** out);

/* x and g may be NULL (treated as zero); x/g point to 3 doubles. */
csh_status csh_expression_eval(const csh_expression* expr, const double* x, double u,
                               const double* g, double* out);

/* var: "x1".."x3", "u", "g1".."g3". */
csh_status csh_expression_derivative(const csh_expression* expr, const char* var,
                                     csh_expression** out);

void csh_expression_free(csh_expression* expr);

/* ---- configuration and runs ------------------------------------------ */

/* JSON configuration; see the project README for the schema. */
csh_status csh_config_load_text(const char* text, csh_config** out);
csh_status csh_config_load_file(const char* path, csh_config** out);

csh_status csh_config_set_output_dir(csh_config* config, const char* dir);
csh_status csh_config_set_cycles(csh_config* config, int cycles);
csh_status csh_config_set_seed(csh_config* config, unsigned long seed);

/* Runs the optimize-refine driver and writes artifacts to the configured
 * output directory. */
csh_status csh_run(const csh_config* config, csh_run_result** out);

csh_status csh_run_result_levels(const csh_run_result* result, int* out);
csh_status csh_run_result_level_stats(const csh_run_result* result, int level /* 1-based */,
                                      double* objective, int* iterations,
                                      double* max_constraint);

void csh_run_result_free(csh_run_result* result);
void csh_config_free(csh_config* config);

#ifdef __cplusplus
}
#endif

#endif /* CONVEXSHAPE_H */
