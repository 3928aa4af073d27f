// convexshape command line front end. Talks to the shared library
// exclusively through the C API in convexshape.h.

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "convexshape.h"

namespace {

void usage(FILE* out) {
    std::fprintf(out,
                 "usage:\n"
                 "  convexshape run <config-path> [--out DIR] [--levels N] [--seed S]\n"
                 "  convexshape check <config-path>\n"
                 "\n"
                 "exit codes: 0 ok, 1 configuration error, 2 runtime failure\n");
}

// configuration problems exit 1, runtime failures exit 2
int exit_code_for(csh_status status) {
    switch (status) {
        case CSH_OK: return 0;
        case CSH_ERROR_INVALID_ARGUMENT:
        case CSH_ERROR_PARSE:
        case CSH_ERROR_UNSUPPORTED: return 1;
        default: return 2;
    }
}

int fail_with(csh_status status) {
    std::fprintf(stderr, "convexshape: error: %s\n", csh_last_error());
    return exit_code_for(status);
}

int cmd_check(const char* path) {
    csh_config* config = nullptr;
    const csh_status status = csh_config_load_file(path, &config);
    if (status != CSH_OK) return fail_with(status);
    csh_config_free(config);
    std::printf("%s: ok\n", path);
    return 0;
}

int cmd_run(const char* path, const char* out_dir, long levels, int have_levels,
            unsigned long seed, int have_seed) {
    csh_config* config = nullptr;
    csh_status status = csh_config_load_file(path, &config);
    if (status != CSH_OK) return fail_with(status);

    if (out_dir) status = csh_config_set_output_dir(config, out_dir);
    if (status == CSH_OK && have_levels) status = csh_config_set_cycles(config, (int)levels);
    if (status == CSH_OK && have_seed) status = csh_config_set_seed(config, seed);
    if (status != CSH_OK) {
        csh_config_free(config);
        return fail_with(status);
    }

    csh_run_result* result = nullptr;
    status = csh_run(config, &result);
    csh_config_free(config);
    if (status != CSH_OK) {
        const int code = exit_code_for(status) == 1 ? 1 : 2;
        std::fprintf(stderr, "convexshape: run failed: %s\n", csh_last_error());
        return code;
    }

    int n = 0;
    csh_run_result_levels(result, &n);
    for (int level = 1; level <= n; ++level) {
        double objective = 0, max_constraint = 0;
        int iterations = 0;
        csh_run_result_level_stats(result, level, &objective, &iterations, &max_constraint);
        std::printf("level %d: J = %.10g, iterations = %d, max C_i = %.3g\n", level, objective,
                    iterations, max_constraint);
    }
    csh_run_result_free(result);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        usage(stderr);
        return 1;
    }
    const char* cmd = argv[1];
    if (std::strcmp(cmd, "--help") == 0 || std::strcmp(cmd, "-h") == 0) {
        usage(stdout);
        return 0;
    }
    if (std::strcmp(cmd, "check") == 0) {
        if (argc != 3) {
            usage(stderr);
            return 1;
        }
        return cmd_check(argv[2]);
    }
    if (std::strcmp(cmd, "run") == 0) {
        const char* path = nullptr;
        const char* out_dir = nullptr;
        long levels = 0;
        unsigned long seed = 0;
        int have_levels = 0, have_seed = 0;
        for (int i = 2; i < argc; ++i) {
            if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
                out_dir = argv[++i];
            } else if (std::strcmp(argv[i], "--levels") == 0 && i + 1 < argc) {
                char* end = nullptr;
                levels = std::strtol(argv[++i], &end, 10);
                if (!end || *end != '\0' || levels < 1) {
                    std::fprintf(stderr, "convexshape: invalid --levels value\n");
                    return 1;
                }
                have_levels = 1;
            } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
                char* end = nullptr;
                seed = std::strtoul(argv[++i], &end, 10);
                if (!end || *end != '\0') {
                    std::fprintf(stderr, "convexshape: invalid --seed value\n");
                    return 1;
                }
                have_seed = 1;
            } else if (argv[i][0] == '-') {
                std::fprintf(stderr, "convexshape: unknown option '%s'\n", argv[i]);
                usage(stderr);
                return 1;
            } else if (!path) {
                path = argv[i];
            } else {
                usage(stderr);
                return 1;
            }
        }
        if (!path) {
            usage(stderr);
            return 1;
        }
        return cmd_run(path, out_dir, levels, have_levels, seed, have_seed);
    }
    std::fprintf(stderr, "convexshape: unknown command '%s'\n", cmd);
    usage(stderr);
    return 1;
}
