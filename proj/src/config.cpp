#include "cshape/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cshape/errors.hpp"

namespace cshape {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void apply_preset(RunConfig& c) {
    switch (c.preset) {
        case ProblemPreset::example1:
            c.dim = 2;
            c.objective_expr = "u";
            c.rhs_expr = "20*(x1 + 0.4 - x2^2)^2 + x1^2 + x2^2 - 1";
            c.bc = BoundaryCondition::dirichlet_zero;
            c.initial_primitive = Primitive::unit_disk;
            c.initial_level = 2;
            c.cycles = 5;
            c.params.use_convexity = true;
            break;
        case ProblemPreset::example2:
            c.dim = 2;
            c.objective_expr = "u";
            c.rhs_expr = fivefold_rhs_expression();
            c.bc = BoundaryCondition::dirichlet_zero;
            c.initial_primitive = Primitive::unit_disk;
            c.initial_level = 2;
            c.cycles = 5;
            c.params.use_convexity = true;
            break;
        case ProblemPreset::example3_convex:
        case ProblemPreset::example3_unconstrained:
            c.dim = 3;
            c.objective_expr = "u";
            c.rhs_expr = "x1^2 + x2^2 + x3^2 - 1";
            c.bc = BoundaryCondition::neumann_reaction;
            c.initial_primitive = Primitive::unit_cube_centered;
            c.initial_level = 1;
            c.cycles = 3;
            c.params.use_convexity = c.preset == ProblemPreset::example3_convex;
            break;
        case ProblemPreset::custom: break;
    }
}

[[noreturn]] void config_err(const std::string& msg) {
    fail(ErrorKind::parse, "config error: " + msg);
}

double get_number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) config_err(std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

void check_expression(const std::string& text, int dim, bool allow_state, const char* what) {
    Expression e;
    try {
        e = Expression::parse(text);
    } catch (const Error& err) {
        config_err(std::string(what) + ": " + err.what());
    }
    for (ExprVar v : e.variables()) {
        const bool spatial = v == ExprVar::x1 || v == ExprVar::x2 || v == ExprVar::x3;
        const bool third = v == ExprVar::x3 || v == ExprVar::g3;
        if (third && dim == 2)
            config_err(std::string(what) + " references " + expr_var_name(v) +
                       " in a 2D problem");
        if (!allow_state && !spatial)
            config_err(std::string(what) + " may only depend on the coordinates x1..x" +
                       std::to_string(dim));
    }
}

}  // namespace

std::string fivefold_rhs_expression() {
    const int n = 5;
    std::ostringstream os;
    os << "-1/2 + 4/5*(x1^2 + x2^2)";
    for (int i = 0; i < n; ++i) {
        const double y1 = std::sin((i + 0.5) * 2.0 * M_PI / n);
        const double y2 = std::cos((i + 0.5) * 2.0 * M_PI / n);
        os << " + 2*exp(-8*((x1 - " << fmt17(y1) << ")^2 + (x2 - " << fmt17(y2) << ")^2))";
    }
    for (int i = 0; i < n; ++i) {
        const double z1 = 6.0 / 5.0 * std::sin(i * 2.0 * M_PI / n);
        const double z2 = 6.0 / 5.0 * std::cos(i * 2.0 * M_PI / n);
        os << " - exp(-8*((x1 - " << fmt17(z1) << ")^2 + (x2 - " << fmt17(z2) << ")^2))";
    }
    return os.str();
}

const char* preset_name(ProblemPreset p) {
    switch (p) {
        case ProblemPreset::example1: return "example1";
        case ProblemPreset::example2: return "example2";
        case ProblemPreset::example3_convex: return "example3_convex";
        case ProblemPreset::example3_unconstrained: return "example3_unconstrained";
        case ProblemPreset::custom: return "custom";
    }
    return "?";
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        config_err(e.what());
    }
    if (!j.is_object()) config_err("top level must be an object");

    RunConfig c;
    const std::string problem = j.value("problem", "custom");
    if (problem == "example1")
        c.preset = ProblemPreset::example1;
    else if (problem == "example2")
        c.preset = ProblemPreset::example2;
    else if (problem == "example3_convex")
        c.preset = ProblemPreset::example3_convex;
    else if (problem == "example3_unconstrained")
        c.preset = ProblemPreset::example3_unconstrained;
    else if (problem == "custom")
        c.preset = ProblemPreset::custom;
    else
        config_err("unknown problem '" + problem + "'");
    apply_preset(c);

    if (j.contains("dim")) {
        c.dim = j["dim"].get<int>();
        if (c.dim != 2 && c.dim != 3) config_err("dim must be 2 or 3");
    }
    if (j.contains("objective")) c.objective_expr = j["objective"].get<std::string>();
    if (j.contains("rhs")) c.rhs_expr = j["rhs"].get<std::string>();
    if (j.contains("bc")) {
        const std::string bc = j["bc"].get<std::string>();
        if (bc == "dirichlet_zero")
            c.bc = BoundaryCondition::dirichlet_zero;
        else if (bc == "neumann_reaction")
            c.bc = BoundaryCondition::neumann_reaction;
        else
            config_err("unknown bc '" + bc + "'");
    }
    if (j.contains("initial")) {
        const json& init = j["initial"];
        if (init.contains("primitive")) {
            try {
                c.initial_primitive = primitive_from_name(init["primitive"].get<std::string>());
            } catch (const Error& e) {
                config_err(e.what());
            }
        }
        if (init.contains("level")) c.initial_level = init["level"].get<int>();
    }
    if (j.contains("cycles")) c.cycles = j["cycles"].get<int>();
    if (j.contains("convexity")) c.params.use_convexity = j["convexity"].get<bool>();

    if (j.contains("params")) {
        const json& p = j["params"];
        AlgorithmParams& a = c.params;
        a.t0 = get_number(p, "t0", a.t0);
        a.beta = get_number(p, "beta", a.beta);
        a.sigma = get_number(p, "sigma", a.sigma);
        a.merit_m0 = get_number(p, "merit_m0", a.merit_m0);
        a.beta_m = get_number(p, "beta_m", a.beta_m);
        a.eps_tol = get_number(p, "eps_tol", a.eps_tol);
        a.max_outer = static_cast<int>(get_number(p, "max_outer", a.max_outer));
        a.elasticity.mu = get_number(p, "mu", a.elasticity.mu);
        a.elasticity.lambda = get_number(p, "lambda", a.elasticity.lambda);
        a.elasticity.delta = get_number(p, "delta", a.elasticity.delta);
        a.qp.tol = get_number(p, "qp_tol", a.qp.tol);
        a.qp.max_iter = static_cast<int>(get_number(p, "qp_max_iter", a.qp.max_iter));
        a.state_tol = get_number(p, "state_tol", a.state_tol);
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        if (o.contains("dir")) c.output_dir = o["dir"].get<std::string>();
        if (o.contains("formats")) {
            c.write_vtk = c.write_svg = c.write_csv = false;
            for (const auto& f : o["formats"]) {
                const std::string name = f.get<std::string>();
                if (name == "vtk")
                    c.write_vtk = true;
                else if (name == "svg")
                    c.write_svg = true;
                else if (name == "csv")
                    c.write_csv = true;
                else
                    config_err("unknown output format '" + name + "'");
            }
        }
    }
    if (j.contains("hold_all")) {
        const json& h = j["hold_all"];
        if (!h.contains("min") || !h.contains("max") || !h["min"].is_array() ||
            !h["max"].is_array())
            config_err("hold_all needs 'min' and 'max' arrays");
        HoldAllBox box;
        for (size_t k = 0; k < h["min"].size() && k < 3; ++k) box.min[k] = h["min"][k];
        for (size_t k = 0; k < h["max"].size() && k < 3; ++k) box.max[k] = h["max"][k];
        c.hold_all = box;
    }
    if (j.contains("seed")) c.seed = j["seed"].get<unsigned long>();

    // validation
    if (c.cycles < 1) config_err("cycles must be at least 1");
    if (c.initial_level < 0 || c.initial_level > 8) config_err("initial level must be in [0, 8]");
    if (c.preset == ProblemPreset::custom && c.rhs_expr.empty())
        config_err("custom problem requires an 'rhs' expression");
    const int prim_dim = c.initial_primitive == Primitive::unit_cube_centered ? 3 : 2;
    if (prim_dim != c.dim) config_err("initial primitive dimension does not match 'dim'");
    check_expression(c.objective_expr, c.dim, true, "objective expression");
    check_expression(c.rhs_expr, c.dim, false, "rhs expression");
    try {
        c.params.validate();
    } catch (const Error& e) {
        config_err(e.what());
    }
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ProblemSpec build_problem(const RunConfig& config) {
    ProblemSpec problem;
    problem.dim = config.dim;
    problem.bc = config.bc;
    problem.integrand = integrand_from_expression(Expression::parse(config.objective_expr));
    problem.rhs = spatial_from_expression(Expression::parse(config.rhs_expr));
    return problem;
}

}  // namespace cshape
