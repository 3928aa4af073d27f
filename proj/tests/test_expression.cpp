#include <doctest.h>

#include <cmath>
#include <random>

#include "cshape/errors.hpp"
#include "cshape/expression.hpp"

using namespace cshape;

namespace {

double eval_at(const Expression& e, double x1, double x2 = 0, double u = 0) {
    ExprEvalPoint p;
    p.x[0] = x1;
    p.x[1] = x2;
    p.u = u;
    return e.eval(p);
}

}  // namespace

TEST_CASE("precedence and arithmetic") {
    CHECK(eval_at(Expression::parse("2+3*4"), 0) == doctest::Approx(14));
    CHECK(eval_at(Expression::parse("2*3^2"), 0) == doctest::Approx(18));
    CHECK(eval_at(Expression::parse("-2^2"), 0) == doctest::Approx(-4));   // ^ binds tighter
    CHECK(eval_at(Expression::parse("2^-1"), 0) == doctest::Approx(0.5));
    CHECK(eval_at(Expression::parse("2^3^2"), 0) == doctest::Approx(512));  // right-assoc
    CHECK(eval_at(Expression::parse("(2+3)*4"), 0) == doctest::Approx(20));
    CHECK(eval_at(Expression::parse("7-2-1"), 0) == doctest::Approx(4));
    CHECK(eval_at(Expression::parse("8/4/2"), 0) == doctest::Approx(1));
}

TEST_CASE("first example rhs at the origin") {
    const Expression f = Expression::parse("20*(x1 + 0.4 - x2^2)^2 + x1^2 + x2^2 - 1");
    CHECK(eval_at(f, 0, 0) == doctest::Approx(2.2));
    CHECK(eval_at(f, 1, 1) == doctest::Approx(20 * 0.16 + 1));
}

TEST_CASE("functions and variables") {
    CHECK(eval_at(Expression::parse("exp(x1)"), 1) == doctest::Approx(std::exp(1.0)));
    CHECK(eval_at(Expression::parse("sin(x1)^2 + cos(x1)^2"), 0.7) == doctest::Approx(1));
    CHECK(eval_at(Expression::parse("sqrt(x1^2)"), 3) == doctest::Approx(3));
    ExprEvalPoint p;
    p.u = 2;
    p.g[0] = 3;
    p.g[1] = -1;
    CHECK(Expression::parse("u*g1 + g2").eval(p) == doctest::Approx(5));
}

TEST_CASE("parse errors carry a position") {
    CHECK_THROWS_AS(Expression::parse("2+*3"), Error);
    CHECK_THROWS_AS(Expression::parse("sin(2"), Error);
    CHECK_THROWS_AS(Expression::parse("foo(2)"), Error);
    CHECK_THROWS_AS(Expression::parse("x4"), Error);
    CHECK_THROWS_AS(Expression::parse("2 3"), Error);
    try {
        Expression::parse("1 + @");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("position 5") != std::string::npos);
    }
}

TEST_CASE("symbolic derivatives") {
    const Expression sq = Expression::parse("x1^2");
    CHECK(eval_at(sq.derivative(ExprVar::x1), 3) == doctest::Approx(6));

    const Expression prod = Expression::parse("x1*sin(x2)");
    CHECK(eval_at(prod.derivative(ExprVar::x2), 2, 0.5) == doctest::Approx(2 * std::cos(0.5)));

    // derivative of a derivative stays well formed
    const Expression f = Expression::parse("exp(-8*((x1 - 0.5)^2 + x2^2))");
    const Expression fx = f.derivative(ExprVar::x1);
    const Expression fxx = fx.derivative(ExprVar::x1);
    const double x = 0.3, y = -0.2;
    const double e = std::exp(-8 * ((x - 0.5) * (x - 0.5) + y * y));
    CHECK(eval_at(fx, x, y) == doctest::Approx(-16 * (x - 0.5) * e).epsilon(1e-12));
    CHECK(eval_at(fxx, x, y) ==
          doctest::Approx((-16 + 256 * (x - 0.5) * (x - 0.5)) * e).epsilon(1e-12));
}

TEST_CASE("derivatives agree with central differences") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.2, 1.5);
    const char* exprs[] = {
        "x1^2*x2 - x2/x1", "sin(x1*x2) + cos(x1)", "sqrt(x1 + x2^2)", "exp(x1 - x2)*x1",
        "u^2*g1 + g2^2 - x1*u",
    };
    const ExprVar vars[] = {ExprVar::x1, ExprVar::x2, ExprVar::u, ExprVar::g1, ExprVar::g2};
    for (const char* text : exprs) {
        const Expression f = Expression::parse(text);
        for (ExprVar v : vars) {
            const Expression df = f.derivative(v);
            for (int trial = 0; trial < 5; ++trial) {
                ExprEvalPoint p;
                p.x[0] = dist(rng);
                p.x[1] = dist(rng);
                p.u = dist(rng);
                p.g[0] = dist(rng);
                p.g[1] = dist(rng);
                const double h = 1e-6;
                ExprEvalPoint pp = p, pm = p;
                switch (v) {
                    case ExprVar::x1: pp.x[0] += h; pm.x[0] -= h; break;
                    case ExprVar::x2: pp.x[1] += h; pm.x[1] -= h; break;
                    case ExprVar::u: pp.u += h; pm.u -= h; break;
                    case ExprVar::g1: pp.g[0] += h; pm.g[0] -= h; break;
                    default: pp.g[1] += h; pm.g[1] -= h; break;
                }
                const double fd = (f.eval(pp) - f.eval(pm)) / (2 * h);
                CHECK(df.eval(p) == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("variable collection and constants") {
    const Expression f = Expression::parse("x1*u + g2");
    const auto vars = f.variables();
    CHECK(vars.count(ExprVar::x1) == 1);
    CHECK(vars.count(ExprVar::u) == 1);
    CHECK(vars.count(ExprVar::g2) == 1);
    CHECK(vars.count(ExprVar::x2) == 0);

    double value = 0;
    CHECK(Expression::parse("2^3 + 1").is_constant(&value));
    CHECK(value == doctest::Approx(9));
    CHECK_FALSE(f.is_constant());
}
