#pragma once

#include <memory>
#include <set>
#include <string>

namespace cshape {

// Variables an expression may reference. x1..x3 are spatial coordinates,
// u the state value, g1..g3 the state gradient components.
enum class ExprVar { x1 = 0, x2, x3, u, g1, g2, g3 };

constexpr int kNumExprVars = 7;

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprEvalPoint {
    double x[3] = {0, 0, 0};
    double u = 0;
    double g[3] = {0, 0, 0};

    double operator[](ExprVar v) const {
        switch (v) {
            case ExprVar::x1: return x[0];
            case ExprVar::x2: return x[1];
            case ExprVar::x3: return x[2];
            case ExprVar::u: return u;
            case ExprVar::g1: return g[0];
            case ExprVar::g2: return g[1];
            case ExprVar::g3: return g[2];
        }
        return 0;
    }
};

// Immutable arithmetic expression with symbolic differentiation.
//
// Grammar: reals, variables x1..x3, u, g1..g3, binary + - * / ^
// (right-associative ^, precedence ^ > unary - > * / > + -), unary -,
// functions exp, sin, cos, sqrt and parentheses.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& text);
    static Expression constant(double value);

    bool valid() const { return root_ != nullptr; }
    double eval(const ExprEvalPoint& p) const;
    Expression derivative(ExprVar var) const;

    // Variables actually occurring in the tree.
    std::set<ExprVar> variables() const;
    bool is_constant(double* value = nullptr) const;

    std::string str() const;

private:
    explicit Expression(ExprNodePtr root) : root_(std::move(root)) {}
    ExprNodePtr root_;
};

const char* expr_var_name(ExprVar v);

}  // namespace cshape
