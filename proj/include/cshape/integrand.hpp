#pragma once

#include <Eigen/Dense>
#include <functional>

#include "cshape/expression.hpp"

namespace cshape {

// Sample point passed to integrand callbacks: position, state value and
// state gradient. Unused trailing components are zero in 2D.
struct IntegrandArgs {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    double u = 0;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
};

// Objective density j(x, u, g) with its partial derivatives.
struct Integrand {
    std::function<double(const IntegrandArgs&)> value;
    std::function<Eigen::Vector3d(const IntegrandArgs&)> dx;  // j_x
    std::function<double(const IntegrandArgs&)> du;           // j_u
    std::function<Eigen::Vector3d(const IntegrandArgs&)> dg;  // j_v
};

// Builds an integrand from an expression over x1..xd, u, g1..gd with
// symbolic partial derivatives.
Integrand integrand_from_expression(const Expression& j);

}  // namespace cshape
