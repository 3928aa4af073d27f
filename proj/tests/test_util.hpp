#pragma once

// Shared oracles and generators for the test suites. Everything here is
// implemented independently of the library code paths it cross-checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cshape/fem.hpp"
#include "cshape/mesh.hpp"

namespace testutil {

// Random convex polygon mesh: convex hull of random points in an annulus,
// fan-triangulated from the centroid, optionally refined.
inline cshape::MeshPtr random_convex_mesh(std::mt19937& rng, int target_boundary,
                                          int refinements = 0) {
    std::uniform_real_distribution<double> angle(0, 2 * M_PI);
    std::uniform_real_distribution<double> radius(0.6, 1.4);

    // hull of k random points has fewer vertices than k; oversample
    std::vector<Eigen::Vector2d> pts;
    const int samples = std::max(8, target_boundary * 3);
    for (int i = 0; i < samples; ++i) {
        const double a = angle(rng), r = radius(rng);
        pts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    int k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) k--;
        hull[k++] = pts[i];
    }
    for (int i = static_cast<int>(pts.size()) - 2, lo = k + 1; i >= 0; --i) {
        while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[static_cast<size_t>(i)]) <= 0) k--;
        hull[k++] = pts[static_cast<size_t>(i)];
    }
    hull.resize(k - 1);

    const int n = static_cast<int>(hull.size());
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : hull) centroid += p;
    centroid /= n;

    Eigen::MatrixXd verts(n + 1, 2);
    verts.row(0) = centroid;
    for (int i = 0; i < n; ++i) verts.row(i + 1) = hull[i];
    Eigen::MatrixXi cells(n, 3);
    for (int i = 0; i < n; ++i) cells.row(i) << 0, i + 1, (i + 1) % n + 1;
    cshape::MeshPtr mesh = std::make_shared<cshape::SimplicialMesh>(2, verts, cells);
    for (int r = 0; r < refinements; ++r) mesh = cshape::uniform_refine(*mesh);
    return mesh;
}

inline cshape::VectorFieldP1 random_field(cshape::MeshPtr mesh, std::mt19937& rng,
                                          double amplitude = 1.0) {
    std::uniform_real_distribution<double> coef(-amplitude, amplitude);
    Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->dim()) * mesh->num_vertices());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = coef(rng);
    return {mesh, v};
}

// Degree-5 triangle rule used only for error norms; independent of the
// second-order rule inside the library.
struct Degree5Rule {
    double bary[7][3];
    double weights[7];
};

inline const Degree5Rule& degree5_rule() {
    static const Degree5Rule rule = [] {
        Degree5Rule r;
        const double a1 = 0.0597158717897698, b1 = 0.4701420641051151;
        const double a2 = 0.7974269853530873, b2 = 0.1012865073234563;
        const double w0 = 9.0 / 40.0, w1 = 0.1323941527885062, w2 = 0.1259391805448271;
        int i = 0;
        r.bary[i][0] = 1.0 / 3; r.bary[i][1] = 1.0 / 3; r.bary[i][2] = 1.0 / 3; r.weights[i++] = w0;
        r.bary[i][0] = a1; r.bary[i][1] = b1; r.bary[i][2] = b1; r.weights[i++] = w1;
        r.bary[i][0] = b1; r.bary[i][1] = a1; r.bary[i][2] = b1; r.weights[i++] = w1;
        r.bary[i][0] = b1; r.bary[i][1] = b1; r.bary[i][2] = a1; r.weights[i++] = w1;
        r.bary[i][0] = a2; r.bary[i][1] = b2; r.bary[i][2] = b2; r.weights[i++] = w2;
        r.bary[i][0] = b2; r.bary[i][1] = a2; r.bary[i][2] = b2; r.weights[i++] = w2;
        r.bary[i][0] = b2; r.bary[i][1] = b2; r.bary[i][2] = a2; r.weights[i++] = w2;
        return r;
    }();
    return rule;
}

// L2 and H1-seminorm errors of a P1 field against a smooth reference.
struct ErrorNorms {
    double l2 = 0;
    double h1 = 0;
};

template <typename Exact, typename ExactGrad>
ErrorNorms error_norms_2d(const cshape::SimplicialMesh& mesh, const Eigen::VectorXd& uh,
                          Exact&& exact, ExactGrad&& exact_grad) {
    const Degree5Rule& rule = degree5_rule();
    double l2 = 0, h1 = 0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::VectorXi cell = mesh.cells().row(c);
        const Eigen::MatrixXd& grads = mesh.hat_gradients(c);
        Eigen::Vector2d gh = Eigen::Vector2d::Zero();
        for (int k = 0; k < 3; ++k) gh += uh[cell[k]] * grads.row(k).transpose();
        for (int q = 0; q < 7; ++q) {
            Eigen::Vector2d x = Eigen::Vector2d::Zero();
            double val = 0;
            for (int k = 0; k < 3; ++k) {
                x += rule.bary[q][k] * mesh.vertices().row(cell[k]).transpose();
                val += rule.bary[q][k] * uh[cell[k]];
            }
            const double w = rule.weights[q] * mesh.cell_volume(c);
            const double diff = val - exact(x);
            const Eigen::Vector2d gdiff = gh - exact_grad(x);
            l2 += w * diff * diff;
            h1 += w * gdiff.squaredNorm();
        }
    }
    return {std::sqrt(l2), std::sqrt(h1)};
}

// Least-squares slope of log2(err) against level index (h halves per level).
inline double convergence_rate(const std::vector<double>& errors) {
    const int n = static_cast<int>(errors.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = i, y = std::log2(errors[static_cast<size_t>(i)]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testutil
