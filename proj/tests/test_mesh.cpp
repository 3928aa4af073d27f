#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "cshape/errors.hpp"
#include "cshape/mesh.hpp"
#include "test_util.hpp"

using namespace cshape;

namespace {

const char* kSquareMesh =
    "# unit square, two triangles\n"
    "2 4 2\n"
    "0 0\n"
    "1 0\n"
    "1 1\n"
    "0 1\n"
    "0 1 2\n"
    "0 2 3\n";

double mesh_area(const SimplicialMesh& m) { return m.volume(); }

}  // namespace

TEST_CASE("load_mesh parses the unit square") {
    MeshPtr m = load_mesh(kSquareMesh);
    CHECK(m->dim() == 2);
    CHECK(m->num_vertices() == 4);
    CHECK(m->num_cells() == 2);
    CHECK(m->boundary().facets.rows() == 4);
    CHECK(mesh_area(*m) == doctest::Approx(1.0));
}

TEST_CASE("load_mesh fixes clockwise cells") {
    const char* text =
        "2 3 1\n"
        "0 0\n"
        "1 0\n"
        "0 1\n"
        "0 2 1\n";  // clockwise
    MeshPtr m = load_mesh(text);
    CHECK(m->cell_volume(0) == doctest::Approx(0.5));
}

TEST_CASE("load_mesh rejects non-conforming connectivity") {
    // facet (0,1) appears in three cells
    const char* text =
        "2 5 3\n"
        "0 0\n"
        "1 0\n"
        "0 1\n"
        "0 -1\n"
        "1 1\n"
        "0 1 2\n"
        "0 1 3\n"
        "0 1 4\n";
    CHECK_THROWS_AS(load_mesh(text), Error);
}

TEST_CASE("load_mesh rejects degenerate cells") {
    const char* text =
        "2 4 2\n"
        "0 0\n"
        "1 0\n"
        "2 0\n"
        "0 1\n"
        "0 1 2\n"  // collinear
        "0 1 3\n";
    CHECK_THROWS_AS(load_mesh(text), Error);
}

TEST_CASE("load_mesh reports parse position") {
    try {
        load_mesh("2 4 2\n0 0\n1 zap\n");
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("unit square primitive is exact") {
    MeshPtr m = generate_primitive(Primitive::unit_square, 0);
    CHECK(m->num_cells() == 2);
    CHECK(mesh_area(*m) == doctest::Approx(1.0));
    MeshPtr m3 = generate_primitive(Primitive::unit_square, 3);
    CHECK(m3->num_cells() == 2 * 64);
    CHECK(mesh_area(*m3) == doctest::Approx(1.0));
}

TEST_CASE("disk primitive area approaches pi like the inscribed polygon") {
    for (int level = 1; level <= 4; ++level) {
        MeshPtr m = generate_primitive(Primitive::unit_disk, level);
        const int n_boundary = static_cast<int>(m->boundary().boundary_vertices.size());
        CHECK(n_boundary == 6 * (1 << level));
        // all boundary vertices projected onto the circle
        for (int v : m->boundary().boundary_vertices)
            CHECK(m->vertices().row(v).norm() == doctest::Approx(1.0).epsilon(1e-12));
        // equally spaced circle points make the area exactly the inscribed
        // polygon area N/2 sin(2 pi / N)
        const double exact = n_boundary / 2.0 * std::sin(2 * M_PI / n_boundary);
        CHECK(mesh_area(*m) == doctest::Approx(exact).epsilon(1e-12));
        const double h = 2 * std::sin(M_PI / n_boundary);  // boundary edge length
        CHECK(M_PI - mesh_area(*m) <= 2.0 * h * h);
        CHECK(M_PI - mesh_area(*m) > 0);
    }
}

TEST_CASE("centered cube primitive") {
    MeshPtr m = generate_primitive(Primitive::unit_cube_centered, 0);
    CHECK(m->dim() == 3);
    CHECK(m->num_cells() == 6);
    CHECK(m->volume() == doctest::Approx(1.0));
    CHECK(m->vertices().minCoeff() == doctest::Approx(-0.5));
    CHECK(m->vertices().maxCoeff() == doctest::Approx(0.5));

    MeshPtr m1 = generate_primitive(Primitive::unit_cube_centered, 1);
    CHECK(m1->num_cells() == 48);
    CHECK(m1->num_vertices() == 27);
    CHECK(m1->volume() == doctest::Approx(1.0));
}

TEST_CASE("unknown primitive kind") {
    CHECK_THROWS_AS(primitive_from_name("unit_pentagon"), Error);
    CHECK_THROWS_AS(generate_primitive(Primitive::unit_disk, 9), Error);
}

TEST_CASE("boundary of the unit square") {
    MeshPtr m = load_mesh(kSquareMesh);
    const BoundaryTopology& b = m->boundary();
    REQUIRE(b.loop.size() == 4);
    // cyclic order 0,1,2,3 up to shift
    const std::vector<int>& loop = b.loop;
    int start = static_cast<int>(std::find(loop.begin(), loop.end(), 0) - loop.begin());
    for (int i = 0; i < 4; ++i) CHECK(loop[(start + i) % 4] == i);
    // normals are +-e1, +-e2
    for (int f = 0; f < 4; ++f) {
        const Eigen::Vector2d n = b.facet_normals.row(f);
        CHECK(std::abs(n.lpNorm<Eigen::Infinity>()) == doctest::Approx(1.0));
        CHECK(n.norm() == doctest::Approx(1.0));
    }
}

TEST_CASE("closed boundary: facet normals integrate to zero") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        MeshPtr m = testutil::random_convex_mesh(rng, 12, 1);
        const BoundaryTopology& b = m->boundary();
        Eigen::Vector2d total = Eigen::Vector2d::Zero();
        for (int f = 0; f < b.facets.rows(); ++f)
            total += b.facet_measures[f] * b.facet_normals.row(f).transpose();
        CHECK(total.norm() <= 1e-12);
    }
    MeshPtr cube = generate_primitive(Primitive::unit_cube_centered, 1);
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    const BoundaryTopology& b = cube->boundary();
    for (int f = 0; f < b.facets.rows(); ++f)
        total += b.facet_measures[f] * b.facet_normals.row(f).transpose();
    CHECK(total.norm() <= 1e-12);
}

TEST_CASE("cube boundary faces") {
    MeshPtr cube = generate_primitive(Primitive::unit_cube_centered, 0);
    const BoundaryTopology& b = cube->boundary();
    CHECK(b.facets.rows() == 12);
    for (int f = 0; f < b.facets.rows(); ++f) {
        const Eigen::Vector3d n = b.facet_normals.row(f);
        // each normal is a signed coordinate direction
        CHECK(n.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
        CHECK(n.norm() == doctest::Approx(1.0));
    }
}

TEST_CASE("refinement preserves area and counts") {
    MeshPtr m = load_mesh(kSquareMesh);
    MeshPtr r = uniform_refine(*m);
    CHECK(r->num_cells() == 8);
    CHECK(mesh_area(*r) == doctest::Approx(1.0));
    // V' = V + E with E = 5 edges
    CHECK(r->num_vertices() == 4 + 5);

    MeshPtr rr = uniform_refine(*r);
    CHECK(rr->num_cells() == 32);
    CHECK(mesh_area(*rr) == doctest::Approx(1.0));
}

TEST_CASE("refinement keeps the boundary loop order") {
    std::mt19937 rng(11);
    MeshPtr m = testutil::random_convex_mesh(rng, 10);
    MeshPtr r = uniform_refine(*m);
    const std::vector<int>& coarse = m->boundary().loop;
    const std::vector<int>& fine = r->boundary().loop;
    CHECK(fine.size() == 2 * coarse.size());
    // original vertices appear in the same cyclic order (indices preserved)
    std::vector<int> restricted;
    for (int v : fine)
        if (v < m->num_vertices()) restricted.push_back(v);
    REQUIRE(restricted.size() == coarse.size());
    const int shift = static_cast<int>(
        std::find(restricted.begin(), restricted.end(), coarse[0]) - restricted.begin());
    REQUIRE(shift < static_cast<int>(restricted.size()));
    for (size_t i = 0; i < coarse.size(); ++i)
        CHECK(restricted[(shift + i) % restricted.size()] == coarse[i]);
}

TEST_CASE("3D refinement conforms and preserves volume") {
    MeshPtr m = generate_primitive(Primitive::unit_cube_centered, 0);
    MeshPtr r = uniform_refine(*m);
    CHECK(r->num_cells() == 48);
    CHECK(r->volume() == doctest::Approx(1.0));
    for (int c = 0; c < r->num_cells(); ++c) CHECK(r->cell_volume(c) > 0);
    MeshPtr rr = uniform_refine(*r);  // constructor validates conformity
    CHECK(rr->volume() == doctest::Approx(1.0));
}

TEST_CASE("deformation quality report") {
    MeshPtr m = load_mesh(kSquareMesh);
    const int d = 2, nv = m->num_vertices();

    VectorFieldP1 zero{m, Eigen::VectorXd::Zero(d * nv)};
    QualityReport rep = deformation_quality(*m, zero, 0.7);
    CHECK(rep.min_det == doctest::Approx(1.0));
    CHECK(rep.max_det == doctest::Approx(1.0));
    CHECK(rep.max_norm == doctest::Approx(0.0));
    CHECK(rep.pass);

    // V(x) = x, homothety
    VectorFieldP1 identity{m, Eigen::VectorXd(d * nv)};
    for (int v = 0; v < nv; ++v)
        identity.coeffs.segment<2>(2 * v) = m->vertices().row(v).transpose();
    rep = deformation_quality(*m, identity, 1.0);
    CHECK(rep.max_det == doctest::Approx(4.0));
    CHECK_FALSE(rep.pass);

    rep = deformation_quality(*m, identity, 0.2);
    CHECK(rep.min_det == doctest::Approx(1.44));
    CHECK(rep.max_det == doctest::Approx(1.44));
    CHECK(rep.max_norm == doctest::Approx(0.2));
    CHECK(rep.pass);
}

TEST_CASE("apply_deformation moves vertices") {
    MeshPtr m = load_mesh(kSquareMesh);
    const int nv = m->num_vertices();

    SUBCASE("t = 0 is the identity") {
        std::mt19937 rng(5);
        VectorFieldP1 v = testutil::random_field(m, rng, 0.3);
        MeshPtr d = apply_deformation(*m, v, 0.0);
        CHECK((d->vertices() - m->vertices()).norm() == 0.0);
    }

    SUBCASE("constant field translates rigidly") {
        VectorFieldP1 c{m, Eigen::VectorXd(2 * nv)};
        for (int v = 0; v < nv; ++v) c.coeffs.segment<2>(2 * v) << 0.3, -0.1;
        MeshPtr d = apply_deformation(*m, c, 1.0);
        CHECK(d->volume() == doctest::Approx(m->volume()));
        for (int i = 0; i < nv; ++i) {
            CHECK(d->vertices()(i, 0) == doctest::Approx(m->vertices()(i, 0) + 0.3));
            CHECK(d->vertices()(i, 1) == doctest::Approx(m->vertices()(i, 1) - 0.1));
        }
    }

    SUBCASE("homothety scales volumes") {
        VectorFieldP1 identity{m, Eigen::VectorXd(2 * nv)};
        for (int v = 0; v < nv; ++v)
            identity.coeffs.segment<2>(2 * v) = m->vertices().row(v).transpose();
        MeshPtr d = apply_deformation(*m, identity, 0.1);
        for (int c = 0; c < m->num_cells(); ++c)
            CHECK(d->cell_volume(c) == doctest::Approx(1.21 * m->cell_volume(c)));
        // quality veto: t = 1 doubles the mesh, det = 4 > 2
        CHECK_THROWS_AS(apply_deformation(*m, identity, 1.0), Error);
    }
}

TEST_CASE("mesh text round trip is exact") {
    std::mt19937 rng(17);
    MeshPtr m = testutil::random_convex_mesh(rng, 9, 1);
    MeshPtr copy = load_mesh(write_mesh_text(*m));
    CHECK(copy->num_vertices() == m->num_vertices());
    CHECK(copy->num_cells() == m->num_cells());
    CHECK((copy->vertices() - m->vertices()).norm() == 0.0);
    CHECK((copy->cells() - m->cells()).norm() == 0);
}
