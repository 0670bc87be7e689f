#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fracpm/mesh.hpp"

using namespace fracpm;

TEST_CASE("unit square single split") {
    const Mesh m = Mesh::buildRect(0, 1, 0, 1, 1, 1);
    CHECK(m.vertexCount() == 4);
    CHECK(m.elementCount() == 2);
    double area = 0.0;
    for (std::size_t k = 0; k < m.elementCount(); ++k) area += m.geometry(k).area;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("2x2 grid counts") {
    const Mesh m = Mesh::buildRect(-2, 2, -2, 2, 2, 2);
    CHECK(m.vertexCount() == 9);
    CHECK(m.elementCount() == 8);
    double area = 0.0;
    for (std::size_t k = 0; k < m.elementCount(); ++k) area += m.geometry(k).area;
    CHECK(area == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(m.domainArea() == doctest::Approx(16.0));
}

TEST_CASE("fine structured family counts and diameter") {
    const Mesh m = Mesh::buildRect(-2, 2, -2, 2, 256, 256);
    CHECK(m.vertexCount() == 66049);
    CHECK(m.elementCount() == 131072);
    CHECK(m.maxDiameter() == doctest::Approx(std::sqrt(2.0) * 4.0 / 256).epsilon(1e-14));
}

TEST_CASE("reference element geometry") {
    const auto g = computeElementGeometry({0, 0}, {1, 0}, {0, 1});
    CHECK(g.b[0][0] == 1.0);
    CHECK(g.b[0][1] == 0.0);
    CHECK(g.b[1][0] == 0.0);
    CHECK(g.b[1][1] == 1.0);
    CHECK(g.area == doctest::Approx(0.5));
}

TEST_CASE("scaled element gradients") {
    const auto g = computeElementGeometry({0, 0}, {2, 0}, {0, 2});
    CHECK(g.area == doctest::Approx(2.0));
    CHECK(g.grad[0][0] == doctest::Approx(-0.5));
    CHECK(g.grad[0][1] == doctest::Approx(-0.5));
}

TEST_CASE("basis gradients sum to zero on random elements") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    int built = 0;
    while (built < 200) {
        std::array<double, 2> p0{u(rng), u(rng)}, p1{u(rng), u(rng)}, p2{u(rng), u(rng)};
        const double twice_area = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                                  (p1[1] - p0[1]) * (p2[0] - p0[0]);
        if (twice_area < 1e-3) continue;
        const auto g = computeElementGeometry(p0, p1, p2);
        CHECK(std::abs(g.grad[0][0] + g.grad[1][0] + g.grad[2][0]) < 1e-12);
        CHECK(std::abs(g.grad[0][1] + g.grad[1][1] + g.grad[2][1]) < 1e-12);
        ++built;
    }
}

TEST_CASE("local vertex 0 has the smallest global index") {
    const Mesh m = Mesh::buildRect(-1, 1, 0, 3, 5, 4);
    for (std::size_t k = 0; k < m.elementCount(); ++k) {
        const auto& t = m.triangle(k);
        CHECK(t[0] < t[1]);
        CHECK(t[0] < t[2]);
    }
}

TEST_CASE("weakly acute: right triangles only") {
    const Mesh m = Mesh::buildRect(-2, 2, -2, 2, 7, 5);
    for (std::size_t k = 0; k < m.elementCount(); ++k) {
        const auto& t = m.triangle(k);
        for (int a = 0; a < 3; ++a) {
            const auto& pa = m.vertex(t[a]);
            const auto& pb = m.vertex(t[(a + 1) % 3]);
            const auto& pc = m.vertex(t[(a + 2) % 3]);
            const double dot = (pb[0] - pa[0]) * (pc[0] - pa[0]) +
                               (pb[1] - pa[1]) * (pc[1] - pa[1]);
            CHECK(dot >= -1e-14);
        }
    }
}

TEST_CASE("barycenter lies inside the element") {
    const Mesh m = Mesh::buildRect(0, 2, 0, 1, 3, 3);
    for (std::size_t k = 0; k < m.elementCount(); ++k) {
        const auto b = m.barycenter(k);
        CHECK(b[0] > 0.0);
        CHECK(b[0] < 2.0);
        CHECK(b[1] > 0.0);
        CHECK(b[1] < 1.0);
    }
}

TEST_CASE("invalid arguments are rejected") {
    CHECK_THROWS_AS(Mesh::buildRect(0, 1, 0, 1, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(Mesh::buildRect(0, 1, 0, 1, 4, -1), std::invalid_argument);
    CHECK_THROWS_AS(Mesh::buildRect(1, 1, 0, 1, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(Mesh::buildRect(0, 1, 2, 1, 4, 4), std::invalid_argument);
    const Mesh m = Mesh::buildRect(0, 1, 0, 1, 2, 2);
    CHECK_THROWS_AS(m.geometry(8), std::out_of_range);
}

TEST_CASE("degenerate element geometry is rejected") {
    CHECK_THROWS(computeElementGeometry({0, 0}, {1, 0}, {2, 0}));
    // clockwise orientation is rejected too
    CHECK_THROWS(computeElementGeometry({0, 0}, {0, 1}, {1, 0}));
}
