#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace fracpm {

/// Per-element affine map cache for a triangle K with vertices P0, P1, P2.
/// B maps the reference triangle onto K via x = P0 + B x_hat; its columns
/// are (P1 - P0) and (P2 - P0). grad[j] is the constant gradient of the
/// barycentric basis function attached to local vertex j.
struct ElementGeometry {
    std::array<std::array<double, 2>, 2> b;     // B, column-major meaning b[r][c]
    double area;                                // |K| = |det B| / 2
    std::array<std::array<double, 2>, 3> grad;  // grad phi_j on K, j = 0,1,2
};

/// Structured triangulation of an axis-aligned rectangle. Every cell is
/// split along the same diagonal, so all elements are right triangles and
/// the triangulation is weakly acute (no obtuse angles). Vertices are
/// numbered row-major; the element-local vertex 0 is always the cell corner
/// with the smallest global index. Immutable after construction.
class Mesh {
public:
    static Mesh buildRect(double x0, double x1, double y0, double y1, int nx, int ny);

    std::size_t vertexCount() const { return vertices_.size(); }
    std::size_t elementCount() const { return triangles_.size(); }

    const std::array<double, 2>& vertex(std::size_t i) const { return vertices_[i]; }
    const std::array<int, 3>& triangle(std::size_t k) const { return triangles_[k]; }

    /// Cached affine map data; throws std::out_of_range for a bad index.
    const ElementGeometry& geometry(std::size_t k) const;

    std::array<double, 2> barycenter(std::size_t k) const;

    int cellsX() const { return nx_; }
    int cellsY() const { return ny_; }
    double maxDiameter() const { return h_; }
    double domainArea() const { return domain_area_; }
    std::array<double, 4> extent() const { return extent_; }  // x0, x1, y0, y1

    const std::vector<std::array<double, 2>>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

private:
    Mesh() = default;

    std::vector<std::array<double, 2>> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<ElementGeometry> geo_;
    int nx_ = 0, ny_ = 0;
    double h_ = 0.0;
    double domain_area_ = 0.0;
    std::array<double, 4> extent_{};
};

/// Geometry of an arbitrary CCW triangle; used by the mesh builder and by
/// property tests on random elements.
ElementGeometry computeElementGeometry(const std::array<double, 2>& p0,
                                       const std::array<double, 2>& p1,
                                       const std::array<double, 2>& p2);

}  // namespace fracpm
