#include "fracpm/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace fracpm {

ElementGeometry computeElementGeometry(const std::array<double, 2>& p0,
                                       const std::array<double, 2>& p1,
                                       const std::array<double, 2>& p2) {
    ElementGeometry g{};
    const double e1x = p1[0] - p0[0], e1y = p1[1] - p0[1];
    const double e2x = p2[0] - p0[0], e2y = p2[1] - p0[1];
    g.b = {{{e1x, e2x}, {e1y, e2y}}};
    const double det = e1x * e2y - e1y * e2x;
    if (det <= 0.0)
        throw std::invalid_argument("computeElementGeometry: vertices not CCW");
    g.area = det / 2.0;

    // grad of the barycentric coordinate at vertex j: rotate the opposite
    // edge by 90 degrees and scale by 1/(2|K|).
    const std::array<double, 2> p[3] = {p0, p1, p2};
    for (int j = 0; j < 3; ++j) {
        const auto& a = p[(j + 1) % 3];
        const auto& b = p[(j + 2) % 3];
        g.grad[j] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
    }
    return g;
}

Mesh Mesh::buildRect(double x0, double x1, double y0, double y1, int nx, int ny) {
    if (!(x1 > x0) || !(y1 > y0))
        throw std::invalid_argument("buildRect: degenerate rectangle");
    if (nx <= 0 || ny <= 0)
        throw std::invalid_argument("buildRect: cell counts must be positive");

    Mesh m;
    m.nx_ = nx;
    m.ny_ = ny;
    m.extent_ = {x0, x1, y0, y1};
    m.domain_area_ = (x1 - x0) * (y1 - y0);
    const double dx = (x1 - x0) / nx;
    const double dy = (y1 - y0) / ny;
    m.h_ = std::hypot(dx, dy);

    m.vertices_.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices_.push_back({x0 + i * dx, y0 + j * dy});

    // Uniform diagonal split from the low-left corner v00 to v11. Row-major
    // numbering makes v00 the smallest global index in both triangles, so it
    // is the local vertex 0 of the affine map in each.
    m.triangles_.reserve(2u * nx * ny);
    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            m.triangles_.push_back({v00, v10, v11});
            m.triangles_.push_back({v00, v11, v01});
        }
    }

    m.geo_.reserve(m.triangles_.size());
    for (const auto& t : m.triangles_)
        m.geo_.push_back(computeElementGeometry(m.vertices_[t[0]], m.vertices_[t[1]],
                                                m.vertices_[t[2]]));
    return m;
}

const ElementGeometry& Mesh::geometry(std::size_t k) const {
    if (k >= geo_.size())
        throw std::out_of_range("Mesh::geometry: element index out of range");
    return geo_[k];
}

std::array<double, 2> Mesh::barycenter(std::size_t k) const {
    const auto& t = triangles_.at(k);
    return {(vertices_[t[0]][0] + vertices_[t[1]][0] + vertices_[t[2]][0]) / 3.0,
            (vertices_[t[0]][1] + vertices_[t[1]][1] + vertices_[t[2]][1]) / 3.0};
}

}  // namespace fracpm
