#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fracop {

enum class BoundaryKind { dirichlet, robin_type };

/// Uniform Cartesian grid of nodes over an axis-aligned box. Node (i,j,k)
/// sits at origin + h*(i,j,k); indexing is x-fastest. Boxes keep outward
/// normals exact (unit axis vectors), which is what makes the Robin-type
/// boundary rows unambiguous.
struct Grid {
    int nx{0}, ny{0}, nz{0};
    double h{0};
    std::array<double, 3> origin{0, 0, 0};
    BoundaryKind boundary_kind{BoundaryKind::dirichlet};

    Grid() = default;
    Grid(int nx_, int ny_, int nz_, double h_, std::array<double, 3> origin_ = {0, 0, 0},
         BoundaryKind kind = BoundaryKind::dirichlet)
        : nx(nx_), ny(ny_), nz(nz_), h(h_), origin(origin_), boundary_kind(kind) {
        if (nx < 3 || ny < 3 || nz < 3)
            throw std::invalid_argument("Grid: need at least 3 nodes per axis");
        if (!(h > 0)) throw std::invalid_argument("Grid: spacing h must be positive");
    }

    bool operator==(const Grid&) const = default;

    std::int64_t node_count() const {
        return static_cast<std::int64_t>(nx) * ny * nz;
    }
    std::int64_t index(int i, int j, int k) const {
        return i + static_cast<std::int64_t>(nx) * (j + static_cast<std::int64_t>(ny) * k);
    }
    std::array<int, 3> unpack(std::int64_t n) const {
        const int i = static_cast<int>(n % nx);
        const int j = static_cast<int>((n / nx) % ny);
        const int k = static_cast<int>(n / (static_cast<std::int64_t>(nx) * ny));
        return {i, j, k};
    }
    std::array<double, 3> coords(int i, int j, int k) const {
        return {origin[0] + h * i, origin[1] + h * j, origin[2] + h * k};
    }

    int extent(int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
    double length(int axis) const { return h * (extent(axis) - 1); }
    double diameter() const {
        const double lx = length(0), ly = length(1), lz = length(2);
        return std::sqrt(lx * lx + ly * ly + lz * lz);
    }
    double volume() const { return length(0) * length(1) * length(2); }
    double surface_area() const {
        const double lx = length(0), ly = length(1), lz = length(2);
        return 2.0 * (lx * ly + ly * lz + lz * lx);
    }

    bool is_boundary(int i, int j, int k) const {
        return i == 0 || i == nx - 1 || j == 0 || j == ny - 1 || k == 0 || k == nz - 1;
    }

    /// Exit side of a node along `axis`: -1 at the low face, +1 at the high
    /// face, 0 in the interior of that axis.
    int exit_side(int i, int j, int k, int axis) const {
        const int c = axis == 0 ? i : (axis == 1 ? j : k);
        if (c == 0) return -1;
        if (c == extent(axis) - 1) return +1;
        return 0;
    }

    /// Outward normal assigned to a boundary node. Edge and corner nodes are
    /// ambiguous on a box; the convention here is the face of lowest axis
    /// index ("dominant face"), applied consistently everywhere.
    std::array<int, 2> dominant_normal(int i, int j, int k) const {
        for (int axis = 0; axis < 3; ++axis) {
            const int s = exit_side(i, j, k, axis);
            if (s != 0) return {axis, s};
        }
        throw std::logic_error("dominant_normal: interior node");
    }

    /// Number of box faces a node lies on (0 for interior, up to 3 at a
    /// corner). The surface quadrature weight of a boundary node is h^2 per
    /// facet it belongs to.
    int face_multiplicity(int i, int j, int k) const {
        int m = 0;
        for (int axis = 0; axis < 3; ++axis)
            if (exit_side(i, j, k, axis) != 0) ++m;
        return m;
    }
};

}  // namespace fracop
