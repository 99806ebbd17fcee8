#pragma once

#include <cmath>
#include <numbers>

#include "mesh.hpp"

namespace entrofv {

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

inline PrimalMesh generate_cartesian(int nx, int ny, Rect r = {}, const BoundaryTagger& tagger = all_neumann()) {
    if (nx < 1 || ny < 1) throw MeshError("cartesian mesh needs positive cell counts");
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw MeshError("degenerate rectangle");
    std::vector<Point> v;
    v.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            v.push_back({r.x0 + (r.x1 - r.x0) * i / nx, r.y0 + (r.y1 - r.y0) * j / ny});
    auto id = [nx](int i, int j) { return static_cast<std::size_t>(j * (nx + 1) + i); };
    std::vector<std::vector<std::size_t>> cells;
    std::vector<std::optional<Point>> centers;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            centers.push_back(midpoint(v[id(i, j)], v[id(i + 1, j + 1)]));
        }
    return PrimalMesh::build(std::move(v), std::move(cells), std::move(centers), tagger);
}

// Acute triangulation of [0,1]^2. The square is tiled by 4*2^level columns of
// w x 2w blocks, each split into 8 acute triangles (largest angle 75 deg);
// the longest edge is w, so size = 0.25 / 2^level.
inline PrimalMesh generate_triangular(int level, const BoundaryTagger& tagger = all_neumann()) {
    if (level < 0) throw MeshError("refinement level must be nonnegative");
    const int nx = 4 << level;
    const int ny = nx / 2;
    const double w = 1.0 / nx;
    const double c = 0.5 * std::numbers::sqrt3 * w;

    // corners on a (nx+1) x (2ny+1) lattice with side midpoints at odd rows
    std::vector<Point> v;
    auto lat = [&](int i, int j) { return static_cast<std::size_t>(j * (nx + 1) + i); };
    for (int j = 0; j <= 2 * ny; ++j)
        for (int i = 0; i <= nx; ++i) v.push_back({i * w, j * w});
    for (auto& p : v) {
        if (p.x > 1.0) p.x = 1.0;
        if (p.y > 1.0) p.y = 1.0;
    }
    const std::size_t base = v.size();
    auto inner = [&](int i, int j, int which) { return base + 2 * static_cast<std::size_t>(j * nx + i) + which; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double xm = (i + 0.5) * w, y0 = 2 * j * w;
            v.push_back({xm, y0 + c});
            v.push_back({xm, y0 + 2 * w - c});
        }

    std::vector<std::vector<std::size_t>> cells;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            std::size_t bl = lat(i, 2 * j), br = lat(i + 1, 2 * j);
            std::size_t ml = lat(i, 2 * j + 1), mr = lat(i + 1, 2 * j + 1);
            std::size_t tl = lat(i, 2 * j + 2), tr = lat(i + 1, 2 * j + 2);
            std::size_t p1 = inner(i, j, 0), p2 = inner(i, j, 1);
            cells.push_back({bl, br, p1});
            cells.push_back({tl, p2, tr});
            cells.push_back({bl, p1, ml});
            cells.push_back({br, mr, p1});
            cells.push_back({tl, ml, p2});
            cells.push_back({tr, p2, mr});
            cells.push_back({ml, p1, p2});
            cells.push_back({mr, p2, p1});
        }
    std::vector<std::optional<Point>> centers;
    for (const auto& t : cells) centers.push_back(circumcenter(v[t[0]], v[t[1]], v[t[2]]));
    return PrimalMesh::build(std::move(v), std::move(cells), std::move(centers), tagger);
}

// Cartesian n x n grid mapped by x + g(x) (1,1) with
// g = (a / (2 pi)) sin(2 pi x) sin(2 pi y); the map is the identity on the
// boundary and its Jacobian determinant is at least 1 - 2a.
inline PrimalMesh generate_distorted_quad(int n, double amplitude, const BoundaryTagger& tagger = all_neumann()) {
    if (n < 2) throw MeshError("distorted mesh needs n >= 2");
    if (!(amplitude >= 0.0) || amplitude >= 0.5) throw MeshError("distortion amplitude must lie in [0, 0.5)");
    std::vector<Point> v;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            double x = static_cast<double>(i) / n, y = static_cast<double>(j) / n;
            double g = 0.0;
            if (i > 0 && i < n && j > 0 && j < n) g = amplitude / two_pi * std::sin(two_pi * x) * std::sin(two_pi * y);
            v.push_back({x + g, y + g});
        }
    auto id = [n](int i, int j) { return static_cast<std::size_t>(j * (n + 1) + i); };
    std::vector<std::vector<std::size_t>> cells;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    return PrimalMesh::build(std::move(v), std::move(cells), {}, tagger);
}

}  // namespace entrofv
