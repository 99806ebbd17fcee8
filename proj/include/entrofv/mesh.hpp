#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "geometry.hpp"

namespace entrofv {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EdgeKind { Interior, Dirichlet, Neumann };

inline const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Interior: return "interior";
        case EdgeKind::Dirichlet: return "dirichlet";
        case EdgeKind::Neumann: return "neumann";
    }
    return "?";
}

struct Cell {
    std::vector<std::size_t> vertices;  // counterclockwise
    Point center;
    double area = 0.0;
    double diameter = 0.0;
    std::vector<std::size_t> edges;  // edges[i] joins vertices[i], vertices[i+1]
};

struct Edge {
    // cells[0] lies to the left of vertices[0] -> vertices[1]
    std::array<std::size_t, 2> vertices{npos, npos};
    std::array<std::size_t, 2> cells{npos, npos};
    EdgeKind kind = EdgeKind::Interior;
    Point midpoint;
    double length = 0.0;
    double distance = 0.0;
    double transmissibility = 0.0;

    bool boundary() const { return cells[1] == npos; }
    std::size_t other(std::size_t k) const { return cells[0] == k ? cells[1] : cells[0]; }
};

// Tag for a boundary edge given its endpoints and midpoint.
using BoundaryTagger = std::function<EdgeKind(std::size_t, std::size_t, Point)>;

inline BoundaryTagger tag_by_midpoint(std::function<EdgeKind(Point)> pred) {
    return [pred = std::move(pred)](std::size_t, std::size_t, Point m) { return pred(m); };
}

inline BoundaryTagger all_neumann() {
    return [](std::size_t, std::size_t, Point) { return EdgeKind::Neumann; };
}

struct RegularityReport {
    double zeta = 0.0;
    double size = 0.0;
    bool orthogonal = false;
    double max_orthogonality_defect = 0.0;  // max |(x_L - x_K).t| / d
    std::size_t n_vertices = 0, n_cells = 0, n_edges = 0;
    std::size_t n_interior = 0, n_dirichlet = 0, n_neumann = 0;
};

class PrimalMesh {
public:
    static constexpr double orthogonality_tol = 1e-9;

    PrimalMesh() = default;

    // centers[k] empty means vertex centroid
    static PrimalMesh build(std::vector<Point> vertices, std::vector<std::vector<std::size_t>> cells,
                            std::vector<std::optional<Point>> centers = {},
                            const BoundaryTagger& tagger = all_neumann());

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Point& vertex(std::size_t i) const { return vertices_[i]; }
    const Cell& cell(std::size_t k) const { return cells_[k]; }
    const Edge& edge(std::size_t e) const { return edges_[e]; }
    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    std::vector<Point> cell_polygon(std::size_t k) const {
        std::vector<Point> p;
        p.reserve(cells_[k].vertices.size());
        for (auto v : cells_[k].vertices) p.push_back(vertices_[v]);
        return p;
    }

    double total_area() const {
        double a = 0.0;
        for (const auto& c : cells_) a += c.area;
        return a;
    }

    bool has_dirichlet() const {
        for (const auto& e : edges_)
            if (e.kind == EdgeKind::Dirichlet) return true;
        return false;
    }

    double zeta() const { return report_.zeta; }
    double size() const { return report_.size; }
    bool orthogonal() const { return report_.orthogonal; }
    const RegularityReport& report() const { return report_; }

private:
    std::vector<Point> vertices_;
    std::vector<Cell> cells_;
    std::vector<Edge> edges_;
    RegularityReport report_;
};

inline RegularityReport regularity_report(const PrimalMesh& m) { return m.report(); }

inline PrimalMesh PrimalMesh::build(std::vector<Point> vertices, std::vector<std::vector<std::size_t>> cells,
                                    std::vector<std::optional<Point>> centers, const BoundaryTagger& tagger) {
    PrimalMesh m;
    m.vertices_ = std::move(vertices);
    const std::size_t nv = m.vertices_.size();
    for (std::size_t i = 0; i < nv; ++i)
        if (!std::isfinite(m.vertices_[i].x) || !std::isfinite(m.vertices_[i].y))
            throw MeshError("vertex " + std::to_string(i) + " has non-finite coordinates");
    if (!centers.empty() && centers.size() != cells.size()) throw MeshError("center list does not match cell count");

    std::unordered_map<std::uint64_t, std::size_t> edge_of;
    auto key = [nv](std::size_t a, std::size_t b) { return static_cast<std::uint64_t>(a) * nv + b; };

    m.cells_.resize(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        auto& ids = cells[k];
        const std::string name = "cell " + std::to_string(k);
        if (ids.size() < 3) throw MeshError(name + " has fewer than 3 vertices");
        for (auto v : ids)
            if (v >= nv) throw MeshError(name + " references missing vertex " + std::to_string(v));
        std::vector<Point> poly;
        for (auto v : ids) poly.push_back(m.vertices_[v]);
        double a = signed_area(poly);
        if (!(std::abs(a) > 0.0)) throw MeshError(name + " has zero area");
        if (a < 0) {
            std::reverse(ids.begin(), ids.end());
            std::reverse(poly.begin(), poly.end());
            a = -a;
        }
        Cell& c = m.cells_[k];
        c.vertices = ids;
        c.area = a;
        c.diameter = polygon_diameter(poly);
        c.center = (!centers.empty() && centers[k]) ? *centers[k] : vertex_average(poly);
        if (!point_in_polygon(c.center, poly, 1e-12 * c.diameter))
            throw MeshError(name + " center lies outside the cell");

        const std::size_t n = ids.size();
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t a0 = ids[i], a1 = ids[(i + 1) % n];
            if (a0 == a1) throw MeshError(name + " has a repeated vertex");
            auto it = edge_of.find(key(a1, a0));
            if (it != edge_of.end()) {
                Edge& e = m.edges_[it->second];
                if (e.cells[1] != npos)
                    throw MeshError("edge " + std::to_string(a0) + "-" + std::to_string(a1) + " shared by more than two cells");
                e.cells[1] = k;
                c.edges.push_back(it->second);
                continue;
            }
            if (edge_of.count(key(a0, a1)))
                throw MeshError(name + " overlaps a neighbour with the same orientation along edge " +
                                std::to_string(a0) + "-" + std::to_string(a1));
            Edge e;
            e.vertices = {a0, a1};
            e.cells = {k, npos};
            edge_of.emplace(key(a0, a1), m.edges_.size());
            c.edges.push_back(m.edges_.size());
            m.edges_.push_back(e);
        }
    }

    auto& rep = m.report_;
    rep.zeta = std::numeric_limits<double>::infinity();
    rep.orthogonal = true;
    double boundary_area = 0.0;
    for (std::size_t id = 0; id < m.edges_.size(); ++id) {
        Edge& e = m.edges_[id];
        Point a = m.vertices_[e.vertices[0]], b = m.vertices_[e.vertices[1]];
        e.midpoint = midpoint(a, b);
        e.length = distance(a, b);
        const Point xk = m.cells_[e.cells[0]].center;
        const std::string name = "edge " + std::to_string(e.vertices[0]) + "-" + std::to_string(e.vertices[1]);
        if (e.boundary()) {
            e.kind = tagger(e.vertices[0], e.vertices[1], e.midpoint);
            if (e.kind == EdgeKind::Interior) throw MeshError(name + " is on the boundary but tagged interior");
            e.distance = distance_to_line(xk, a, b);
            boundary_area += 0.5 * cross(a, b);
            ++(e.kind == EdgeKind::Dirichlet ? rep.n_dirichlet : rep.n_neumann);
        } else {
            const Point xl = m.cells_[e.cells[1]].center;
            e.kind = EdgeKind::Interior;
            e.distance = distance(xk, xl);
            double sk = cross(b - a, xk - a), sl = cross(b - a, xl - a);
            if (!(sk > 0 && sl < 0)) throw MeshError(name + " does not separate its cell centers");
            double defect = std::abs(dot(xl - xk, b - a)) / (e.length * e.distance);
            rep.max_orthogonality_defect = std::max(rep.max_orthogonality_defect, defect);
            if (defect > orthogonality_tol) rep.orthogonal = false;
            ++rep.n_interior;
        }
        if (!(e.distance > 0)) throw MeshError(name + " has zero center distance");
        e.transmissibility = e.length / e.distance;
    }

    for (std::size_t k = 0; k < m.cells_.size(); ++k) {
        const Cell& c = m.cells_[k];
        for (auto id : c.edges) {
            const Edge& e = m.edges_[id];
            double dk = distance_to_line(c.center, m.vertices_[e.vertices[0]], m.vertices_[e.vertices[1]]);
            if (!(dk > 0)) throw MeshError("cell " + std::to_string(k) + " center lies on one of its edges");
            rep.zeta = std::min(rep.zeta, dk / e.distance);
        }
        rep.size = std::max(rep.size, c.diameter);
    }

    double area = m.total_area();
    if (std::abs(boundary_area - area) > 1e-10 * area) throw MeshError("cells overlap or leave gaps inside the boundary");

    rep.n_vertices = nv;
    rep.n_cells = m.cells_.size();
    rep.n_edges = m.edges_.size();
    return m;
}

}  // namespace entrofv
