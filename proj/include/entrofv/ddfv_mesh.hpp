#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "linear_solver.hpp"
#include "mesh.hpp"

namespace entrofv {

using TensorField = std::function<Tensor2(Point)>;

inline TensorField constant_tensor(Tensor2 t) {
    return [t](Point) { return t; };
}

struct DualCell {
    std::size_t vertex = npos;
    bool boundary = false;
    double area = 0.0;
    Point center;
    std::vector<std::size_t> diamonds;
};

struct Diamond {
    std::size_t edge = npos;
    bool boundary = false;
    // unknown indices (see DdfvMesh)
    std::size_t k = npos, l = npos, ks = npos, ls = npos;
    Point xk, xl, xks, xls;
    double m_sigma = 0.0, m_sigma_star = 0.0;
    double sin_alpha = 0.0;
    double area = 0.0;
    double diameter = 0.0;
    Point n_sigma_k;        // normal to sigma, pointing from K to L
    Point n_sigma_star_ks;  // normal to sigma*, pointing from K* to L*
    Point tau_ks_ls, tau_k_l;
    Point center;
    Tensor2 lambda;
    double a_ss = 0.0, a_sd = 0.0, a_dd = 0.0;
    double area_k = 0.0, area_l = 0.0, area_ks = 0.0, area_ls = 0.0;
    double theta = 0.0, theta_tilde = 0.0;

    std::array<double, 2> apply_a(double w1, double w2) const { return {a_ss * w1 + a_sd * w2, a_sd * w1 + a_dd * w2}; }
    double form_a(double v1, double v2, double w1, double w2) const {
        auto aw = apply_a(w1, w2);
        return v1 * aw[0] + v2 * aw[1];
    }
    // diagonal bound B with w.Aw <= w.Bw
    std::array<double, 2> b_diagonal() const {
        return {std::abs(a_ss) + std::abs(a_sd), std::abs(a_dd) + std::abs(a_sd)};
    }
};

inline std::array<double, 2> b_matrix(const Diamond& d) { return d.b_diagonal(); }

// Unknown layout: [interior cells | boundary edges | vertices].
class DdfvMesh {
public:
    static DdfvMesh build(PrimalMesh primal, const TensorField& lambda = constant_tensor({}));

    const PrimalMesh& primal() const { return primal_; }
    const std::vector<DualCell>& dual_cells() const { return dual_; }
    const std::vector<Diamond>& diamonds() const { return diamonds_; }
    const Diamond& diamond(std::size_t d) const { return diamonds_[d]; }
    double theta_bound() const { return theta_bound_; }

    std::size_t num_primal() const { return primal_.num_cells(); }
    std::size_t num_boundary() const { return boundary_edges_.size(); }
    std::size_t num_dual() const { return dual_.size(); }
    std::size_t num_unknowns() const { return num_primal() + num_boundary() + num_dual(); }

    std::size_t primal_index(std::size_t cell) const { return cell; }
    std::size_t boundary_index(std::size_t edge) const { return boundary_slot_[edge]; }
    std::size_t dual_index(std::size_t vertex) const { return num_primal() + num_boundary() + vertex; }
    bool is_primal(std::size_t i) const { return i < num_primal(); }
    bool is_boundary(std::size_t i) const { return i >= num_primal() && i < num_primal() + num_boundary(); }
    bool is_dual(std::size_t i) const { return i >= num_primal() + num_boundary(); }
    std::size_t boundary_edge(std::size_t i) const { return boundary_edges_[i - num_primal()]; }

    // m_K, m_K*, and zero for boundary edges
    const Vector& measures() const { return measure_; }
    // x_K, x_sigma, x_K*
    const std::vector<Point>& centers() const { return centers_; }

    template <class F>
    double dual_average(std::size_t vertex, F&& f, Quadrature q = Quadrature::Centroid) const {
        const DualCell& c = dual_[vertex];
        double acc = 0.0, area = 0.0;
        Point g;
        for (auto did : c.diamonds) {
            const Diamond& d = diamonds_[did];
            Point a = c.center, b = d.xk, e = d.xl;
            double t = std::abs(triangle_area(a, b, e));
            area += t;
            if (q == Quadrature::Centroid) g += t * (a + b + e) / 3.0;
            else acc += t * (f(midpoint(a, b)) + f(midpoint(b, e)) + f(midpoint(e, a))) / 3.0;
        }
        return q == Quadrature::Centroid ? f(g / area) : acc / area;
    }

private:
    PrimalMesh primal_;
    std::vector<DualCell> dual_;
    std::vector<Diamond> diamonds_;
    std::vector<std::size_t> boundary_edges_;
    std::vector<std::size_t> boundary_slot_;
    Vector measure_;
    std::vector<Point> centers_;
    double theta_bound_ = 1.0;
};

inline DdfvMesh DdfvMesh::build(PrimalMesh primal, const TensorField& lambda) {
    DdfvMesh m;
    m.primal_ = std::move(primal);
    const auto& p = m.primal_;
    m.boundary_slot_.assign(p.num_edges(), npos);
    for (std::size_t e = 0; e < p.num_edges(); ++e)
        if (p.edge(e).boundary()) {
            m.boundary_slot_[e] = p.num_cells() + m.boundary_edges_.size();
            m.boundary_edges_.push_back(e);
        }
    m.dual_.resize(p.num_vertices());
    for (std::size_t v = 0; v < p.num_vertices(); ++v) {
        m.dual_[v].vertex = v;
        m.dual_[v].center = p.vertex(v);
    }

    m.diamonds_.resize(p.num_edges());
    for (std::size_t e = 0; e < p.num_edges(); ++e) {
        const Edge& ed = p.edge(e);
        Diamond& d = m.diamonds_[e];
        const std::string name = "diamond of edge " + std::to_string(ed.vertices[0]) + "-" + std::to_string(ed.vertices[1]);
        d.edge = e;
        d.boundary = ed.boundary();
        d.k = ed.cells[0];
        d.l = d.boundary ? m.boundary_slot_[e] : ed.cells[1];
        d.ks = m.dual_index(ed.vertices[0]);
        d.ls = m.dual_index(ed.vertices[1]);
        d.xk = p.cell(ed.cells[0]).center;
        d.xl = d.boundary ? ed.midpoint : p.cell(ed.cells[1]).center;
        d.xks = p.vertex(ed.vertices[0]);
        d.xls = p.vertex(ed.vertices[1]);
        if (d.boundary) m.dual_[ed.vertices[0]].boundary = m.dual_[ed.vertices[1]].boundary = true;

        const Point pk = d.xl - d.xk;   // sigma*
        const Point qs = d.xls - d.xks;  // sigma
        d.m_sigma = norm(qs);
        d.m_sigma_star = norm(pk);
        const double c = cross(pk, qs);
        if (!(std::abs(c) > 0)) throw MeshError(name + " is degenerate");
        d.area = 0.5 * std::abs(c);
        d.sin_alpha = std::abs(c) / (d.m_sigma * d.m_sigma_star);
        d.tau_ks_ls = qs / d.m_sigma;
        d.tau_k_l = pk / d.m_sigma_star;
        d.n_sigma_k = perp(d.tau_ks_ls);
        if (dot(d.n_sigma_k, pk) < 0) d.n_sigma_k = -d.n_sigma_k;
        d.n_sigma_star_ks = perp(d.tau_k_l);
        if (dot(d.n_sigma_star_ks, qs) < 0) d.n_sigma_star_ks = -d.n_sigma_star_ks;
        d.diameter = std::max({distance(d.xk, d.xl), distance(d.xks, d.xls), distance(d.xk, d.xks),
                               distance(d.xk, d.xls), distance(d.xl, d.xks), distance(d.xl, d.xls)});

        // the two dual halves must lie on opposite sides of sigma*
        const double s1 = cross(pk, d.xks - d.xk), s2 = cross(pk, d.xls - d.xk);
        if (!(s1 * s2 < 0)) throw MeshError(name + " folds over: inverted dual cell");
        d.area_ks = 0.5 * std::abs(s1);
        d.area_ls = 0.5 * std::abs(s2);

        std::vector<Point> quad{d.xk, d.xks, d.xl, d.xls};
        auto clipped_area = [&](std::size_t cell) {
            auto poly = p.cell_polygon(cell);
            if (is_convex(poly)) return std::abs(signed_area(clip_polygon(quad, poly)));
            // star-shaped fallback: the triangle seen from the center
            return std::abs(triangle_area(p.cell(cell).center, d.xks, d.xls));
        };
        d.area_k = clipped_area(ed.cells[0]);
        d.area_l = d.boundary ? 0.0 : clipped_area(ed.cells[1]);

        d.theta = (d.m_sigma / d.m_sigma_star + d.m_sigma_star / d.m_sigma) / (2.0 * d.sin_alpha);
        d.theta_tilde = 1.0;
        for (double part : {d.area_k, d.area_l, d.area_ks, d.area_ls})
            if (part > 0) d.theta_tilde = std::max(d.theta_tilde, d.area / part);

        // diagonals intersect at x_D; centroid if they do not cross inside
        const double den = cross(pk, qs);
        const double tk = cross(d.xks - d.xk, qs) / den;
        const double ts = cross(d.xks - d.xk, pk) / den;
        if (tk >= 0 && tk <= 1 && ts >= 0 && ts <= 1) d.center = d.xk + tk * pk;
        else d.center = polygon_centroid(quad);

        d.lambda = lambda(d.center);
        const double w = 1.0 / (4.0 * d.area);
        d.a_ss = d.m_sigma * d.m_sigma * d.lambda.form(d.n_sigma_k, d.n_sigma_k) * w;
        d.a_sd = d.m_sigma * d.m_sigma_star * d.lambda.form(d.n_sigma_k, d.n_sigma_star_ks) * w;
        d.a_dd = d.m_sigma_star * d.m_sigma_star * d.lambda.form(d.n_sigma_star_ks, d.n_sigma_star_ks) * w;
        m.theta_bound_ = std::max({m.theta_bound_, d.theta, d.theta_tilde});

        m.dual_[ed.vertices[0]].diamonds.push_back(e);
        m.dual_[ed.vertices[1]].diamonds.push_back(e);
        m.dual_[ed.vertices[0]].area += d.area_ks;
        m.dual_[ed.vertices[1]].area += d.area_ls;
    }
    for (const auto& c : m.dual_)
        if (!(c.area > 0)) throw MeshError("vertex " + std::to_string(c.vertex) + " has an empty dual cell");

    const std::size_t n = m.num_unknowns();
    m.measure_ = Vector::Zero(static_cast<Eigen::Index>(n));
    m.centers_.resize(n);
    for (std::size_t k = 0; k < p.num_cells(); ++k) {
        m.measure_[static_cast<Eigen::Index>(k)] = p.cell(k).area;
        m.centers_[k] = p.cell(k).center;
    }
    for (auto e : m.boundary_edges_) m.centers_[m.boundary_slot_[e]] = p.edge(e).midpoint;
    for (std::size_t v = 0; v < m.dual_.size(); ++v) {
        m.measure_[static_cast<Eigen::Index>(m.dual_index(v))] = m.dual_[v].area;
        m.centers_[m.dual_index(v)] = m.dual_[v].center;
    }
    return m;
}

inline std::array<double, 2> delta(const DdfvMesh& m, const Vector& u, std::size_t d) {
    const Diamond& dm = m.diamond(d);
    auto at = [&](std::size_t i) { return u[static_cast<Eigen::Index>(i)]; };
    return {at(dm.k) - at(dm.l), at(dm.ks) - at(dm.ls)};
}

inline Point discrete_gradient(const DdfvMesh& m, const Vector& u, std::size_t d) {
    const Diamond& dm = m.diamond(d);
    auto dl = delta(m, u, d);
    return -(dm.m_sigma * dl[0] * dm.n_sigma_k + dm.m_sigma_star * dl[1] * dm.n_sigma_star_ks) / (2.0 * dm.area);
}

}  // namespace entrofv
