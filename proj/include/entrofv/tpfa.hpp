#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernels.hpp"
#include "linear_solver.hpp"
#include "mesh.hpp"

namespace entrofv {

using ScalarField = std::function<double(Point)>;

// Two-point scheme for du/dt - div(lambda (grad u + u grad V)) = 0 with
// backward Euler and fluxes F = -tau r(u_K, u_L) D(log u + V).
class TpfaProblem {
public:
    // dirichlet_data may be empty when the mesh has no Dirichlet edge
    TpfaProblem(std::shared_ptr<const PrimalMesh> mesh, const ScalarField& potential, const ScalarField& dirichlet_data,
                MeanKind mean, double dt, Tensor2 lambda = {})
        : mesh_(std::move(mesh)), mean_(mean), dt_(dt) {
        if (!mesh_) throw std::invalid_argument("null mesh");
        if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
        if (!lambda.is_scalar() || !(lambda.xx > 0))
            throw std::invalid_argument("two-point fluxes need an isotropic diffusion tensor; use the DDFV scheme");
        lambda_ = lambda.xx;
        const auto& m = *mesh_;
        v_cell_.resize(m.num_cells());
        for (std::size_t k = 0; k < m.num_cells(); ++k) v_cell_[k] = potential(m.cell(k).center);
        v_edge_.assign(m.num_edges(), 0.0);
        u_dir_.assign(m.num_edges(), 0.0);
        bool first = true;
        double amin = 0, amax = 0;
        for (std::size_t e = 0; e < m.num_edges(); ++e) {
            const Edge& ed = m.edge(e);
            if (ed.kind != EdgeKind::Dirichlet) continue;
            if (!dirichlet_data) throw std::invalid_argument("mesh has Dirichlet edges but no boundary data");
            v_edge_[e] = potential(ed.midpoint);
            u_dir_[e] = dirichlet_data(ed.midpoint);
            if (!(u_dir_[e] > 0)) throw std::invalid_argument("Dirichlet data must be positive");
            double a = std::log(u_dir_[e]) + v_edge_[e];
            if (first) amin = amax = a, first = false;
            amin = std::min(amin, a);
            amax = std::max(amax, a);
        }
        has_dirichlet_ = !first;
        if (has_dirichlet_ && amax - amin > 1e-10)
            throw std::invalid_argument("Dirichlet data is not at thermal equilibrium: log u + V varies by " +
                                        std::to_string(amax - amin));
        alpha_ = 0.5 * (amin + amax);
        build_pattern();
    }

    const PrimalMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const PrimalMesh> mesh_ptr() const { return mesh_; }
    MeanKind mean_kind() const { return mean_; }
    double dt() const { return dt_; }
    double diffusion() const { return lambda_; }
    bool has_dirichlet() const { return has_dirichlet_; }
    double alpha() const { return alpha_; }
    double potential_cell(std::size_t k) const { return v_cell_[k]; }
    double potential_edge(std::size_t e) const { return v_edge_[e]; }
    double dirichlet_value(std::size_t e) const { return u_dir_[e]; }
    std::size_t size() const { return mesh_->num_cells(); }
    // residual l1 norm equals the norm of dt^-1 M (Phi(u) - u_old)
    double stopping_scale() const { return 1.0; }

    // cell averages of u0
    Vector initial_state(const ScalarField& u0, Quadrature q = Quadrature::Centroid) const {
        Vector u(size());
        for (std::size_t k = 0; k < size(); ++k) {
            auto poly = mesh_->cell_polygon(k);
            u[k] = polygon_average(poly, u0, q);
        }
        return u;
    }

    double mass(const Vector& u) const {
        double s = 0.0;
        for (std::size_t k = 0; k < size(); ++k) s += mesh_->cell(k).area * u[k];
        return s;
    }

    Vector cell_measures() const {
        Vector m(size());
        for (std::size_t k = 0; k < size(); ++k) m[k] = mesh_->cell(k).area;
        return m;
    }

    // rho exp(-V_K), rho from the mass of u0 (pure Neumann) or from the boundary data
    Vector steady_state(double initial_mass) const {
        double rho;
        if (has_dirichlet_) {
            rho = std::exp(alpha_);
        } else {
            if (!(initial_mass > 0)) throw std::invalid_argument("steady state needs a positive initial mass");
            double z = 0.0;
            for (std::size_t k = 0; k < size(); ++k) z += mesh_->cell(k).area * std::exp(-v_cell_[k]);
            rho = initial_mass / z;
        }
        Vector u(size());
        for (std::size_t k = 0; k < size(); ++k) u[k] = rho * std::exp(-v_cell_[k]);
        return u;
    }

    double neighbor_value(const Vector& u, std::size_t k, std::size_t e) const {
        const Edge& ed = mesh_->edge(e);
        switch (ed.kind) {
            case EdgeKind::Interior: return u[static_cast<Eigen::Index>(ed.other(k))];
            case EdgeKind::Dirichlet: return u_dir_[e];
            case EdgeKind::Neumann: return u[static_cast<Eigen::Index>(k)];
        }
        return 0.0;
    }

    // F_{K,sigma}
    double flux(const Vector& u, std::size_t k, std::size_t e) const {
        const Edge& ed = mesh_->edge(e);
        if (ed.kind == EdgeKind::Neumann) return 0.0;
        double f = edge_flux(u, e);
        return ed.cells[0] == k ? f : -f;
    }

    Vector residual(const Vector& u, const Vector& u_old) const {
        check_positive(u);
        const auto& m = *mesh_;
        Vector r(size());
        for (std::size_t k = 0; k < size(); ++k) r[k] = m.cell(k).area * (u[k] - u_old[k]) / dt_;
        for (std::size_t e = 0; e < m.num_edges(); ++e) {
            const Edge& ed = m.edge(e);
            if (ed.kind == EdgeKind::Neumann) continue;
            double f = edge_flux(u, e);
            r[idx(ed.cells[0])] += f;
            if (ed.kind == EdgeKind::Interior) r[idx(ed.cells[1])] -= f;
        }
        return r;
    }

    SparseMatrix jacobian(const Vector& u) const {
        check_positive(u);
        const auto& m = *mesh_;
        SparseMatrix j = pattern_.zero_matrix();
        double* val = j.valuePtr();
        for (std::size_t k = 0; k < size(); ++k) val[diag_slot_[k]] += m.cell(k).area / dt_;
        for (std::size_t e = 0; e < m.num_edges(); ++e) {
            const Edge& ed = m.edge(e);
            if (ed.kind == EdgeKind::Neumann) continue;
            const std::size_t k = ed.cells[0];
            const double uk = u[idx(k)];
            const double un = neighbor_value(u, k, e);
            const double vn = ed.kind == EdgeKind::Interior ? v_cell_[ed.cells[1]] : v_edge_[e];
            const double dg = (std::log(un) + vn) - (std::log(uk) + v_cell_[k]);
            const auto r = mean_with_derivatives(mean_, uk, un);
            const double t = lambda_ * ed.transmissibility;
            const double dfk = -t * (r.dx * dg - r.value / uk);
            const double dfn = -t * (r.dy * dg + r.value / un);
            const auto& s = edge_slots_[e];
            val[s[0]] += dfk;
            if (ed.kind == EdgeKind::Interior) {
                val[s[1]] += dfn;
                val[s[2]] -= dfk;
                val[s[3]] -= dfn;
            }
        }
        return j;
    }

private:
    static Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

    static void check_positive(const Vector& u) {
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (!(u[i] > 0)) throw std::domain_error("state must be positive, entry " + std::to_string(i));
    }

    // flux out of cells[0]
    double edge_flux(const Vector& u, std::size_t e) const {
        const Edge& ed = mesh_->edge(e);
        const std::size_t k = ed.cells[0];
        const double uk = u[idx(k)];
        const double un = neighbor_value(u, k, e);
        const double vn = ed.kind == EdgeKind::Interior ? v_cell_[ed.cells[1]] : v_edge_[e];
        const double dg = (std::log(un) + vn) - (std::log(uk) + v_cell_[k]);
        return -lambda_ * ed.transmissibility * mean(mean_, uk, un) * dg;
    }

    void build_pattern() {
        const auto& m = *mesh_;
        std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
        for (const auto& ed : m.edges())
            if (ed.kind == EdgeKind::Interior) {
                entries.emplace_back(idx(ed.cells[0]), idx(ed.cells[1]));
                entries.emplace_back(idx(ed.cells[1]), idx(ed.cells[0]));
            }
        pattern_ = SparsePattern(idx(size()), entries);
        diag_slot_.resize(size());
        for (std::size_t k = 0; k < size(); ++k) diag_slot_[k] = pattern_.slot(idx(k), idx(k));
        edge_slots_.assign(m.num_edges(), {0, 0, 0, 0});
        for (std::size_t e = 0; e < m.num_edges(); ++e) {
            const Edge& ed = m.edge(e);
            if (ed.kind == EdgeKind::Neumann) continue;
            auto k = idx(ed.cells[0]);
            auto& s = edge_slots_[e];
            s[0] = pattern_.slot(k, k);
            if (ed.kind == EdgeKind::Interior) {
                auto l = idx(ed.cells[1]);
                s[1] = pattern_.slot(k, l);
                s[2] = pattern_.slot(l, k);
                s[3] = pattern_.slot(l, l);
            }
        }
    }

    std::shared_ptr<const PrimalMesh> mesh_;
    MeanKind mean_;
    double dt_;
    double lambda_ = 1.0;
    std::vector<double> v_cell_, v_edge_, u_dir_;
    bool has_dirichlet_ = false;
    double alpha_ = 0.0;
    SparsePattern pattern_;
    std::vector<Eigen::Index> diag_slot_;
    std::vector<std::array<Eigen::Index, 4>> edge_slots_;
};

}  // namespace entrofv
