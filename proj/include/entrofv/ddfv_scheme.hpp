#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ddfv_mesh.hpp"
#include "kernels.hpp"
#include "tpfa.hpp"

namespace entrofv {

enum class Combiner { Max, Arithmetic };

inline const char* to_string(Combiner c) { return c == Combiner::Max ? "max" : "arithmetic"; }

inline Combiner parse_combiner(std::string_view s) {
    if (s == "max") return Combiner::Max;
    if (s == "arithmetic" || s == "mean") return Combiner::Arithmetic;
    throw std::invalid_argument("unknown combiner '" + std::string(s) + "'");
}

// Nonlinear DDFV scheme with homogeneous Neumann conditions, no stabilization.
// Residual rows: 1/2 m (u - u_old)/dt + T(u; log u + V, 1_i), boundary rows without time term.
class DdfvProblem {
public:
    DdfvProblem(std::shared_ptr<const DdfvMesh> mesh, const ScalarField& potential, MeanKind mean, Combiner combiner,
                double dt)
        : mesh_(std::move(mesh)), mean_(mean), combiner_(combiner), dt_(dt) {
        if (!mesh_) throw std::invalid_argument("null mesh");
        if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
        if (mesh_->primal().has_dirichlet())
            throw std::invalid_argument("the DDFV scheme is implemented for Neumann boundaries only");
        const std::size_t n = size();
        v_ = Vector(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) v_[idx(i)] = potential(mesh_->centers()[i]);
        half_m_ = 0.5 * mesh_->measures();
        build_pattern();
    }

    const DdfvMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const DdfvMesh> mesh_ptr() const { return mesh_; }
    MeanKind mean_kind() const { return mean_; }
    Combiner combiner() const { return combiner_; }
    double dt() const { return dt_; }
    std::size_t size() const { return mesh_->num_unknowns(); }
    const Vector& potential() const { return v_; }
    // weights of the duality product: m_K/2, m_K*/2, zero on boundary edges
    const Vector& product_weights() const { return half_m_; }
    // rows carry half the measure, so the stopping norm doubles the residual
    double stopping_scale() const { return 2.0; }

    // primal and dual cell averages; boundary unknowns start at zero
    Vector initial_state(const ScalarField& u0, Quadrature q = Quadrature::Centroid) const {
        const auto& m = *mesh_;
        Vector u = Vector::Zero(idx(size()));
        for (std::size_t k = 0; k < m.num_primal(); ++k) {
            auto poly = m.primal().cell_polygon(k);
            u[idx(k)] = polygon_average(poly, u0, q);
        }
        for (std::size_t v = 0; v < m.num_dual(); ++v) u[idx(m.dual_index(v))] = m.dual_average(v, u0, q);
        return u;
    }

    double primal_mass(const Vector& u) const {
        double s = 0.0;
        for (std::size_t k = 0; k < mesh_->num_primal(); ++k) s += mesh_->measures()[idx(k)] * u[idx(k)];
        return s;
    }
    double dual_mass(const Vector& u) const {
        double s = 0.0;
        for (std::size_t v = 0; v < mesh_->num_dual(); ++v) {
            auto i = idx(mesh_->dual_index(v));
            s += mesh_->measures()[i] * u[i];
        }
        return s;
    }

    // rho e^{-V} on primal and boundary unknowns, rho* e^{-V} on dual ones
    Vector steady_state(const Vector& u0) const {
        const auto& m = *mesh_;
        double zp = 0.0, zd = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            double w = m.measures()[idx(i)] * std::exp(-v_[idx(i)]);
            (m.is_dual(i) ? zd : zp) += w;
        }
        const double mp = primal_mass(u0), md = dual_mass(u0);
        if (!(mp > 0) || !(md > 0)) throw std::invalid_argument("steady state needs positive primal and dual masses");
        const double rho = mp / zp, rho_star = md / zd;
        Vector u(idx(size()));
        for (std::size_t i = 0; i < size(); ++i) u[idx(i)] = (m.is_dual(i) ? rho_star : rho) * std::exp(-v_[idx(i)]);
        return u;
    }

    double reconstruct_rD(const Vector& u, std::size_t d) const {
        const Diamond& dm = mesh_->diamond(d);
        const double a = mean(mean_, at(u, dm.k), at(u, dm.l));
        const double b = mean(mean_, at(u, dm.ks), at(u, dm.ls));
        return combiner_ == Combiner::Max ? std::max(a, b) : 0.5 * (a + b);
    }

    // sum_D r^D(u) delta g . A delta psi
    double bilinear_T(const Vector& u, const Vector& g, const Vector& psi) const {
        double s = 0.0;
        for (std::size_t d = 0; d < mesh_->diamonds().size(); ++d) {
            const Diamond& dm = mesh_->diamond(d);
            auto dg = delta(*mesh_, g, d);
            auto dp = delta(*mesh_, psi, d);
            // symmetric evaluation so that T(u;g,psi) == T(u;psi,g) exactly
            double q = dm.a_ss * dg[0] * dp[0] + dm.a_dd * dg[1] * dp[1] + dm.a_sd * (dg[0] * dp[1] + dg[1] * dp[0]);
            s += reconstruct_rD(u, d) * q;
        }
        return s;
    }

    Vector chemical_potential(const Vector& u) const {
        Vector g(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) g[i] = std::log(u[i]) + v_[i];
        return g;
    }

    Vector residual(const Vector& u, const Vector& u_old) const {
        check_positive(u);
        Vector r = half_m_.cwiseProduct(u - u_old) / dt_;
        const Vector g = chemical_potential(u);
        for (std::size_t d = 0; d < mesh_->diamonds().size(); ++d) {
            const Diamond& dm = mesh_->diamond(d);
            const double rd = reconstruct_rD(u, d);
            auto w = dm.apply_a(at(g, dm.k) - at(g, dm.l), at(g, dm.ks) - at(g, dm.ls));
            w[0] *= rd;
            w[1] *= rd;
            r[idx(dm.k)] += w[0];
            r[idx(dm.l)] -= w[0];
            r[idx(dm.ks)] += w[1];
            r[idx(dm.ls)] -= w[1];
        }
        return r;
    }

    SparseMatrix jacobian(const Vector& u) const {
        check_positive(u);
        SparseMatrix j = pattern_.zero_matrix();
        double* val = j.valuePtr();
        for (std::size_t i = 0; i < size(); ++i) val[diag_slot_[i]] += half_m_[idx(i)] / dt_;
        const Vector g = chemical_potential(u);
        for (std::size_t d = 0; d < mesh_->diamonds().size(); ++d) {
            const Diamond& dm = mesh_->diamond(d);
            const auto rp = mean_with_derivatives(mean_, at(u, dm.k), at(u, dm.l));
            const auto rq = mean_with_derivatives(mean_, at(u, dm.ks), at(u, dm.ls));
            double rd, fa, fb;
            if (combiner_ == Combiner::Arithmetic) {
                rd = 0.5 * (rp.value + rq.value);
                fa = fb = 0.5;
            } else if (rp.value > rq.value) {
                rd = rp.value, fa = 1.0, fb = 0.0;
            } else if (rq.value > rp.value) {
                rd = rq.value, fa = 0.0, fb = 1.0;
            } else {
                rd = rp.value, fa = fb = 0.5;
            }
            const std::array<double, 4> drd{fa * rp.dx, fa * rp.dy, fb * rq.dx, fb * rq.dy};
            auto w = dm.apply_a(at(g, dm.k) - at(g, dm.l), at(g, dm.ks) - at(g, dm.ls));
            // d(delta g)/du_j
            const std::array<std::array<double, 2>, 4> ddg{{{1.0 / at(u, dm.k), 0.0},
                                                            {-1.0 / at(u, dm.l), 0.0},
                                                            {0.0, 1.0 / at(u, dm.ks)},
                                                            {0.0, -1.0 / at(u, dm.ls)}}};
            const std::array<double, 4> sign{1.0, -1.0, 1.0, -1.0};
            for (int c = 0; c < 4; ++c) {
                auto aw = dm.apply_a(ddg[c][0], ddg[c][1]);
                const double d0 = drd[c] * w[0] + rd * aw[0];
                const double d1 = drd[c] * w[1] + rd * aw[1];
                // rows k,l get +-d0, rows ks,ls get +-d1
                for (int r = 0; r < 4; ++r) val[slots_[d][r * 4 + c]] += sign[r] * (r < 2 ? d0 : d1);
            }
        }
        return j;
    }

private:
    static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
    static double at(const Vector& u, std::size_t i) { return u[static_cast<Eigen::Index>(i)]; }

    static void check_positive(const Vector& u) {
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (!(u[i] > 0)) throw std::domain_error("state must be positive, entry " + std::to_string(i));
    }

    void build_pattern() {
        std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
        for (const auto& dm : mesh_->diamonds()) {
            const std::array<std::size_t, 4> id{dm.k, dm.l, dm.ks, dm.ls};
            for (auto a : id)
                for (auto b : id) entries.emplace_back(idx(a), idx(b));
        }
        pattern_ = SparsePattern(idx(size()), entries);
        diag_slot_.resize(size());
        for (std::size_t i = 0; i < size(); ++i) diag_slot_[i] = pattern_.slot(idx(i), idx(i));
        slots_.resize(mesh_->diamonds().size());
        for (std::size_t d = 0; d < slots_.size(); ++d) {
            const Diamond& dm = mesh_->diamond(d);
            const std::array<std::size_t, 4> id{dm.k, dm.l, dm.ks, dm.ls};
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) slots_[d][r * 4 + c] = pattern_.slot(idx(id[r]), idx(id[c]));
        }
    }

    std::shared_ptr<const DdfvMesh> mesh_;
    MeanKind mean_;
    Combiner combiner_;
    double dt_;
    Vector v_;
    Vector half_m_;
    SparsePattern pattern_;
    std::vector<Eigen::Index> diag_slot_;
    std::vector<std::array<Eigen::Index, 16>> slots_;
};

}  // namespace entrofv
