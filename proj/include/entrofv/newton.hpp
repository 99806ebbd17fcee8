#pragma once

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "linear_solver.hpp"

namespace entrofv {

// One backward-Euler step: residual(u, u_old) = 0.
template <class P>
concept StepProblem = requires(const P& p, const Vector& u) {
    { p.residual(u, u) } -> std::convertible_to<Vector>;
    { p.jacobian(u) } -> std::convertible_to<SparseMatrix>;
    { p.stopping_scale() } -> std::convertible_to<double>;
    { p.size() } -> std::convertible_to<std::size_t>;
};

struct NewtonConfig {
    double floor = 1e-12;
    double tol = 1e-10;
    int max_iter = 50;
    LinearSolverKind linear = LinearSolverKind::Direct;
    // a step that multiplies the residual norm by more than this is halved
    double growth_limit = 10.0;
    int max_halvings = 5;
};

struct NewtonReport {
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> residual_history;   // norm before each update, then the final one
    std::vector<std::size_t> projected;      // components lifted to the floor, per update
    int halvings = 0;
    bool converged = false;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, NewtonReport report)
        : std::runtime_error(what), report_(std::move(report)) {}
    const NewtonReport& report() const { return report_; }

private:
    NewtonReport report_;
};

// Stateful so that the symbolic factorization survives across time steps.
class NewtonSolver {
public:
    explicit NewtonSolver(NewtonConfig cfg = {}) : cfg_(cfg), linear_(cfg.linear) {
        if (!(cfg.floor > 0) || !(cfg.tol > 0)) throw std::invalid_argument("floor and tolerance must be positive");
    }

    const NewtonConfig& config() const { return cfg_; }

    // The stopping norm is scale * |residual|_1; with the scheme's row scaling this is
    // |dt^-1 M (Phi(u) - u_old)|_1 for the two schemes.
    template <StepProblem P>
    std::pair<Vector, NewtonReport> solve_step(const P& problem, const Vector& u_old) {
        NewtonReport rep;
        const double scale = problem.stopping_scale();
        Vector u = u_old;
        project(u);
        Vector r = problem.residual(u, u_old);
        double norm = scale * r.template lpNorm<1>();
        rep.residual_history.push_back(norm);
        // at least one update per step, the test runs after it
        do {
            if (rep.iterations == cfg_.max_iter) {
                rep.residual_norm = norm;
                throw NonConvergence("Newton did not converge in " + std::to_string(cfg_.max_iter) +
                                         " iterations, residual " + std::to_string(norm),
                                     rep);
            }
            const Vector du = linear_.solve(problem.jacobian(u), -r);
            double step = 1.0;
            Vector trial;
            Vector rt;
            double nt = 0.0;
            std::size_t lifted = 0;
            for (int h = 0;; ++h) {
                trial = u + step * du;
                lifted = project(trial);
                rt = problem.residual(trial, u_old);
                nt = scale * rt.template lpNorm<1>();
                if (nt <= cfg_.growth_limit * norm || h == cfg_.max_halvings) break;
                step *= 0.5;
                ++rep.halvings;
            }
            if (!std::isfinite(nt)) {
                rep.residual_norm = nt;
                throw NonConvergence("Newton produced a non-finite residual", rep);
            }
            u = std::move(trial);
            r = std::move(rt);
            norm = nt;
            ++rep.iterations;
            rep.projected.push_back(lifted);
            rep.residual_history.push_back(norm);
        } while (!(norm <= cfg_.tol));
        rep.residual_norm = norm;
        rep.converged = true;
        return {std::move(u), std::move(rep)};
    }

private:
    std::size_t project(Vector& u) const {
        std::size_t n = 0;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (!(u[i] >= cfg_.floor)) {
                u[i] = cfg_.floor;
                ++n;
            }
        return n;
    }

    NewtonConfig cfg_;
    LinearSolver linear_;
};

template <StepProblem P>
std::pair<Vector, NewtonReport> solve_step(const P& problem, const Vector& u_old, const NewtonConfig& cfg = {}) {
    NewtonSolver s(cfg);
    return s.solve_step(problem, u_old);
}

}  // namespace entrofv
