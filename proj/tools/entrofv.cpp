#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "entrofv/experiments.hpp"

using namespace entrofv;

namespace {

void print_fit(const char* name, const DecayFit& f) {
    std::printf("  %-12s [%g, %g] rate %.6g  samples %zu  %s\n", name, f.t0, f.t1, f.rate, f.samples,
                f.reliable ? "reliable" : "unreliable");
}

PrimalMesh mesh_for(const RunConfig& cfg) {
    if (cfg.case_id.empty() && std::filesystem::is_regular_file(cfg.mesh)) return import_mesh(cfg.mesh);
    return make_mesh(cfg.mesh, case_tagger(cfg.case_id));
}

void print_mesh(const PrimalMesh& m) {
    std::cout << regularity_json(m).dump(2) << '\n';
    try {
        auto d = DdfvMesh::build(m);
        std::printf("ddfv: %zu unknowns, %zu diamonds, theta %.6g\n", d.num_unknowns(), d.diamonds().size(),
                    d.theta_bound());
    } catch (const MeshError& e) {
        std::printf("ddfv: %s\n", e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-volume entropy experiments"};
    app.set_config("--config", "", "key=value file with any of the options below");
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    app.add_option("--mesh", cfg.mesh, "cartesian:N[xM], triangular:L, distorted:N[:A] or a mesh file");
    app.add_option("--mean", cfg.mean, "arithmetic, logarithmic, sqrtsquare, max or all");
    app.add_option("--combiner", cfg.combiner, "max or arithmetic (DDFV)");
    app.add_option("--dt", cfg.dt);
    app.add_option("--tfinal", cfg.tfinal);
    app.add_option("--eps", cfg.eps);
    app.add_option("--lambda11", cfg.lambda11);
    app.add_option("--p", cfg.p, "comma separated entropy exponents in [1, 2]")->delimiter(',');
    app.add_option("--seed", cfg.seed);
    app.add_option("--out", cfg.out, "output directory (a file for mesh generate/export)");
    app.add_option("--levels", cfg.levels, "finest refinement level of the convergence table");
    app.add_option("--case", cfg.case_id, "tpfa_mixed, ddfv_eps, ...");
    app.add_option("--quadrature", cfg.quadrature, "centroid or edge-midpoints");
    app.add_option("--linear", cfg.linear, "direct or iterative");
    app.add_option("--jobs", cfg.jobs, "independent runs executed concurrently");
    app.add_option("--draws", cfg.draws, "random draws per inequality family");
    app.add_option("--scheme", cfg.scheme, "tpfa or ddfv; fixed by the command");

    auto* conv = app.add_subcommand("convergence", "L2 error table at the final time");
    auto* dtp = app.add_subcommand("decay-tpfa", "L1 decay towards the steady state, TPFA");
    auto* ddv = app.add_subcommand("decay-ddfv", "relative entropy decay, DDFV");
    auto* ineq = app.add_subcommand("check-inequalities", "discrete functional inequalities");
    auto* val = app.add_subcommand("validate-case", "closed-form solutions against the model");
    auto* mesh = app.add_subcommand("mesh", "mesh tools");
    mesh->require_subcommand(1);
    auto* minfo = mesh->add_subcommand("info", "regularity report");
    auto* mgen = mesh->add_subcommand("generate", "write a generated mesh");
    auto* mexp = mesh->add_subcommand("export", "re-export a mesh file or generated mesh");

    CLI11_PARSE(app, argc, argv);

    try {
        if (conv->parsed()) {
            auto res = cmd_convergence(cfg);
            std::printf("%-12s %5s %10s %7s %12s %7s %7s\n", "mean", "level", "h", "cells", "error", "order", "newton");
            for (const auto& r : res.rows)
                std::printf("%-12s %5d %10.4g %7zu %12.4e %7.3f %7.3f%s\n", to_string(r.mean), r.level, r.h, r.cells,
                            r.error, r.order, r.mean_newton, r.failure.empty() ? "" : ("  " + r.failure).c_str());
            std::printf("%.1f s\n", res.seconds);
        } else if (dtp->parsed()) {
            auto res = cmd_decay_tpfa(cfg);
            for (const auto& r : res.runs) {
                std::printf("%s: newton mean %.3f max %d on (0, 0.5], %zu later steps with more than one\n",
                            to_string(r.mean), r.mean_iters_early, r.max_iters_early, r.late_steps_not_one);
                print_fit("L1", r.fit);
            }
            std::printf("%.1f s\n", res.seconds);
        } else if (ddv->parsed()) {
            auto res = cmd_decay_ddfv(cfg);
            std::printf("%zu unknowns, theta %.4g, mass drift %.2e / %.2e\n", res.unknowns, res.theta,
                        res.mass_drift_primal, res.mass_drift_dual);
            print_fit("early", res.early);
            print_fit("late", res.late);
            print_fit("pre-plateau", res.pre_plateau);
            print_fit("tail", res.tail);
            std::printf("  ratio %.4g, onset t %.4g level %.4g\n", res.early.rate / res.late.rate, res.onset_time,
                        res.onset_level);
            std::printf("%.1f s\n", res.seconds);
        } else if (ineq->parsed()) {
            auto rep = cmd_check_inequalities(cfg);
            for (const auto& c : rep.checks)
                std::printf("%-20s draws %7zu failures %zu calibration %.6g validation %.6g %s%s\n", c.name.c_str(),
                            c.draws, c.failures, c.calibration_max, c.validation_max, c.passed ? "pass" : "FAIL",
                            c.gated ? "" : " (reported)");
            return rep.all_passed() ? 0 : 1;
        } else if (val->parsed()) {
            bool ok = true;
            for (const auto& r : cmd_validate_case(cfg)) {
                std::printf("%-20s pde %.3e boundary %.3e  %s (expected %s)\n", r.id.c_str(), r.validation.pde_residual,
                            r.validation.boundary_residual, r.validation.consistent() ? "consistent" : "inconsistent",
                            r.expected_consistent ? "consistent" : "inconsistent");
                ok = ok && r.as_expected();
            }
            return ok ? 0 : 1;
        } else if (mesh->parsed()) {
            cfg.command = "mesh";
            cfg = resolve(cfg);
            PrimalMesh m = mesh_for(cfg);
            if (minfo->parsed()) {
                print_mesh(m);
            } else if (mgen->parsed() || mexp->parsed()) {
                if (cfg.out.empty()) std::cout << export_mesh(m);
                else export_mesh(m, cfg.out);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
