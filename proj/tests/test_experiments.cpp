#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "entrofv/experiments.hpp"
#include "entrofv/mesh_io.hpp"

using namespace entrofv;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("entrofv_test_" + name);
    fs::remove_all(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ENTROFV_CLI) + ' ' + args + " > /dev/null 2>&1";
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

}  // namespace

TEST(Resolve, CommandDefaults) {
    RunConfig c;
    c.command = "convergence";
    auto r = resolve(c);
    EXPECT_EQ(r.mesh, "triangular:0");
    EXPECT_EQ(r.mean, "all");
    EXPECT_EQ(r.quadrature, "edge-midpoints");
    EXPECT_EQ(r.dt, 1e-3);
    EXPECT_EQ(r.tfinal, 0.1);
    c.command = "decay-tpfa";
    r = resolve(c);
    EXPECT_EQ(r.dt, 1e-4);
    EXPECT_EQ(r.tfinal, 2.0);
    c.command = "decay-ddfv";
    r = resolve(c);
    EXPECT_EQ(r.scheme, "ddfv");
    EXPECT_EQ(r.mesh, "cartesian:32");
    EXPECT_EQ(r.tfinal, 10.0);
    // explicit values survive
    c.dt = 0.5;
    c.mesh = "distorted:8";
    r = resolve(c);
    EXPECT_EQ(r.dt, 0.5);
    EXPECT_EQ(r.mesh, "distorted:8");
}

TEST(Resolve, RejectsBadValues) {
    RunConfig c;
    c.command = "decay-tpfa";
    auto bad = [&](auto edit) {
        RunConfig d = c;
        edit(d);
        EXPECT_THROW(resolve(d), std::invalid_argument);
    };
    bad([](RunConfig& d) { d.dt = -1; });
    bad([](RunConfig& d) { d.dt = 1.0, d.tfinal = 0.5; });
    bad([](RunConfig& d) { d.mean = "median"; });
    bad([](RunConfig& d) { d.combiner = "min"; });
    bad([](RunConfig& d) { d.p = {0.5}; });
    bad([](RunConfig& d) { d.quadrature = "gauss"; });
    bad([](RunConfig& d) { d.linear = "cg"; });
    bad([](RunConfig& d) { d.jobs = 0; });
    bad([](RunConfig& d) { d.levels = -1; });
}

TEST(MakeMesh, Specs) {
    EXPECT_EQ(make_mesh("cartesian:3", all_neumann()).num_cells(), 9u);
    EXPECT_EQ(make_mesh("cartesian:3x2", all_neumann()).num_cells(), 6u);
    EXPECT_EQ(make_mesh("cartesian:3", all_neumann(), 1).num_cells(), 36u);
    EXPECT_EQ(make_mesh("triangular:0", all_neumann(), 1).num_cells(), 256u);
    EXPECT_EQ(make_mesh("distorted:4:0.2", all_neumann()).num_cells(), 16u);
    EXPECT_FALSE(make_mesh("distorted:4", all_neumann()).orthogonal());
    EXPECT_THROW(make_mesh("cartesian:3y", all_neumann()), std::invalid_argument);
    EXPECT_ANY_THROW(make_mesh("/nonexistent/mesh.txt", all_neumann()));
}

TEST(MakeMesh, FilesAreRetagged) {
    const fs::path p = scratch("retag.mesh");
    {
        std::ofstream f(p);
        f << export_mesh(generate_cartesian(4, 4));
    }
    auto m = make_mesh(p.string(), case_tagger("tpfa_mixed"));
    EXPECT_TRUE(m.has_dirichlet());
    EXPECT_FALSE(make_mesh(p.string(), case_tagger("ddfv_eps")).has_dirichlet());
    fs::remove(p);
}

TEST(Cases, Oracle) {
    EXPECT_TRUE(validate_case(tpfa_mixed()).consistent());
    EXPECT_FALSE(validate_case(tpfa_mixed(true)).consistent());
    EXPECT_TRUE(validate_case(ddfv_eps(1e-2, 0.1)).consistent());
    EXPECT_FALSE(validate_case(ddfv_eps(1e-2, 1.0, true)).consistent());
    // without the perturbation the two forms coincide
    EXPECT_TRUE(validate_case(ddfv_eps(0.0, 1.0, true)).consistent());
    RunConfig c;
    c.case_id = "nope";
    EXPECT_THROW(cmd_validate_case(c), std::invalid_argument);
}

TEST(Commands, ConfigEchoAndDeterministicOutput) {
    RunConfig c;
    c.mesh = "cartesian:6";
    c.tfinal = 0.2;
    c.dt = 1e-2;
    c.lambda11 = 0.5;
    const fs::path a = scratch("ddfv_a"), b = scratch("ddfv_b");
    c.out = a.string();
    auto r = cmd_decay_ddfv(c);
    c.out = b.string();
    cmd_decay_ddfv(c);
    EXPECT_EQ(r.series.records.size(), 21u);
    EXPECT_LT(std::max(r.mass_drift_primal, r.mass_drift_dual), 1e-11);
    for (auto f : {"series.csv", "table.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    const std::string cfg = slurp(a / "config.txt");
    EXPECT_EQ(cfg.rfind("# entrofv decay-ddfv\n", 0), 0u);
    EXPECT_NE(cfg.find("lambda11=0.5\n"), std::string::npos);
    EXPECT_NE(cfg.find("mesh=cartesian:6\n"), std::string::npos);
    auto j = Json::parse(slurp(a / "summary.txt"));
    EXPECT_EQ(j["case"], "ddfv_eps");
    EXPECT_EQ(j["unknowns"], r.unknowns);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Commands, SmallConvergenceTable) {
    RunConfig c;
    c.command = "convergence";
    c.levels = 1;
    c.mean = "logarithmic";
    c.tfinal = 0.01;
    auto r = cmd_convergence(c);
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_TRUE(r.rows[0].failure.empty());
    EXPECT_LT(r.rows[1].error, r.rows[0].error);
    EXPECT_EQ(r.rows[1].dt, 1e-3 / 4);
    EXPECT_EQ(r.rows[1].steps, 40);
    EXPECT_GT(r.order(MeanKind::Logarithmic, 0, 1), 1.0);
}

TEST(Commands, TpfaDecayParallelMatchesSerial) {
    RunConfig c;
    c.command = "decay-tpfa";
    c.dt = 1e-2;
    c.tfinal = 0.3;
    auto serial = cmd_decay_tpfa(c);
    c.jobs = 3;
    auto parallel = cmd_decay_tpfa(c);
    ASSERT_EQ(serial.runs.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        ASSERT_EQ(serial.runs[i].series.records.size(), parallel.runs[i].series.records.size());
        EXPECT_EQ(serial.runs[i].series.records.back().l1, parallel.runs[i].series.records.back().l1);
        EXPECT_EQ(serial.runs[i].mean, parallel.runs[i].mean);
    }
}

TEST(Cli, ExitCodes) {
    const fs::path out = scratch("cli");
    EXPECT_EQ(run_cli("validate-case"), 0);
    EXPECT_EQ(run_cli("mesh info --mesh triangular:0"), 0);
    EXPECT_EQ(run_cli("decay-tpfa --dt 0.01 --tfinal 0.05 --mean max --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "series.csv"));
    EXPECT_EQ(run_cli("decay-tpfa --dt -1"), 2);
    EXPECT_EQ(run_cli("decay-tpfa --mean median"), 2);
    EXPECT_NE(run_cli("no-such-command"), 0);
    // the echoed config is accepted back
    EXPECT_EQ(run_cli("decay-tpfa --config " + (out / "config.txt").string() + " --out " + (out / "again").string()), 0);
    EXPECT_EQ(slurp(out / "series.csv"), slurp(out / "again" / "series.csv"));
    const fs::path mesh = out / "m.mesh";
    EXPECT_EQ(run_cli("mesh generate --mesh distorted:4 --out " + mesh.string()), 0);
    EXPECT_EQ(run_cli("mesh export --mesh " + mesh.string() + " --out " + (out / "m2.mesh").string()), 0);
    EXPECT_EQ(slurp(mesh), slurp(out / "m2.mesh"));
    fs::remove_all(out);
}
