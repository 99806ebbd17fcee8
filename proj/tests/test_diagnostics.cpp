#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "entrofv/diagnostics.hpp"
#include "entrofv/mesh_generators.hpp"

using namespace entrofv;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

std::vector<double> grid(double t0, double t1, int n) {
    std::vector<double> t;
    for (int i = 0; i <= n; ++i) t.push_back(t0 + (t1 - t0) * i / n);
    return t;
}

}  // namespace

TEST(Entropy, HandValues) {
    const Vector u = vec({2, 0}), st = vec({1, 1}), w = vec({1, 1});
    EXPECT_NEAR(entropy(u, st, 2.0, w), 2.0, 1e-15);
    EXPECT_NEAR(entropy(u, st, 1.0, w), 2 * std::log(2.0), 1e-15);
    // zero weights are skipped, even with a bad steady value there
    EXPECT_NEAR(entropy(vec({2, 5}), vec({1, 0}), 2.0, vec({1, 0})), 1.0, 1e-15);
    EXPECT_THROW(entropy(u, vec({1, 0}), 2.0, w), std::domain_error);
}

TEST(Entropy, OrderedInExponent) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(0.01, 5);
    for (int i = 0; i < 1000; ++i) {
        Vector u(6), st(6), w(6);
        for (int k = 0; k < 6; ++k) u[k] = d(rng), st[k] = d(rng), w[k] = d(rng);
        const double e1 = entropy(u, st, 1.0, w), e15 = entropy(u, st, 1.5, w), e2 = entropy(u, st, 2.0, w);
        EXPECT_GE(e1, 0.0);
        EXPECT_LE(e1, e15 * (1 + 1e-14));
        EXPECT_LE(e15, e2 * (1 + 1e-14));
    }
}

TEST(Distances, Lp) {
    const Vector u = vec({3, 1}), st = vec({1, 1}), w = vec({0.5, 0.5});
    EXPECT_NEAR(l1_distance(u, st, w), 1.0, 1e-15);
    EXPECT_NEAR(l2_distance(u, st, w), std::sqrt(2.0), 1e-15);
}

TEST(Dissipation, TwoCells) {
    auto m = std::make_shared<const PrimalMesh>(generate_cartesian(2, 1));
    TpfaProblem pb(m, [](Point) { return 0.0; }, {}, MeanKind::Logarithmic, 1.0);
    const double e = std::numbers::e;
    const Vector u = vec({1, e}), st = vec({1, 1});
    EXPECT_NEAR(dissipation_tpfa(pb, u, st, 1.0), 2 * (e - 1), 1e-14);
    EXPECT_NEAR(dissipation_tpfa(pb, u, st, 2.0), 4 * (e - 1) * (e - 1), 1e-13);
    EXPECT_NEAR(dissipation_hat(pb, u, st, 2.0), 4 * (e - 1) * (e - 1), 1e-13);
    EXPECT_EQ(dissipation_tpfa(pb, st, st, 1.0), 0.0);
}

TEST(Dissipation, DominatesSquareRootForm) {
    auto m = std::make_shared<const PrimalMesh>(generate_triangular(0));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(0.05, 4);
    std::uniform_real_distribution<double> pd(1.0, 2.0);
    for (auto mk : all_means) {
        TpfaProblem pb(m, [](Point x) { return x.x * x.y; }, {}, mk, 1.0);
        const Vector st = pb.steady_state(1.0);
        for (int i = 0; i < 1000; ++i) {
            Vector u(static_cast<Eigen::Index>(m->num_cells()));
            for (auto& x : u) x = d(rng);
            const double p = i % 10 ? pd(rng) : 1.0;
            const double a = dissipation_tpfa(pb, u, st, p), b = dissipation_hat(pb, u, st, p);
            ASSERT_GE(a, b * (1 - 1e-12) - 1e-14) << to_string(mk) << " p=" << p;
        }
    }
}

TEST(Inequalities, PoincareTwoCells) {
    auto m = generate_cartesian(2, 1, Rect{0, 0, std::sqrt(2.0), 1 / std::sqrt(2.0)});
    auto s = verify_pw_beckner_logsob(m, vec({1, 1}), vec({0, 2}), InequalityKind::PoincareWirtinger);
    EXPECT_NEAR(s.lhs, 1.0, 1e-14);
    EXPECT_NEAR(s.seminorm, 4.0, 1e-13);
    EXPECT_THROW(verify_pw_beckner_logsob(m, vec({1, 2}), vec({0, 2}), InequalityKind::PoincareWirtinger),
                 std::invalid_argument);
    EXPECT_THROW(verify_pw_beckner_logsob(m, vec({1, 1}), vec({-1, 2}), InequalityKind::Beckner, 1.5),
                 std::invalid_argument);
    EXPECT_THROW(verify_pw_beckner_logsob(m, vec({1, 1}), vec({1, 2}), InequalityKind::Beckner, 2.5),
                 std::invalid_argument);
    auto c = verify_pw_beckner_logsob(m, vec({1, 1}), vec({3, 3}), InequalityKind::LogSobolev);
    EXPECT_NEAR(c.lhs, 0.0, 1e-14);
    EXPECT_FALSE(c.contradiction);
}

TEST(Inequalities, BecknerLimits) {
    // p = 2 is the Poincare-Wirtinger left side of f, (p - 1)^-1 times it tends to the log-Sobolev one
    auto m = generate_cartesian(2, 2);
    const Vector mu = Vector::Ones(4), f = vec({0.5, 1.5, 1, 2});
    auto pw = verify_pw_beckner_logsob(m, mu, f, InequalityKind::PoincareWirtinger);
    auto b2 = verify_pw_beckner_logsob(m, mu, f, InequalityKind::Beckner, 2.0);
    EXPECT_NEAR(b2.lhs, pw.lhs, 1e-14);
    auto ls = verify_pw_beckner_logsob(m, mu, f, InequalityKind::LogSobolev);
    auto b1 = verify_pw_beckner_logsob(m, mu, f, InequalityKind::Beckner, 1 + 1e-6);
    EXPECT_NEAR(b1.lhs / 1e-6, ls.lhs, 1e-5);
}

TEST(Inequalities, CsiszarKullback) {
    const Vector w = vec({0.5, 0.5}), g = vec({1.5, 0.5});
    EXPECT_TRUE(verify_csiszar_kullback(w, g));
    const double ent = 0.5 * (1.5 * std::log(1.5) + 0.5 * std::log(0.5));
    EXPECT_NEAR(2 * ent, 0.2616, 1e-4);
    EXPECT_THROW(verify_csiszar_kullback(w, vec({1, 2})), std::invalid_argument);
}

TEST(Inequalities, MeansLemma) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(0.01, 1);
    for (int i = 0; i < 500; ++i) {
        Vector m(5), mu(5), g(5);
        for (int k = 0; k < 5; ++k) m[k] = d(rng), mu[k] = d(rng), g[k] = 10 * d(rng) - 5;
        mu /= m.dot(mu);
        for (double q : {1.0, 2.0, 3.5, std::numeric_limits<double>::infinity()})
            EXPECT_TRUE(verify_means_lemma(m, mu, g, q)) << q;
    }
    EXPECT_THROW(verify_means_lemma(vec({1}), vec({1}), vec({1}), 0.5), std::invalid_argument);
}

TEST(Inequalities, DdfvLogSobolevSides) {
    auto m = DdfvMesh::build(generate_cartesian(4, 4));
    const auto n = static_cast<Eigen::Index>(m.num_unknowns());
    const Vector one = Vector::Ones(n);
    auto s = verify_logsob_ddfv(m, one, one);
    EXPECT_EQ(s.lhs, 0.0);
    EXPECT_EQ(s.rhs, 0.0);
    // masses differ between the two meshes
    Vector v = one;
    v[0] = 2.0;
    EXPECT_THROW(verify_logsob_ddfv(m, v, one), std::invalid_argument);
}

TEST(Inequalities, CalibrationIsStable) {
    std::vector<PrimalMesh> meshes{generate_cartesian(4, 4), generate_triangular(0)};
    for (auto k : {InequalityKind::PoincareWirtinger, InequalityKind::Beckner, InequalityKind::LogSobolev}) {
        auto r = calibrate_inequality(meshes, k, 1.5, 3, 60, 60);
        EXPECT_FALSE(r.contradiction);
        EXPECT_GT(r.calibration_max, 0.0);
        EXPECT_TRUE(r.passed()) << r.family << ' ' << r.calibration_max << ' ' << r.validation_max;
    }
}

TEST(Fit, PureExponential) {
    auto t = grid(0, 2, 200);
    std::vector<double> v;
    for (double s : t) v.push_back(5 * std::exp(-3 * s));
    auto f = fit_decay(t, v, 0.2, 2);
    EXPECT_NEAR(f.rate, 3.0, 1e-10);
    EXPECT_NEAR(f.log_intercept, std::log(5.0), 1e-10);
    EXPECT_TRUE(f.reliable);
    EXPECT_EQ(f.samples, 181u);
}

TEST(Fit, TwoRegimes) {
    auto t = grid(0, 10, 1000);
    std::vector<double> v;
    for (double s : t) v.push_back(std::exp(-10 * s) + 1e-8 * std::exp(-s));
    EXPECT_NEAR(fit_decay(t, v, 0.05, 0.6).rate, 10.0, 1e-2);
    auto late = fit_decay(t, v, 4, 10);
    EXPECT_NEAR(late.rate, 1.0, 1e-6);
    auto [tc, level] = fit_crossing(fit_decay(t, v, 0.05, 0.6), late);
    EXPECT_NEAR(tc, std::log(1e8) / 9, 1e-2);
    EXPECT_NEAR(level, -10 * tc, 0.1);
}

TEST(Fit, EdgeCases) {
    auto t = grid(0, 1, 100);
    std::vector<double> c(t.size(), 0.3);
    auto f = fit_decay(t, c, 0, 1);
    EXPECT_NEAR(f.rate, 0.0, 1e-14);
    EXPECT_TRUE(f.reliable);
    // values below the floor are dropped
    std::vector<double> tiny(t.size(), 1e-15);
    EXPECT_TRUE(std::isnan(fit_decay(t, tiny, 0, 1).rate));
    EXPECT_THROW(fit_decay(t, std::vector<double>(3, 1.0), 0, 1), std::invalid_argument);
}

TEST(Series, CsvLayout) {
    DiagnosticsSeries s;
    EntropyRecord r;
    r.t = 0.5;
    r.entropies = {1.0, 2.0};
    r.newton_iters = 3;
    s.records.push_back(r);
    std::ostringstream os;
    s.write_csv(os);
    std::istringstream in(os.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "t,E1,E2,I1,mass_primal,mass_dual,L1,L2,newton_iters,Ihat1");
    EXPECT_EQ(row.substr(0, 8), "0.5,1,2,");
    EXPECT_EQ(s.times().size(), 1u);
    EXPECT_EQ(s.column_entropy(1)[0], 2.0);
}
