#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ddfv_scheme.hpp"
#include "kernels.hpp"
#include "mesh.hpp"
#include "tpfa.hpp"

namespace entrofv {

// sum_i w_i u_inf_i Phi_p(u_i / u_inf_i); zero-weight entries are skipped
inline double entropy(const Vector& u, const Vector& steady, double p, const Vector& weights) {
    const EntropyGenerator g(p);
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (weights[i] == 0.0) continue;
        if (!(steady[i] > 0)) throw std::domain_error("steady state must be positive");
        s += weights[i] * steady[i] * g.phi(u[i] / steady[i]);
    }
    return s;
}

inline double entropy(const TpfaProblem& pb, const Vector& u, const Vector& steady, double p) {
    return entropy(u, steady, p, pb.cell_measures());
}

inline double entropy(const DdfvProblem& pb, const Vector& u, const Vector& steady, double p) {
    return entropy(u, steady, p, pb.product_weights());
}

inline double lp_distance(const Vector& u, const Vector& steady, const Vector& weights, double q) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += weights[i] * std::pow(std::abs(u[i] - steady[i]), q);
    return std::pow(s, 1.0 / q);
}

inline double l1_distance(const Vector& u, const Vector& steady, const Vector& w) { return lp_distance(u, steady, w, 1.0); }
inline double l2_distance(const Vector& u, const Vector& steady, const Vector& w) { return lp_distance(u, steady, w, 2.0); }

namespace detail {
struct EdgeValues {
    double uk, un, sk, sn;  // state and steady state on both sides
};

inline EdgeValues edge_values(const TpfaProblem& pb, const Vector& u, const Vector& steady, std::size_t e) {
    const Edge& ed = pb.mesh().edge(e);
    const std::size_t k = ed.cells[0];
    auto i = static_cast<Eigen::Index>(k);
    if (ed.kind == EdgeKind::Interior) {
        auto l = static_cast<Eigen::Index>(ed.cells[1]);
        return {u[i], u[l], steady[i], steady[l]};
    }
    // Dirichlet data is itself the steady value on the edge
    return {u[i], pb.dirichlet_value(e), steady[i], pb.dirichlet_value(e)};
}
}  // namespace detail

// sum over interior and Dirichlet edges of tau r(u) D log(u/u_inf) D Phi'(u/u_inf)
inline double dissipation_tpfa(const TpfaProblem& pb, const Vector& u, const Vector& steady, double p) {
    const EntropyGenerator g(p);
    double s = 0.0;
    for (std::size_t e = 0; e < pb.mesh().num_edges(); ++e) {
        const Edge& ed = pb.mesh().edge(e);
        if (ed.kind == EdgeKind::Neumann) continue;
        auto v = detail::edge_values(pb, u, steady, e);
        const double a = v.un / v.sn, b = v.uk / v.sk;
        const double r = mean(pb.mean_kind(), v.uk, v.un);
        s += pb.diffusion() * ed.transmissibility * r * (std::log(a) - std::log(b)) * (g.phi_prime(a) - g.phi_prime(b));
    }
    return s;
}

// (4/p) sum tau min(u_inf) (D (u/u_inf)^{p/2})^2
inline double dissipation_hat(const TpfaProblem& pb, const Vector& u, const Vector& steady, double p) {
    double s = 0.0;
    for (std::size_t e = 0; e < pb.mesh().num_edges(); ++e) {
        const Edge& ed = pb.mesh().edge(e);
        if (ed.kind == EdgeKind::Neumann) continue;
        auto v = detail::edge_values(pb, u, steady, e);
        const double d = std::pow(v.un / v.sn, 0.5 * p) - std::pow(v.uk / v.sk, 0.5 * p);
        s += pb.diffusion() * ed.transmissibility * std::min(v.sk, v.sn) * d * d;
    }
    return 4.0 / p * s;
}

inline double dissipation_ddfv(const DdfvProblem& pb, const Vector& u, const Vector& steady) {
    Vector g(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) g[i] = std::log(u[i] / steady[i]);
    return pb.bilinear_T(u, g, g);
}

// --- decay fits ---

struct DecayFit {
    double t0 = 0.0, t1 = 0.0;
    double rate = std::numeric_limits<double>::quiet_NaN();
    double log_intercept = std::numeric_limits<double>::quiet_NaN();  // log value at t = 0
    double residual = std::numeric_limits<double>::quiet_NaN();  // rms of log residuals
    double log_range = 0.0;
    std::size_t samples = 0;
    bool reliable = false;
};

inline constexpr double fit_floor = 1e-13;

// least-squares slope of log(value) against t on [t0, t1]; rate = -slope
inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double t0, double t1,
                          double floor = fit_floor) {
    if (t.size() != value.size()) throw std::invalid_argument("time and value series differ in length");
    DecayFit fit;
    fit.t0 = t0;
    fit.t1 = t1;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= t0 && t[i] <= t1 && value[i] > floor && std::isfinite(value[i])) {
            xs.push_back(t[i]);
            ys.push_back(std::log(value[i]));
        }
    fit.samples = xs.size();
    if (xs.size() < 5) return fit;
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0)) return fit;
    const double slope = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (my + slope * (xs[i] - mx));
        ss += r * r;
    }
    fit.rate = -slope;
    fit.log_intercept = my - slope * mx;
    fit.residual = std::sqrt(ss / n);
    auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    fit.log_range = *hi - *lo;
    fit.reliable = fit.log_range > 0 ? fit.residual < 0.1 * fit.log_range : fit.residual < 1e-12;
    return fit;
}

// time and log level where two fitted lines cross
inline std::pair<double, double> fit_crossing(const DecayFit& a, const DecayFit& b) {
    const double t = (a.log_intercept - b.log_intercept) / (a.rate - b.rate);
    return {t, a.log_intercept - a.rate * t};
}

// --- functional inequalities ---

enum class InequalityKind { PoincareWirtinger, Beckner, LogSobolev };

inline const char* to_string(InequalityKind k) {
    switch (k) {
        case InequalityKind::PoincareWirtinger: return "poincare-wirtinger";
        case InequalityKind::Beckner: return "beckner";
        case InequalityKind::LogSobolev: return "log-sobolev";
    }
    return "?";
}

struct InequalitySides {
    double lhs = 0.0;
    double seminorm = 0.0;  // sum over interior edges of tau |f_K - f_L|^2
    double weight = 0.0;    // mu_inf/zeta or sqrt(mu_inf)/zeta^2
    double ratio = 0.0;     // lhs / (weight seminorm)
    bool contradiction = false;
};

inline double interior_seminorm(const PrimalMesh& mesh, const Vector& f) {
    double s = 0.0;
    for (const auto& e : mesh.edges())
        if (e.kind == EdgeKind::Interior) {
            double d = f[static_cast<Eigen::Index>(e.cells[0])] - f[static_cast<Eigen::Index>(e.cells[1])];
            s += e.transmissibility * d * d;
        }
    return s;
}

inline InequalitySides verify_pw_beckner_logsob(const PrimalMesh& mesh, const Vector& mu, const Vector& f,
                                                InequalityKind which, double p = 2.0) {
    const auto n = static_cast<Eigen::Index>(mesh.num_cells());
    if (mu.size() != n || f.size() != n) throw std::invalid_argument("cell vectors do not match the mesh");
    double total = 0.0, mu_inf = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (!(mu[k] >= 0)) throw std::invalid_argument("reference measure must be nonnegative");
        total += mesh.cell(static_cast<std::size_t>(k)).area * mu[k];
        mu_inf = std::max(mu_inf, mu[k]);
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("reference measure must have unit mass");
    auto m = [&](Eigen::Index k) { return mesh.cell(static_cast<std::size_t>(k)).area; };

    InequalitySides out;
    const double zeta = mesh.zeta();
    switch (which) {
        case InequalityKind::PoincareWirtinger: {
            double mf = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) mf += m(k) * f[k] * mu[k];
            for (Eigen::Index k = 0; k < n; ++k) out.lhs += m(k) * (f[k] - mf) * (f[k] - mf) * mu[k];
            out.weight = mu_inf / zeta;
            break;
        }
        case InequalityKind::Beckner: {
            if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("Beckner exponent must lie in (1, 2]");
            double a = 0.0, b = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (!(f[k] >= 0)) throw std::invalid_argument("Beckner inequality needs f >= 0");
                a += m(k) * f[k] * f[k] * mu[k];
                b += m(k) * std::pow(f[k], 2.0 / p) * mu[k];
            }
            out.lhs = a - std::pow(b, p);
            out.weight = mu_inf / zeta;
            break;
        }
        case InequalityKind::LogSobolev: {
            double norm2 = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (!(f[k] > 0)) throw std::invalid_argument("log-Sobolev inequality needs f > 0");
                norm2 += m(k) * f[k] * f[k] * mu[k];
            }
            for (Eigen::Index k = 0; k < n; ++k) out.lhs += m(k) * f[k] * f[k] * std::log(f[k] * f[k] / norm2) * mu[k];
            out.weight = std::sqrt(mu_inf) / (zeta * zeta);
            break;
        }
    }
    out.seminorm = interior_seminorm(mesh, f);
    if (out.seminorm > 0) {
        out.ratio = out.lhs / (out.weight * out.seminorm);
    } else {
        out.ratio = 0.0;
        // a constant f must give a vanishing left side
        out.contradiction = std::abs(out.lhs) > 1e-12;
    }
    return out;
}

// ||g - mu g||_{L^q_mu} <= 2 ||g - mean g||_{L^q_mu}; q = infinity allowed
inline bool verify_means_lemma(const Vector& m, const Vector& mu, const Vector& g, double q) {
    if (!(q >= 1)) throw std::invalid_argument("q must be at least 1");
    double mg = 0.0, lebesgue = 0.0, area = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        mg += m[k] * mu[k] * g[k];
        lebesgue += m[k] * g[k];
        area += m[k];
    }
    lebesgue /= area;
    auto norm = [&](double c) {
        if (std::isinf(q)) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < g.size(); ++k)
                if (m[k] * mu[k] > 0) s = std::max(s, std::abs(g[k] - c));
            return s;
        }
        double s = 0.0;
        for (Eigen::Index k = 0; k < g.size(); ++k) s += m[k] * mu[k] * std::pow(std::abs(g[k] - c), q);
        return std::pow(s, 1.0 / q);
    };
    return detail::leq_with_slack(norm(mg), 2.0 * norm(lebesgue));
}

// (sum w |g - 1|)^2 <= 2 sum w g log g for probability weights w and sum w g = 1
inline bool verify_csiszar_kullback(const Vector& w, const Vector& g) {
    double total = 0.0, mass = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (!(w[i] >= 0) || !(g[i] > 0)) throw std::invalid_argument("weights must be nonnegative and g positive");
        total += w[i];
        mass += w[i] * g[i];
    }
    if (std::abs(total - 1.0) > 1e-12 || std::abs(mass - 1.0) > 1e-12)
        throw std::invalid_argument("weights and g must be normalized");
    double l1 = 0.0, ent = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        l1 += w[i] * std::abs(g[i] - 1.0);
        ent += w[i] * g[i] * std::log(g[i]);
    }
    return detail::leq_with_slack(l1 * l1, 2.0 * ent);
}

struct DdfvLogSobSides {
    double lhs = 0.0;
    double rhs = 0.0;  // without the constant
    double ratio = 0.0;
};

// [[v log(v/v_inf), 1]] against (M1 M_inf)^{1/2} sum_D m_D |grad^D sqrt(v/v_inf)|^2
inline DdfvLogSobSides verify_logsob_ddfv(const DdfvMesh& mesh, const Vector& v, const Vector& v_inf) {
    const Vector& m = mesh.measures();
    double mp = 0, md = 0, mp_inf = 0, md_inf = 0, m_inf = 0;
    DdfvLogSobSides out;
    for (std::size_t i = 0; i < mesh.num_unknowns(); ++i) {
        auto j = static_cast<Eigen::Index>(i);
        if (!(v[j] > 0) || !(v_inf[j] > 0)) throw std::invalid_argument("states must be positive");
        if (mesh.is_boundary(i)) continue;
        out.lhs += 0.5 * m[j] * v[j] * std::log(v[j] / v_inf[j]);
        m_inf = std::max(m_inf, v_inf[j]);
        if (mesh.is_dual(i)) md += m[j] * v[j], md_inf += m[j] * v_inf[j];
        else mp += m[j] * v[j], mp_inf += m[j] * v_inf[j];
    }
    for (double x : {md, mp_inf, md_inf})
        if (std::abs(x - mp) > 1e-10 * mp) throw std::invalid_argument("primal and dual masses must agree");
    Vector h(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) h[i] = std::sqrt(v[i] / v_inf[i]);
    double s = 0.0;
    for (std::size_t d = 0; d < mesh.diamonds().size(); ++d) {
        Point gr = discrete_gradient(mesh, h, d);
        s += mesh.diamond(d).area * dot(gr, gr);
    }
    out.rhs = std::sqrt(mp * m_inf) * s;
    out.ratio = out.rhs > 0 ? out.lhs / out.rhs : 0.0;
    return out;
}

// --- calibration of empirical constants ---

struct CalibrationResult {
    std::string family;
    double calibration_max = 0.0;
    double validation_max = 0.0;
    std::size_t calibration_samples = 0, validation_samples = 0;
    bool contradiction = false;
    bool passed() const { return !contradiction && validation_max <= 1.05 * calibration_max; }
};

namespace detail {

// positive smooth density exp(-W) with random low modes, normalized to unit mass
inline Vector random_density(const std::vector<Point>& x, const Vector& m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    const double a = c(rng), b = c(rng), s = c(rng), t = c(rng);
    Vector mu(static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double w = a * x[k].x + b * x[k].y + 0.5 * s * std::sin(std::numbers::pi * x[k].x) +
                         0.5 * t * std::cos(std::numbers::pi * x[k].y);
        mu[static_cast<Eigen::Index>(k)] = std::exp(-w);
    }
    return mu / m.dot(mu);
}

// low-frequency random field with values of order one
inline Vector random_mode(const std::vector<Point>& x, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    double coef[3][3];
    for (auto& row : coef)
        for (auto& v : row) v = c(rng);
    Vector f(static_cast<Eigen::Index>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i + j > 0)
                    s += coef[i][j] * std::cos(i * std::numbers::pi * x[k].x) * std::cos(j * std::numbers::pi * x[k].y);
        f[static_cast<Eigen::Index>(k)] = s;
    }
    return f / std::max(1e-300, f.cwiseAbs().maxCoeff());
}

// direction maximizing the Poincare-Wirtinger quotient for mu
inline Vector extremal_mode(const PrimalMesh& mesh, const Vector& mu) {
    const auto n = static_cast<Eigen::Index>(mesh.num_cells());
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n), w = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : mesh.edges())
        if (e.kind == EdgeKind::Interior) {
            auto k = static_cast<Eigen::Index>(e.cells[0]), l = static_cast<Eigen::Index>(e.cells[1]);
            lap(k, k) += e.transmissibility;
            lap(l, l) += e.transmissibility;
            lap(k, l) -= e.transmissibility;
            lap(l, k) -= e.transmissibility;
        }
    for (Eigen::Index k = 0; k < n; ++k) w(k, k) = mesh.cell(static_cast<std::size_t>(k)).area * mu[k];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lap, w);
    Vector v = es.eigenvectors().col(1);
    return v / v.cwiseAbs().maxCoeff();
}

inline Vector trial_function(InequalityKind kind, const Vector& mode, double amp) {
    Vector f(mode.size());
    for (Eigen::Index k = 0; k < mode.size(); ++k) {
        switch (kind) {
            case InequalityKind::PoincareWirtinger: f[k] = amp * mode[k]; break;
            case InequalityKind::Beckner: f[k] = std::max(0.0, 1.0 + amp * mode[k]); break;
            case InequalityKind::LogSobolev: f[k] = std::exp(amp * mode[k]); break;
        }
    }
    return f;
}

}  // namespace detail

// Calibration samples random smooth and extremal trial functions on every mesh;
// validation draws fresh random ones. Ratios are lhs / (weight seminorm).
inline CalibrationResult calibrate_inequality(const std::vector<PrimalMesh>& meshes, InequalityKind kind, double p,
                                              std::uint64_t seed, std::size_t calibration_draws,
                                              std::size_t validation_draws) {
    CalibrationResult res;
    res.family = to_string(kind);
    if (kind == InequalityKind::Beckner) res.family += "(p=" + std::to_string(p) + ")";
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto sample = [&](bool calibration, std::size_t draw) {
        const PrimalMesh& mesh = meshes[draw % meshes.size()];
        std::vector<Point> x;
        Vector m(static_cast<Eigen::Index>(mesh.num_cells()));
        for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
            x.push_back(mesh.cell(k).center);
            m[static_cast<Eigen::Index>(k)] = mesh.cell(k).area;
        }
        Vector mu = detail::random_density(x, m, rng);
        Vector mode;
        const double pick = unit(rng);
        if (calibration && pick < 0.5) {
            mode = detail::extremal_mode(mesh, mu);
        } else if (pick < 0.75) {
            mode = detail::random_mode(x, rng);
        } else {
            mode = Vector(m.size());
            for (Eigen::Index k = 0; k < m.size(); ++k) mode[k] = 2.0 * unit(rng) - 1.0;
        }
        const double amp = kind == InequalityKind::PoincareWirtinger ? 1.0 : 0.05 + 0.9 * unit(rng);
        Vector f = detail::trial_function(kind, mode, amp);
        auto s = verify_pw_beckner_logsob(mesh, mu, f, kind, p);
        res.contradiction = res.contradiction || s.contradiction;
        return s.ratio;
    };
    for (std::size_t i = 0; i < calibration_draws; ++i) res.calibration_max = std::max(res.calibration_max, sample(true, i));
    for (std::size_t i = 0; i < validation_draws; ++i) res.validation_max = std::max(res.validation_max, sample(false, i));
    res.calibration_samples = calibration_draws;
    res.validation_samples = validation_draws;
    return res;
}

// --- time series ---

struct EntropyRecord {
    double t = 0.0;
    std::vector<double> entropies;  // one per requested exponent
    double dissipation = 0.0;       // I_1 at this state
    double dissipation_hat = std::numeric_limits<double>::quiet_NaN();  // square-root form, TPFA only
    double mass_primal = 0.0;
    double mass_dual = std::numeric_limits<double>::quiet_NaN();
    double l1 = 0.0, l2 = 0.0;
    int newton_iters = 0;
};

struct DiagnosticsSeries {
    std::vector<double> exponents{1.0, 2.0};
    std::vector<EntropyRecord> records;

    std::vector<double> times() const {
        std::vector<double> t;
        for (const auto& r : records) t.push_back(r.t);
        return t;
    }
    std::vector<double> column_entropy(std::size_t j) const {
        std::vector<double> v;
        for (const auto& r : records) v.push_back(r.entropies[j]);
        return v;
    }
    std::vector<double> column_l1() const {
        std::vector<double> v;
        for (const auto& r : records) v.push_back(r.l1);
        return v;
    }

    void write_csv(std::ostream& os) const {
        os << "t";
        for (double p : exponents) os << ",E" << p;
        os << ",I1,mass_primal,mass_dual,L1,L2,newton_iters,Ihat1\n";
        os << std::setprecision(12);
        for (const auto& r : records) {
            os << r.t;
            for (double e : r.entropies) os << ',' << e;
            os << ',' << r.dissipation << ',' << r.mass_primal << ',' << r.mass_dual << ',' << r.l1 << ',' << r.l2
               << ',' << r.newton_iters << ',' << r.dissipation_hat << '\n';
        }
    }
};

}  // namespace entrofv
