#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace entrofv {

enum class MeanKind { Arithmetic, Logarithmic, SqrtSquare, Max };

inline constexpr std::array<MeanKind, 4> all_means{MeanKind::Arithmetic, MeanKind::Logarithmic, MeanKind::SqrtSquare,
                                                   MeanKind::Max};

inline const char* to_string(MeanKind k) {
    switch (k) {
        case MeanKind::Arithmetic: return "arithmetic";
        case MeanKind::Logarithmic: return "logarithmic";
        case MeanKind::SqrtSquare: return "sqrtsquare";
        case MeanKind::Max: return "max";
    }
    return "?";
}

inline MeanKind parse_mean(std::string_view s) {
    if (s == "arithmetic") return MeanKind::Arithmetic;
    if (s == "logarithmic" || s == "log") return MeanKind::Logarithmic;
    if (s == "sqrtsquare" || s == "sqrt") return MeanKind::SqrtSquare;
    if (s == "max") return MeanKind::Max;
    throw std::invalid_argument("unknown mean '" + std::string(s) + "'");
}

struct MeanValue {
    double value;
    double dx;  // d/dx
    double dy;  // d/dy
};

namespace detail {

// f(u) = (e^u - 1)/u and f'(u) as truncated series, |u| < 1e-2
inline void expm1_ratio_series(double u, double& f, double& df) {
    f = 1.0 + u * (1.0 / 2 + u * (1.0 / 6 + u * (1.0 / 24 + u * (1.0 / 120 + u * (1.0 / 720 + u / 5040)))));
    df = 1.0 / 2 + u * (1.0 / 3 + u * (1.0 / 8 + u * (1.0 / 30 + u * (1.0 / 144 + u / 840))));
}

inline void check_positive(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::domain_error("mean requires positive arguments, got " + std::to_string(x) + ", " + std::to_string(y));
}

// x <= y assumed; the caller orders the arguments so the result is symmetric bit for bit
inline MeanValue log_mean_ordered(double x, double y) {
    // r = x f(u), u = log(y/x)
    const double u = std::log1p((y - x) / x);
    double f, df;
    if (u < 1e-2) {
        expm1_ratio_series(u, f, df);
    } else {
        const double em1 = std::expm1(u);
        f = em1 / u;
        df = (u * (em1 + 1.0) - em1) / (u * u);
    }
    return {x * f, f - df, df * x / y};
}

}  // namespace detail

inline MeanValue mean_with_derivatives(MeanKind kind, double x, double y) {
    detail::check_positive(x, y);
    switch (kind) {
        case MeanKind::Arithmetic: return {0.5 * (x + y), 0.5, 0.5};
        case MeanKind::Logarithmic: {
            if (x <= y) return detail::log_mean_ordered(x, y);
            auto m = detail::log_mean_ordered(y, x);
            return {m.value, m.dy, m.dx};
        }
        case MeanKind::SqrtSquare: {
            const double sx = std::sqrt(x), sy = std::sqrt(y);
            const double h = 0.5 * (sx + sy);
            return {h * h, 0.5 * h / sx, 0.5 * h / sy};
        }
        case MeanKind::Max:
            if (x > y) return {x, 1.0, 0.0};
            if (y > x) return {y, 0.0, 1.0};
            return {x, 0.5, 0.5};
    }
    throw std::invalid_argument("bad mean kind");
}

inline double mean(MeanKind kind, double x, double y) { return mean_with_derivatives(kind, x, y).value; }

// Entropy generators: p == 1 gives s log s - s + 1, p in (1,2] gives (s^p - p s)/(p-1) + 1.
class EntropyGenerator {
public:
    explicit EntropyGenerator(double p = 1.0) : p_(p) {
        if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("entropy exponent must lie in [1, 2]");
    }
    double p() const { return p_; }

    double phi(double s) const {
        if (!(s >= 0.0)) throw std::domain_error("entropy generator needs s >= 0, got " + std::to_string(s));
        if (s == 0.0) return 1.0;
        const double d = s - 1.0;
        if (p_ == 1.0) return s * std::log1p(d) - d;
        // written around s = 1 to keep relative accuracy for small |s-1|
        return (std::expm1(p_ * std::log1p(d)) - p_ * d) / (p_ - 1.0);
    }

    double phi_prime(double s) const {
        if (p_ == 1.0) {
            if (!(s > 0.0)) throw std::domain_error("log entropy derivative needs s > 0, got " + std::to_string(s));
            return std::log(s);
        }
        if (!(s >= 0.0)) throw std::domain_error("entropy derivative needs s >= 0, got " + std::to_string(s));
        return p_ * (std::pow(s, p_ - 1.0) - 1.0) / (p_ - 1.0);
    }

private:
    double p_;
};

inline double phi(double p, double s) { return EntropyGenerator(p).phi(s); }
inline double phi_prime(double p, double s) { return EntropyGenerator(p).phi_prime(s); }

namespace detail {
// absolute slack for O(1) magnitudes, relative beyond
inline bool leq_with_slack(double lhs, double rhs, double slack = 1e-12) {
    return lhs <= rhs + slack * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}
}  // namespace detail

namespace detail {
// Both sides of the elementary inequalities agree to leading order near x = y, so they are
// written as y^q expm1(q L) with L = log(x/y) instead of differences of powers.
struct Ratio {
    double d;  // x/y - 1
    double l;  // log(x/y)
};

inline Ratio ratio(double x, double y) {
    if (!(x > 0) || !(y > 0)) throw std::domain_error("inequality arguments must be positive");
    const double d = (x - y) / y;
    return {d, std::log1p(d)};
}

// expm1(p l) - p expm1(l)
inline double expm1_defect(double p, double l) {
    if (std::abs(l) > 0.1) return std::expm1(p * l) - p * std::expm1(l);
    double s = 0.0, term = 1.0, pk = 1.0;
    for (int k = 1; k <= 20; ++k) {
        term *= l / k;
        pk *= p;
        s += (pk - p) * term;
    }
    return s;
}
}  // namespace detail

// (4/p)(x^{p/2} - y^{p/2})^2 <= (x - y)(phi'_p(x) - phi'_p(y))
inline bool check_ineq_func(double p, double x, double y) {
    const EntropyGenerator g(p);
    const auto [d, l] = detail::ratio(x, y);
    const double yp = std::pow(y, p);
    const double a = std::expm1(0.5 * p * l);
    const double rhs = p == 1.0 ? y * d * l : yp * d * p * std::expm1((p - 1.0) * l) / (p - 1.0);
    return detail::leq_with_slack(4.0 / p * yp * a * a, rhs);
}

// (x^{p/2} - y^{p/2})^2 >= x^p - y^p - p y^{p-1}(x - y)
inline bool check_ineq_sub_quadratic(double p, double x, double y) {
    const auto [d, l] = detail::ratio(x, y);
    const double yp = std::pow(y, p);
    const double a = std::expm1(0.5 * p * l);
    return detail::leq_with_slack(yp * detail::expm1_defect(p, l), yp * a * a);
}

// 4 (sqrt x - sqrt y)^2 <= (x - y)(log x - log y)
inline bool check_sqrt_log_ineq(double x, double y) {
    const auto [d, l] = detail::ratio(x, y);
    const double a = std::expm1(0.5 * l);
    return detail::leq_with_slack(4.0 * y * a * a, y * d * l);
}

}  // namespace entrofv
