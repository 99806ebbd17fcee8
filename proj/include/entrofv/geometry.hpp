#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace entrofv {

struct Point {
    double x = 0.0;
    double y = 0.0;

    Point& operator+=(Point o) { x += o.x; y += o.y; return *this; }
    Point& operator-=(Point o) { x -= o.x; y -= o.y; return *this; }
    Point& operator*=(double s) { x *= s; y *= s; return *this; }
    friend Point operator+(Point a, Point b) { return a += b; }
    friend Point operator-(Point a, Point b) { return a -= b; }
    friend Point operator*(double s, Point a) { return a *= s; }
    friend Point operator*(Point a, double s) { return a *= s; }
    friend Point operator/(Point a, double s) { return {a.x / s, a.y / s}; }
    friend Point operator-(Point a) { return {-a.x, -a.y}; }
    friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(b - a); }
inline Point midpoint(Point a, Point b) { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
// counterclockwise quarter turn
inline Point perp(Point a) { return {-a.y, a.x}; }

inline double signed_area(std::span<const Point> poly) {
    double s = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * s;
}

inline double triangle_area(Point a, Point b, Point c) {
    return 0.5 * cross(b - a, c - a);
}

inline Point polygon_centroid(std::span<const Point> poly) {
    const std::size_t n = poly.size();
    // shift to the first vertex to limit cancellation
    const Point o = poly[0];
    double a = 0.0;
    Point c;
    for (std::size_t i = 0; i < n; ++i) {
        Point p = poly[i] - o, q = poly[(i + 1) % n] - o;
        double w = cross(p, q);
        a += w;
        c += w * (p + q);
    }
    if (a == 0.0) {
        Point m;
        for (auto p : poly) m += p;
        return m / static_cast<double>(n);
    }
    return o + c / (3.0 * a);
}

inline Point vertex_average(std::span<const Point> poly) {
    Point m;
    for (auto p : poly) m += p;
    return m / static_cast<double>(poly.size());
}

inline double polygon_diameter(std::span<const Point> poly) {
    double d = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, distance(poly[i], poly[j]));
    return d;
}

inline double distance_to_line(Point p, Point a, Point b) {
    Point t = b - a;
    return std::abs(cross(t, p - a)) / norm(t);
}

inline Point project_on_line(Point p, Point a, Point b) {
    Point t = b - a;
    return a + (dot(p - a, t) / dot(t, t)) * t;
}

inline Point circumcenter(Point a, Point b, Point c) {
    Point ab = b - a, ac = c - a;
    double d = 2.0 * cross(ab, ac);
    double b2 = dot(ab, ab), c2 = dot(ac, ac);
    return a + Point{(ac.y * b2 - ab.y * c2) / d, (ab.x * c2 - ac.x * b2) / d};
}

// closed polygon, either orientation; tol is an absolute distance
inline bool point_in_polygon(Point p, std::span<const Point> poly, double tol = 1e-12) {
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        Point a = poly[j], b = poly[i];
        Point t = b - a;
        double len = norm(t);
        double s = dot(p - a, t) / (len * len);
        if (s >= -tol / len && s <= 1.0 + tol / len && std::abs(cross(t, p - a)) / len <= tol) return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            double xc = a.x + (p.y - a.y) * t.x / t.y;
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

inline bool is_convex(std::span<const Point> poly) {
    const std::size_t n = poly.size();
    double sign = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double c = cross(poly[(i + 1) % n] - poly[i], poly[(i + 2) % n] - poly[(i + 1) % n]);
        if (c == 0.0) continue;
        if (sign == 0.0) sign = c;
        else if ((c > 0) != (sign > 0)) return false;
    }
    return true;
}

// Sutherland-Hodgman; clip must be convex and counterclockwise
inline std::vector<Point> clip_polygon(std::vector<Point> subject, std::span<const Point> clip) {
    const std::size_t m = clip.size();
    for (std::size_t e = 0; e < m && !subject.empty(); ++e) {
        Point a = clip[e], b = clip[(e + 1) % m];
        auto side = [&](Point p) { return cross(b - a, p - a); };
        std::vector<Point> out;
        const std::size_t n = subject.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point p = subject[i], q = subject[(i + 1) % n];
            double sp = side(p), sq = side(q);
            if (sp >= 0) out.push_back(p);
            if ((sp >= 0) != (sq >= 0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
        }
        subject = std::move(out);
    }
    return subject;
}

// symmetric 2x2 tensor
struct Tensor2 {
    double xx = 1.0, xy = 0.0, yy = 1.0;

    Point apply(Point v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    double form(Point a, Point b) const { return dot(a, apply(b)); }
    bool is_scalar() const { return xy == 0.0 && xx == yy; }
    friend bool operator==(const Tensor2&, const Tensor2&) = default;
};

enum class Quadrature { Centroid, EdgeMidpoints };

// mean value of f over a simple polygon
template <class F>
double polygon_average(std::span<const Point> poly, F&& f, Quadrature q = Quadrature::Centroid) {
    const Point c = polygon_centroid(poly);
    if (q == Quadrature::Centroid) return f(c);
    // fan from the centroid, exact for quadratics on each sub-triangle
    double acc = 0.0, area = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point a = poly[i], b = poly[(i + 1) % n];
        double t = triangle_area(c, a, b);
        acc += t * (f(midpoint(c, a)) + f(midpoint(a, b)) + f(midpoint(b, c))) / 3.0;
        area += t;
    }
    return acc / area;
}

}  // namespace entrofv
