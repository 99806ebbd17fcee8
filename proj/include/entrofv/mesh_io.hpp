#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "mesh.hpp"

namespace entrofv {

// Plain text format:
//   fvmesh 1
//   vertices N      then N lines "x y"
//   cells M         then M lines "k v1 ... vk [cx cy]"
//   boundary B      then B lines "v1 v2 tag", tag in {dirichlet, neumann}
// Blank lines and text after '#' are ignored. Untagged boundary edges are Neumann.

class MeshParseError : public MeshError {
public:
    MeshParseError(std::size_t line, const std::string& what)
        : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // next non-empty line with comments stripped; false at end of input
    bool next(std::istringstream& out) {
        std::string s;
        while (std::getline(in_, s)) {
            ++line_;
            if (auto h = s.find('#'); h != std::string::npos) s.erase(h);
            if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
            out.clear();
            out.str(s);
            return true;
        }
        return false;
    }
    std::istringstream require(const char* what) {
        std::istringstream ss;
        if (!next(ss)) throw MeshParseError(line_ + 1, std::string("unexpected end of file, expected ") + what);
        return ss;
    }
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

inline bool only_space_left(std::istringstream& ss) {
    std::string rest;
    return !(ss >> rest);
}

inline std::size_t read_section(LineReader& r, const char* name) {
    auto ss = r.require(name);
    std::string word;
    long long n = -1;
    if (!(ss >> word) || word != name || !(ss >> n) || n < 0 || !only_space_left(ss))
        throw MeshParseError(r.line(), std::string("expected '") + name + " <count>'");
    return static_cast<std::size_t>(n);
}

}  // namespace detail

inline PrimalMesh read_mesh(std::istream& in) {
    detail::LineReader r(in);
    {
        auto ss = r.require("header");
        std::string magic;
        int version = 0;
        if (!(ss >> magic >> version) || magic != "fvmesh" || version != 1 || !detail::only_space_left(ss))
            throw MeshParseError(r.line(), "expected header 'fvmesh 1'");
    }
    const std::size_t nv = detail::read_section(r, "vertices");
    std::vector<Point> verts(nv);
    for (auto& p : verts) {
        auto ss = r.require("vertex");
        if (!(ss >> p.x >> p.y) || !detail::only_space_left(ss)) throw MeshParseError(r.line(), "expected 'x y'");
    }

    const std::size_t nc = detail::read_section(r, "cells");
    std::vector<std::vector<std::size_t>> cells(nc);
    std::vector<std::optional<Point>> centers(nc);
    for (std::size_t k = 0; k < nc; ++k) {
        auto ss = r.require("cell");
        long long n = 0;
        if (!(ss >> n) || n < 3) throw MeshParseError(r.line(), "cell needs a vertex count of at least 3");
        for (long long i = 0; i < n; ++i) {
            long long v = -1;
            if (!(ss >> v) || v < 0) throw MeshParseError(r.line(), "bad vertex id in cell " + std::to_string(k));
            if (static_cast<std::size_t>(v) >= nv)
                throw MeshParseError(r.line(), "cell " + std::to_string(k) + " references missing vertex " + std::to_string(v));
            cells[k].push_back(static_cast<std::size_t>(v));
        }
        Point c;
        if (ss >> c.x) {
            if (!(ss >> c.y) || !detail::only_space_left(ss))
                throw MeshParseError(r.line(), "cell center needs two coordinates");
            centers[k] = c;
        } else if (!ss.eof()) {
            throw MeshParseError(r.line(), "unexpected token in cell " + std::to_string(k));
        }
    }

    std::map<std::pair<std::size_t, std::size_t>, EdgeKind> tags;
    std::size_t nb = 0;
    {
        std::istringstream ss;
        if (r.next(ss)) {
            std::string word;
            long long n = -1;
            if (!(ss >> word) || word != "boundary" || !(ss >> n) || n < 0 || !detail::only_space_left(ss))
                throw MeshParseError(r.line(), "expected 'boundary <count>'");
            nb = static_cast<std::size_t>(n);
        }
    }
    for (std::size_t b = 0; b < nb; ++b) {
        auto ss = r.require("boundary edge");
        long long a = -1, c = -1;
        std::string tag;
        if (!(ss >> a >> c >> tag) || a < 0 || c < 0 || !detail::only_space_left(ss))
            throw MeshParseError(r.line(), "expected 'v1 v2 tag'");
        EdgeKind kind;
        if (tag == "dirichlet") kind = EdgeKind::Dirichlet;
        else if (tag == "neumann") kind = EdgeKind::Neumann;
        else throw MeshParseError(r.line(), "unknown boundary tag '" + tag + "'");
        auto lo = static_cast<std::size_t>(std::min(a, c)), hi = static_cast<std::size_t>(std::max(a, c));
        tags[{lo, hi}] = kind;
    }
    {
        std::istringstream ss;
        if (r.next(ss)) throw MeshParseError(r.line(), "trailing content after boundary section");
    }

    auto tagger = [tags = std::move(tags)](std::size_t a, std::size_t b, Point) {
        auto it = tags.find({std::min(a, b), std::max(a, b)});
        return it == tags.end() ? EdgeKind::Neumann : it->second;
    };
    return PrimalMesh::build(std::move(verts), std::move(cells), std::move(centers), tagger);
}

inline PrimalMesh import_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file " + path);
    return read_mesh(in);
}

inline void write_mesh(std::ostream& out, const PrimalMesh& m) {
    out << "fvmesh 1\n" << std::setprecision(17);
    out << "vertices " << m.num_vertices() << '\n';
    for (const auto& p : m.vertices()) out << p.x << ' ' << p.y << '\n';
    out << "cells " << m.num_cells() << '\n';
    for (const auto& c : m.cells()) {
        out << c.vertices.size();
        for (auto v : c.vertices) out << ' ' << v;
        out << ' ' << c.center.x << ' ' << c.center.y << '\n';
    }
    std::size_t nb = 0;
    for (const auto& e : m.edges()) nb += e.boundary();
    out << "boundary " << nb << '\n';
    for (const auto& e : m.edges())
        if (e.boundary()) out << e.vertices[0] << ' ' << e.vertices[1] << ' ' << to_string(e.kind) << '\n';
}

inline std::string export_mesh(const PrimalMesh& m) {
    std::ostringstream os;
    write_mesh(os, m);
    return os.str();
}

inline void export_mesh(const PrimalMesh& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file " + path);
    write_mesh(out, m);
}

}  // namespace entrofv
