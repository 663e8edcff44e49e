#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fracop/errors.hpp"
#include "fracop/qfield.hpp"

namespace fracop {

namespace io_detail {

inline std::string fmt_full(double v) {
    // Shortest round-trippable decimal form.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = 0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char b2[32];
            std::snprintf(b2, sizeof b2, "%.*g", prec, v);
            std::sscanf(b2, "%lf", &back);
            if (back == v) return b2;
        }
    }
    return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

inline double parse_double(const std::string& s, const std::string& ctx) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw IoError("malformed number '" + s + "' in " + ctx);
    }
}

inline long parse_int(const std::string& s, const std::string& ctx) {
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw IoError("malformed integer '" + s + "' in " + ctx);
    }
}

struct Header {
    int nx, ny, nz;
    double h, ox, oy, oz;
};

inline Header parse_header(const std::string& line, const std::string& tag,
                           const std::string& path) {
    const auto f = split_csv(line);
    if (f.size() != 8 || f[0] != tag)
        throw IoError(path + ": expected header '" + tag + ",nx,ny,nz,h,ox,oy,oz'");
    Header hd{};
    hd.nx = static_cast<int>(parse_int(f[1], path + " header"));
    hd.ny = static_cast<int>(parse_int(f[2], path + " header"));
    hd.nz = static_cast<int>(parse_int(f[3], path + " header"));
    hd.h = parse_double(f[4], path + " header");
    hd.ox = parse_double(f[5], path + " header");
    hd.oy = parse_double(f[6], path + " header");
    hd.oz = parse_double(f[7], path + " header");
    if (hd.nx < 3 || hd.ny < 3 || hd.nz < 3)
        throw IoError(path + ": header dimensions must be >= 3 per axis");
    if (!(hd.h > 0)) throw IoError(path + ": header spacing h must be positive");
    return hd;
}

}  // namespace io_detail

/// Field file: one header line `QFIELD,nx,ny,nz,h,ox,oy,oz`, then one line
/// per node in x-fastest order `i,j,k,u0,u1,u2,u3`. Values round-trip at
/// full double precision.
inline void save_qfield(const QField& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    const Grid& g = u.grid;
    os << "QFIELD," << g.nx << "," << g.ny << "," << g.nz << "," << io_detail::fmt_full(g.h)
       << "," << io_detail::fmt_full(g.origin[0]) << "," << io_detail::fmt_full(g.origin[1])
       << "," << io_detail::fmt_full(g.origin[2]) << "\n";
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const Quaternion q = u.q(g.index(i, j, k));
                os << i << "," << j << "," << k << "," << io_detail::fmt_full(q.w) << ","
                   << io_detail::fmt_full(q.x) << "," << io_detail::fmt_full(q.y) << ","
                   << io_detail::fmt_full(q.z) << "\n";
            }
    if (!os) throw IoError("write failure on '" + path + "'");
}

inline QField load_qfield(const std::string& path,
                          BoundaryKind kind = BoundaryKind::dirichlet) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw IoError(path + ": empty file");
    const auto hd = io_detail::parse_header(line, "QFIELD", path);
    Grid g(hd.nx, hd.ny, hd.nz, hd.h, {hd.ox, hd.oy, hd.oz}, kind);
    QField u(g);
    std::int64_t expected = 0;
    const std::int64_t total = g.node_count();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (expected >= total) throw IoError(path + ": more node lines than nx*ny*nz");
        const auto f = io_detail::split_csv(line);
        if (f.size() != 7) throw IoError(path + ": expected 'i,j,k,u0,u1,u2,u3'");
        const long i = io_detail::parse_int(f[0], path);
        const long j = io_detail::parse_int(f[1], path);
        const long k = io_detail::parse_int(f[2], path);
        if (g.index(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)) != expected)
            throw IoError(path + ": node lines out of x-fastest order at line for (" +
                          std::to_string(i) + "," + std::to_string(j) + "," +
                          std::to_string(k) + ")");
        Quaternion q{io_detail::parse_double(f[3], path), io_detail::parse_double(f[4], path),
                     io_detail::parse_double(f[5], path), io_detail::parse_double(f[6], path)};
        if (!q.is_finite())
            throw IoError(path + ": non-finite value at node (" + std::to_string(i) + "," +
                          std::to_string(j) + "," + std::to_string(k) + ")");
        u.set(expected, q);
        ++expected;
    }
    if (expected != total)
        throw IoError(path + ": node line count " + std::to_string(expected) +
                      " does not match header " + std::to_string(total));
    return u;
}

/// Coefficient file: same layout with a `COEFF` header and a single value
/// column per node.
inline void save_coeff_field(const Eigen::VectorXd& f, const Grid& g, const std::string& path) {
    if (f.size() != g.node_count()) throw GridMismatchError("save_coeff_field: size mismatch");
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << "COEFF," << g.nx << "," << g.ny << "," << g.nz << "," << io_detail::fmt_full(g.h)
       << "," << io_detail::fmt_full(g.origin[0]) << "," << io_detail::fmt_full(g.origin[1])
       << "," << io_detail::fmt_full(g.origin[2]) << "\n";
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                os << i << "," << j << "," << k << ","
                   << io_detail::fmt_full(f[g.index(i, j, k)]) << "\n";
    if (!os) throw IoError("write failure on '" + path + "'");
}

inline Eigen::VectorXd load_coeff_field(const std::string& path, const Grid& expect) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw IoError(path + ": empty file");
    const auto hd = io_detail::parse_header(line, "COEFF", path);
    if (hd.nx != expect.nx || hd.ny != expect.ny || hd.nz != expect.nz)
        throw IoError(path + ": coefficient grid does not match problem grid");
    Eigen::VectorXd f(expect.node_count());
    std::int64_t expected = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (expected >= f.size()) throw IoError(path + ": more node lines than nx*ny*nz");
        const auto fl = io_detail::split_csv(line);
        if (fl.size() != 4) throw IoError(path + ": expected 'i,j,k,value'");
        const double v = io_detail::parse_double(fl[3], path);
        if (!std::isfinite(v))
            throw IoError(path + ": non-finite value at node line " + std::to_string(expected));
        f[expected++] = v;
    }
    if (expected != f.size()) throw IoError(path + ": node line count mismatch");
    return f;
}

}  // namespace fracop
