#pragma once

#include "surfmean/grid.hpp"
#include "surfmean/warp.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace surfmean {

// SGRID text container:
//
//   SGRID 1 <nu> <nv> <u_mode> <v_mode>      modes are P (periodic) or C (clamped)
//   x y z                                    nu*nv lines, v slow, u fast
//
// '#' starts a comment line; blank lines are ignored anywhere. Warps use the
// same container with (x, y, z) = (mu, nu, 0).

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t k = 0;
    while (k < s.size()) {
        while (k < s.size() && (s[k] == ' ' || s[k] == '\t')) {
            ++k;
        }
        const std::size_t start = k;
        while (k < s.size() && s[k] != ' ' && s[k] != '\t') {
            ++k;
        }
        if (k > start) {
            out.push_back(s.substr(start, k - start));
        }
    }
    return out;
}

inline double parse_double(std::string_view tok, int line)
{
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(x)) {
        throw ParseError(line, "not a finite number: '" + std::string(tok) + "'");
    }
    return x;
}

inline int parse_count(std::string_view tok, int line)
{
    int x = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || x <= 0) {
        throw ParseError(line, "bad node count '" + std::string(tok) + "'");
    }
    return x;
}

inline AxisMode parse_mode(std::string_view tok, int line)
{
    if (tok == "P") {
        return AxisMode::periodic;
    }
    if (tok == "C") {
        return AxisMode::clamped;
    }
    throw ParseError(line, "axis mode must be P or C, got '" + std::string(tok) + "'");
}

inline char mode_letter(AxisMode m) { return m == AxisMode::periodic ? 'P' : 'C'; }

inline std::string format_g17(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

/// Raw SGRID contents: shape plus one 3-vector per node. No geometric validation.
inline VectorField read_sgrid_field(std::istream& in)
{
    std::string raw;
    int line = 0;
    bool have_header = false;
    GridMeta meta;
    std::vector<Vec3> values;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view s = detail::trim(raw);
        if (s.empty() || s.front() == '#') {
            continue;
        }
        const auto tok = detail::split_ws(s);
        if (!have_header) {
            if (tok.size() != 6 || tok[0] != "SGRID") {
                throw ParseError(line, "expected header 'SGRID 1 <nu> <nv> <u_mode> <v_mode>'");
            }
            if (tok[1] != "1") {
                throw ParseError(line, "unsupported SGRID version '" + std::string(tok[1]) + "'");
            }
            meta.nu = detail::parse_count(tok[2], line);
            meta.nv = detail::parse_count(tok[3], line);
            meta.topology = {detail::parse_mode(tok[4], line), detail::parse_mode(tok[5], line)};
            values.reserve(meta.size());
            have_header = true;
            continue;
        }
        if (tok.size() != 3) {
            throw ParseError(line, "expected 3 values, found " + std::to_string(tok.size()));
        }
        if (values.size() == meta.size()) {
            throw ParseError(line, "expected " + std::to_string(meta.size()) + " data lines, found more");
        }
        values.emplace_back(detail::parse_double(tok[0], line), detail::parse_double(tok[1], line),
                            detail::parse_double(tok[2], line));
    }
    if (!have_header) {
        throw ParseError(line, "missing SGRID header");
    }
    if (values.size() != meta.size()) {
        throw ParseError(line, "expected " + std::to_string(meta.size()) + " data lines, found " +
                                   std::to_string(values.size()));
    }
    return VectorField(meta, std::move(values));
}

inline void write_sgrid_field(const VectorField& f, std::ostream& out)
{
    const GridMeta& m = f.meta();
    out << "SGRID 1 " << m.nu << ' ' << m.nv << ' ' << detail::mode_letter(m.topology.u_mode) << ' '
        << detail::mode_letter(m.topology.v_mode) << '\n';
    for (const Vec3& p : f) {
        out << detail::format_g17(p.x()) << ' ' << detail::format_g17(p.y()) << ' ' << detail::format_g17(p.z())
            << '\n';
    }
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open '" + path + "' for reading");
    }
    return in;
}

inline std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    }
    return out;
}

inline void finish_output(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out) {
        throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
    }
}

inline SurfaceGrid read_sgrid(std::istream& in) { return SurfaceGrid(read_sgrid_field(in)); }

inline SurfaceGrid read_sgrid(const std::string& path)
{
    auto in = open_input(path);
    return read_sgrid(in);
}

inline void write_sgrid(const SurfaceGrid& grid, std::ostream& out) { write_sgrid_field(grid.positions(), out); }

inline void write_sgrid(const SurfaceGrid& grid, const std::string& path)
{
    auto out = open_output(path);
    write_sgrid(grid, out);
    finish_output(out, path);
}

inline ReparamField read_warp(std::istream& in)
{
    const VectorField f = read_sgrid_field(in);
    validate_meta(f.meta());
    ScalarField mu(f.meta()), nu(f.meta());
    for (std::size_t k = 0; k < f.size(); ++k) {
        mu[k] = f[k].x();
        nu[k] = f[k].y();
    }
    return ReparamField(std::move(mu), std::move(nu));
}

inline ReparamField read_warp(const std::string& path)
{
    auto in = open_input(path);
    return read_warp(in);
}

inline void write_warp(const ReparamField& warp, std::ostream& out)
{
    VectorField f(warp.meta());
    for (std::size_t k = 0; k < f.size(); ++k) {
        f[k] = Vec3(warp.mu()[k], warp.nu()[k], 0.0);
    }
    write_sgrid_field(f, out);
}

inline void write_warp(const ReparamField& warp, const std::string& path)
{
    auto out = open_output(path);
    write_warp(warp, out);
    finish_output(out, path);
}

/// Wavefront OBJ: vertices in grid order, one quad per cell with 1-based
/// indices. Periodic axes get the wrap-around cells.
inline void export_obj(const SurfaceGrid& grid, std::ostream& out)
{
    const GridMeta& m = grid.meta();
    for (const Vec3& p : grid.positions()) {
        out << "v " << detail::format_g17(p.x()) << ' ' << detail::format_g17(p.y()) << ' '
            << detail::format_g17(p.z()) << '\n';
    }
    const int cu = m.topology.u_mode == AxisMode::periodic ? m.nu : m.nu - 1;
    const int cv = m.topology.v_mode == AxisMode::periodic ? m.nv : m.nv - 1;
    auto id = [&](int i, int j) { return m.index(i % m.nu, j % m.nv) + 1; };
    for (int j = 0; j < cv; ++j) {
        for (int i = 0; i < cu; ++i) {
            out << "f " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1) << ' ' << id(i, j + 1) << '\n';
        }
    }
}

inline void export_obj(const SurfaceGrid& grid, const std::string& path)
{
    auto out = open_output(path);
    export_obj(grid, out);
    finish_output(out, path);
}

struct ObjMesh {
    std::vector<Vec3> vertices;
    std::vector<std::vector<int>> faces;
};

/// Minimal OBJ reader: 'v' and 'f' records only, texture/normal indices dropped.
inline ObjMesh read_obj(std::istream& in)
{
    ObjMesh mesh;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto tok = detail::split_ws(detail::trim(raw));
        if (tok.empty() || tok[0].front() == '#') {
            continue;
        }
        if (tok[0] == "v") {
            if (tok.size() < 4) {
                throw ParseError(line, "vertex needs 3 coordinates");
            }
            mesh.vertices.emplace_back(detail::parse_double(tok[1], line), detail::parse_double(tok[2], line),
                                       detail::parse_double(tok[3], line));
        } else if (tok[0] == "f") {
            std::vector<int> face;
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const std::string_view t = tok[k].substr(0, tok[k].find('/'));
                const int idx = detail::parse_count(t, line);
                if (idx > static_cast<int>(mesh.vertices.size())) {
                    throw ParseError(line, "face index " + std::to_string(idx) + " out of range");
                }
                face.push_back(idx);
            }
            if (face.size() < 3) {
                throw ParseError(line, "face needs at least 3 vertices");
            }
            mesh.faces.push_back(std::move(face));
        }
    }
    return mesh;
}

inline ObjMesh read_obj(const std::string& path)
{
    auto in = open_input(path);
    return read_obj(in);
}

} // namespace surfmean
