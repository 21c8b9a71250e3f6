#pragma once

#include "surfmean/grid.hpp"
#include "surfmean/stencil.hpp"

#include <utility>

namespace surfmean {

/// First-order differential geometry of a sampled surface, node by node.
///
/// Quantities follow the usual embedded-surface notation: covariant basis
/// S_u, S_v; normal N = S_u x S_v with length |N| = sqrt(g); unit normal n;
/// contravariant basis S^u = (S_v x n) / |N|, S^v = (n x S_u) / |N|; and
/// the Christoffel divergences d ln|N| / du, d ln|N| / dv.
///
/// Nodes where |N| falls below the degeneracy threshold are flagged invalid.
/// On those nodes n, the contravariant basis and both divergences are zero.
struct GeometryCache {
    GridMeta meta;
    VectorField S_u;
    VectorField S_v;
    VectorField N;
    ScalarField normN;
    VectorField n;
    VectorField Su_contra;
    VectorField Sv_contra;
    ScalarField gamma_u;
    ScalarField gamma_v;
    Mask valid;
    double eps_N = 0.0;

    std::size_t valid_count() const
    {
        std::size_t c = 0;
        for (auto f : valid) {
            c += f != 0;
        }
        return c;
    }
};

/// Covariant basis by the axis stencils (see differentiate()).
inline std::pair<VectorField, VectorField> partial_derivatives(const SurfaceGrid& grid)
{
    return {differentiate(grid.positions(), Axis::u), differentiate(grid.positions(), Axis::v)};
}

inline double default_eps_N(const SurfaceGrid& grid)
{
    const double d = grid.bbox_diagonal();
    return 1e-10 * d * d;
}

inline GeometryCache build_geometry(const SurfaceGrid& grid, double eps_N)
{
    const GridMeta& m = grid.meta();
    GeometryCache c;
    c.meta = m;
    c.eps_N = eps_N;
    std::tie(c.S_u, c.S_v) = partial_derivatives(grid);
    c.N = VectorField(m);
    c.normN = ScalarField(m);
    c.n = VectorField(m);
    c.Su_contra = VectorField(m);
    c.Sv_contra = VectorField(m);
    c.valid = Mask(m);

    ScalarField logN(m);
    bool any_valid = false;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Vec3 N = c.S_u[k].cross(c.S_v[k]);
        const double len = N.norm();
        c.N[k] = N;
        c.normN[k] = len;
        if (len >= eps_N && len > 0.0 && std::isfinite(len)) {
            const Vec3 n = N / len;
            c.valid[k] = 1;
            c.n[k] = n;
            c.Su_contra[k] = c.S_v[k].cross(n) / len;
            c.Sv_contra[k] = n.cross(c.S_u[k]) / len;
            logN[k] = std::log(len);
            any_valid = true;
        }
    }
    if (!any_valid) {
        throw Error(ErrorCode::all_degenerate, "every node has |N| below " + std::to_string(eps_N));
    }
    c.gamma_u = differentiate_masked(logN, c.valid, Axis::u);
    c.gamma_v = differentiate_masked(logN, c.valid, Axis::v);
    return c;
}

inline GeometryCache build_geometry(const SurfaceGrid& grid)
{
    return build_geometry(grid, default_eps_N(grid));
}

/// Quadrature of |N| over the valid nodes.
inline double surface_area(const GeometryCache& cache)
{
    return integrate(cache.normN, cache.valid);
}

/// Quadrature of |S - origin|^2 |N| over the valid nodes; equals the squared
/// L2 norm of the RPSN field about `origin`.
inline double second_moment(const GeometryCache& cache, const SurfaceGrid& grid, const Vec3& origin)
{
    require_same_shape(cache.meta, grid.meta(), "second_moment");
    ScalarField density(cache.meta);
    for (std::size_t k = 0; k < density.size(); ++k) {
        density[k] = (grid[k] - origin).squaredNorm() * cache.normN[k];
    }
    return integrate(density, cache.valid);
}

/// A sampled surface bundled with its geometry.
struct SampledSurface {
    SurfaceGrid grid;
    GeometryCache cache;

    static SampledSurface from(SurfaceGrid g)
    {
        GeometryCache c = build_geometry(g);
        return {std::move(g), std::move(c)};
    }

    static SampledSurface from(SurfaceGrid g, double eps_N)
    {
        GeometryCache c = build_geometry(g, eps_N);
        return {std::move(g), std::move(c)};
    }
};

} // namespace surfmean
