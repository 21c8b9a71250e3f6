#pragma once

#include "surfmean/geometry.hpp"

namespace surfmean {

enum class RepKind { srnf, rpsn };

inline const char* to_string(RepKind kind) { return kind == RepKind::srnf ? "srnf" : "rpsn"; }

/// A representation field on the node grid:
///   SRNF  P = n sqrt|N|
///   RPSN  Q = (S - origin) sqrt|N|
/// Masked (degenerate) nodes carry zero.
struct RepField {
    RepKind kind = RepKind::rpsn;
    VectorField values;
    Vec3 origin = Vec3::Zero();

    const GridMeta& meta() const { return values.meta(); }
};

inline RepField srnf(const SurfaceGrid& grid, const GeometryCache& cache)
{
    require_same_shape(grid.meta(), cache.meta, "srnf");
    RepField r{RepKind::srnf, VectorField(cache.meta), Vec3::Zero()};
    for (std::size_t k = 0; k < r.values.size(); ++k) {
        if (cache.valid[k]) {
            r.values[k] = cache.n[k] * std::sqrt(cache.normN[k]);
        }
    }
    return r;
}

inline RepField rpsn(const SurfaceGrid& grid, const GeometryCache& cache, const Vec3& origin = Vec3::Zero())
{
    require_same_shape(grid.meta(), cache.meta, "rpsn");
    RepField r{RepKind::rpsn, VectorField(cache.meta), origin};
    for (std::size_t k = 0; k < r.values.size(); ++k) {
        if (cache.valid[k]) {
            r.values[k] = (grid[k] - origin) * std::sqrt(cache.normN[k]);
        }
    }
    return r;
}

inline RepField representation(RepKind kind, const SurfaceGrid& grid, const GeometryCache& cache,
                               const Vec3& origin = Vec3::Zero())
{
    return kind == RepKind::srnf ? srnf(grid, cache) : rpsn(grid, cache, origin);
}

inline RepField representation(RepKind kind, const SampledSurface& s, const Vec3& origin = Vec3::Zero())
{
    return representation(kind, s.grid, s.cache, origin);
}

/// Analytic partials of the representation from cached geometry:
///   P_w = sqrt|N| (n_w + n/2 Gamma_w),   Q_w = sqrt|N| (S_w + (S - origin)/2 Gamma_w)
/// with n_w taken by masked differences of the unit normal field.
inline std::pair<VectorField, VectorField> rep_partials(RepKind kind, const SurfaceGrid& grid,
                                                        const GeometryCache& cache,
                                                        const Vec3& origin = Vec3::Zero())
{
    require_same_shape(grid.meta(), cache.meta, "rep_partials");
    const GridMeta& m = cache.meta;
    VectorField pu(m), pv(m);
    if (kind == RepKind::srnf) {
        const VectorField n_u = differentiate_masked(cache.n, cache.valid, Axis::u);
        const VectorField n_v = differentiate_masked(cache.n, cache.valid, Axis::v);
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (!cache.valid[k]) {
                continue;
            }
            const double s = std::sqrt(cache.normN[k]);
            pu[k] = s * (n_u[k] + 0.5 * cache.gamma_u[k] * cache.n[k]);
            pv[k] = s * (n_v[k] + 0.5 * cache.gamma_v[k] * cache.n[k]);
        }
    } else {
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (!cache.valid[k]) {
                continue;
            }
            const double s = std::sqrt(cache.normN[k]);
            const Vec3 x = grid[k] - origin;
            pu[k] = s * (cache.S_u[k] + 0.5 * cache.gamma_u[k] * x);
            pv[k] = s * (cache.S_v[k] + 0.5 * cache.gamma_v[k] * x);
        }
    }
    return {std::move(pu), std::move(pv)};
}

/// Squared L2 norm of a representation, i.e. area (SRNF) or second moment
/// about the field's origin (RPSN).
inline double norm_sq(const RepField& a)
{
    ScalarField d(a.meta());
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = a.values[k].squaredNorm();
    }
    return integrate(d);
}

/// Squared L2 distance between two representation fields of the same kind.
inline double distance_sq(const RepField& a, const RepField& b)
{
    if (a.kind != b.kind) {
        throw Error(ErrorCode::kind_mismatch, std::string("cannot compare ") + to_string(a.kind) + " with " +
                                                   to_string(b.kind));
    }
    require_same_shape(a.meta(), b.meta(), "distance_sq");
    if (a.kind == RepKind::rpsn && a.origin != b.origin) {
        throw Error(ErrorCode::origin_mismatch, "RPSN fields are taken about different origins");
    }
    ScalarField d(a.meta());
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = (a.values[k] - b.values[k]).squaredNorm();
    }
    return integrate(d);
}

} // namespace surfmean
