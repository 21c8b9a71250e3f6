#pragma once

#include "surfmean/representations.hpp"
#include "surfmean/resample.hpp"
#include "surfmean/warp.hpp"

#include <Eigen/Dense>

#include <limits>

namespace surfmean {

inline constexpr double kDefaultDetFloor = 1e-6;

/// Node-wise Jacobian of a warp,
///   [J] = [dmu/du  dmu/dv; dnu/du  dnu/dv],  |J| = mu_u nu_v - mu_v nu_u,
/// its inverse where |J| exceeds the floor, and the partials of |J|.
struct JacobianField {
    GridMeta meta;
    ScalarField mu_u, mu_v, nu_u, nu_v;
    ScalarField det;
    Field<Eigen::Matrix2d> inverse;
    Mask invertible;
    ScalarField det_u, det_v;
    double det_floor = kDefaultDetFloor;

    Eigen::Matrix2d matrix(std::size_t k) const
    {
        Eigen::Matrix2d J;
        J << mu_u[k], mu_v[k], nu_u[k], nu_v[k];
        return J;
    }

    double min_det() const
    {
        double lo = std::numeric_limits<double>::infinity();
        for (double d : det) {
            lo = std::min(lo, d);
        }
        return lo;
    }
};

inline JacobianField jacobian(const ReparamField& warp, double det_floor = kDefaultDetFloor)
{
    const GridMeta& m = warp.meta();
    const auto [dmu, dnu] = warp.displacement();
    JacobianField J;
    J.meta = m;
    J.det_floor = det_floor;
    J.mu_u = differentiate(dmu, Axis::u);
    J.mu_v = differentiate(dmu, Axis::v);
    J.nu_u = differentiate(dnu, Axis::u);
    J.nu_v = differentiate(dnu, Axis::v);
    J.det = ScalarField(m);
    J.inverse = Field<Eigen::Matrix2d>(m, Eigen::Matrix2d::Zero());
    J.invertible = Mask(m);
    for (std::size_t k = 0; k < m.size(); ++k) {
        J.mu_u[k] += 1.0;
        J.nu_v[k] += 1.0;
        const double det = J.mu_u[k] * J.nu_v[k] - J.mu_v[k] * J.nu_u[k];
        J.det[k] = det;
        if (det > det_floor) {
            Eigen::Matrix2d inv;
            inv << J.nu_v[k], -J.mu_v[k], -J.nu_u[k], J.mu_u[k];
            J.inverse[k] = inv / det;
            J.invertible[k] = 1;
        }
    }
    J.det_u = differentiate(J.det, Axis::u);
    J.det_v = differentiate(J.det, Axis::v);
    return J;
}

struct ChristoffelPair {
    ScalarField gamma_mu;
    ScalarField gamma_nu;
    Mask valid;
};

/// Christoffel divergences of a surface with respect to (mu, nu), given the
/// divergences of its resampled version with respect to (u, v):
///   G_mu = nu_v/|J| (-|J|_u/|J| + G_u) - nu_u/|J| (-|J|_v/|J| + G_v)
///   G_nu = -mu_v/|J| (-|J|_u/|J| + G_u) + mu_u/|J| (-|J|_v/|J| + G_v)
/// Nodes with |J| at or below the floor are masked out with zero output.
inline ChristoffelPair transform_christoffel(const JacobianField& jac, const ScalarField& gamma_u,
                                             const ScalarField& gamma_v)
{
    require_same_shape(jac.meta, gamma_u.meta(), "transform_christoffel");
    require_same_shape(jac.meta, gamma_v.meta(), "transform_christoffel");
    ChristoffelPair out{ScalarField(jac.meta), ScalarField(jac.meta), Mask(jac.meta)};
    for (std::size_t k = 0; k < jac.meta.size(); ++k) {
        if (!jac.invertible[k]) {
            continue;
        }
        const double det = jac.det[k];
        const double a = -jac.det_u[k] / det + gamma_u[k];
        const double b = -jac.det_v[k] / det + gamma_v[k];
        out.gamma_mu[k] = (jac.nu_v[k] * a - jac.nu_u[k] * b) / det;
        out.gamma_nu[k] = (-jac.mu_v[k] * a + jac.mu_u[k] * b) / det;
        out.valid[k] = 1;
    }
    return out;
}

/// Functional gradient of the registration energy with respect to (mu, nu).
///
/// residual_w = A_w.B - A.B_w + 1/2 A.B (Gamma_w^R - Gamma_w^S), w in {u, v},
/// with (A, B) = (m, n) for SRNF and (R - origin, S - origin) for RPSN, and
///   (grad_mu, grad_nu) = sqrt(|M||N|) J^-T (residual_u, residual_v).
/// The gradient is the L2(du dv) density: the first variation of the energy
/// along (dmu, dnu) is the quadrature of grad_mu dmu + grad_nu dnu.
struct ELGradient {
    ScalarField grad_mu;
    ScalarField grad_nu;
    ScalarField residual_u;
    ScalarField residual_v;
};

/// `moving` is the moving surface already resampled through `warp`.
inline ELGradient el_gradient(const SampledSurface& reference, const SampledSurface& moving,
                              const ReparamField& warp, RepKind kind, const Vec3& origin = Vec3::Zero(),
                              double det_floor = kDefaultDetFloor)
{
    const GridMeta& m = reference.grid.meta();
    require_same_shape(m, moving.grid.meta(), "el_gradient");
    require_same_shape(m, warp.meta(), "el_gradient");
    const GeometryCache& rc = reference.cache;
    const GeometryCache& mc = moving.cache;
    const JacobianField jac = jacobian(warp, det_floor);

    ELGradient g{ScalarField(m), ScalarField(m), ScalarField(m), ScalarField(m)};

    VectorField A_u, A_v, B_u, B_v;
    if (kind == RepKind::srnf) {
        A_u = differentiate_masked(rc.n, rc.valid, Axis::u);
        A_v = differentiate_masked(rc.n, rc.valid, Axis::v);
        B_u = differentiate_masked(mc.n, mc.valid, Axis::u);
        B_v = differentiate_masked(mc.n, mc.valid, Axis::v);
    }

    for (std::size_t k = 0; k < m.size(); ++k) {
        if (!rc.valid[k] || !mc.valid[k]) {
            continue;
        }
        if (!jac.invertible[k]) {
            throw Error(ErrorCode::degenerate_jacobian,
                        "warp Jacobian determinant " + std::to_string(jac.det[k]) + " at node " + std::to_string(k));
        }
        Vec3 A, B, Au, Av, Bu, Bv;
        if (kind == RepKind::srnf) {
            A = rc.n[k];
            B = mc.n[k];
            Au = A_u[k];
            Av = A_v[k];
            Bu = B_u[k];
            Bv = B_v[k];
        } else {
            A = reference.grid[k] - origin;
            B = moving.grid[k] - origin;
            Au = rc.S_u[k];
            Av = rc.S_v[k];
            Bu = mc.S_u[k];
            Bv = mc.S_v[k];
        }
        const double AB = A.dot(B);
        const double ru = Au.dot(B) - A.dot(Bu) + 0.5 * AB * (rc.gamma_u[k] - mc.gamma_u[k]);
        const double rv = Av.dot(B) - A.dot(Bv) + 0.5 * AB * (rc.gamma_v[k] - mc.gamma_v[k]);
        g.residual_u[k] = ru;
        g.residual_v[k] = rv;
        const double scale = std::sqrt(rc.normN[k] * mc.normN[k]);
        const Eigen::Vector2d grad = scale * (jac.inverse[k].transpose() * Eigen::Vector2d(ru, rv));
        g.grad_mu[k] = grad[0];
        g.grad_nu[k] = grad[1];
    }
    return g;
}

/// Registration energy: squared representation distance between the
/// reference and the moving surface resampled through the current warp.
inline double energy(const SampledSurface& reference, const SampledSurface& moving_resampled, RepKind kind,
                     const Vec3& origin = Vec3::Zero())
{
    return distance_sq(representation(kind, reference, origin), representation(kind, moving_resampled, origin));
}

/// Quadrature of grad . (dmu, dnu): the first variation predicted by the gradient.
inline double directional_derivative(const ELGradient& g, const ScalarField& dmu, const ScalarField& dnu)
{
    ScalarField f(g.grad_mu.meta());
    for (std::size_t k = 0; k < f.size(); ++k) {
        f[k] = g.grad_mu[k] * dmu[k] + g.grad_nu[k] * dnu[k];
    }
    return integrate(f);
}

} // namespace surfmean
