#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace surfmean;
using namespace surfmean::test;
using std::numbers::pi;

namespace {

ReparamField warp_from(const GridMeta& m, const std::function<Eigen::Vector2d(double, double)>& f)
{
    ScalarField mu(m), nu(m);
    for (int j = 0; j < m.nv; ++j) {
        for (int i = 0; i < m.nu; ++i) {
            const auto p = f(i * m.hu(), j * m.hv());
            mu(i, j) = p[0];
            nu(i, j) = p[1];
        }
    }
    return ReparamField(std::move(mu), std::move(nu));
}

} // namespace

TEST(ReparamField, IdentityValues)
{
    const GridMeta m{8, 9, {AxisMode::periodic, AxisMode::clamped}};
    const ReparamField w = ReparamField::identity(m);
    EXPECT_DOUBLE_EQ(w.mu()(3, 4), 3.0 / 8);
    EXPECT_DOUBLE_EQ(w.nu()(3, 4), 4.0 / 8);
    const auto [dmu, dnu] = w.displacement();
    for (std::size_t k = 0; k < m.size(); ++k) {
        EXPECT_NEAR(dmu[k], 0.0, 1e-15);
        EXPECT_NEAR(dnu[k], 0.0, 1e-15);
    }
}

TEST(ReparamField, PeriodicValuesWrapAndDisplacementUnwraps)
{
    const GridMeta m{8, 8, {}};
    ScalarField dmu(m, 0.9), dnu(m, -0.3);
    const ReparamField w = ReparamField::from_displacement(dmu, dnu);
    for (std::size_t k = 0; k < m.size(); ++k) {
        EXPECT_GE(w.mu()[k], 0.0);
        EXPECT_LT(w.mu()[k], 1.0);
    }
    const auto [du, dv] = w.displacement();
    // Displacements are reported modulo 1 in the symmetric range.
    EXPECT_NEAR(du[0], -0.1, 1e-12);
    EXPECT_NEAR(dv[0], -0.3, 1e-12);
}

TEST(ReparamField, RandomWarpPreservesClampedBoundary)
{
    const GridMeta m{16, 16, {AxisMode::periodic, AxisMode::clamped}};
    const ReparamField w = synth::random_diffeo(m, 0.05, 2);
    for (int i = 0; i < 16; ++i) {
        EXPECT_EQ(w.nu()(i, 0), 0.0);
        EXPECT_EQ(w.nu()(i, 15), 1.0);
    }
}

TEST(Jacobian, Identity)
{
    const JacobianField J = jacobian(ReparamField::identity(GridMeta{12, 12, {}}));
    for (std::size_t k = 0; k < J.meta.size(); ++k) {
        EXPECT_EQ(J.det[k], 1.0);
        EXPECT_TRUE(J.matrix(k).isIdentity(0.0));
        EXPECT_EQ(J.det_u[k], 0.0);
    }
}

TEST(Jacobian, ShearHasUnitDeterminant)
{
    const GridMeta m{12, 12, {AxisMode::clamped, AxisMode::periodic}};
    const JacobianField J = jacobian(warp_from(m, [](double u, double v) { return Eigen::Vector2d(u, v + 0.2 * u); }));
    for (std::size_t k = 0; k < m.size(); ++k) {
        EXPECT_NEAR(J.det[k], 1.0, 1e-12);
        EXPECT_NEAR(J.nu_u[k], 0.2, 1e-12);
    }
}

TEST(Jacobian, InverseIsInverse)
{
    const GridMeta m{24, 24, {}};
    const JacobianField J = jacobian(synth::random_diffeo(m, 0.05, 3));
    for (std::size_t k = 0; k < m.size(); ++k) {
        ASSERT_TRUE(J.invertible[k]);
        EXPECT_LT((J.matrix(k) * J.inverse[k] - Eigen::Matrix2d::Identity()).norm(), 1e-10);
        const Eigen::Matrix2d M = J.matrix(k);
        EXPECT_EQ(J.det[k], M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0));
    }
}

TEST(Jacobian, MatchesSymbolicDeterminant)
{
    double err[2];
    for (int r = 0; r < 2; ++r) {
        const GridMeta m{32 << r, 32 << r, {}};
        const JacobianField J = jacobian(warp_from(m, [](double u, double v) {
            return Eigen::Vector2d(u + 0.05 * std::sin(2 * pi * u) * std::sin(2 * pi * v), v);
        }));
        double worst = 0.0;
        for (int j = 0; j < m.nv; ++j) {
            for (int i = 0; i < m.nu; ++i) {
                const double u = i * m.hu(), v = j * m.hv();
                const double exact = 1 + 0.05 * 2 * pi * std::cos(2 * pi * u) * std::sin(2 * pi * v);
                worst = std::max(worst, std::abs(J.det(i, j) - exact));
            }
        }
        EXPECT_GT(J.min_det(), 0.0);
        err[r] = worst;
    }
    EXPECT_LT(err[1], 1e-4);
    EXPECT_GT(err[0] / err[1], 12.0);
}

TEST(Jacobian, FoldedWarpIsNotInvertible)
{
    const GridMeta m{16, 16, {}};
    const JacobianField J =
        jacobian(warp_from(m, [](double u, double v) { return Eigen::Vector2d(u + 0.3 * std::sin(2 * pi * u), v); }));
    EXPECT_LT(J.min_det(), 0.0);
    std::size_t bad = 0;
    for (auto f : J.invertible) {
        bad += f == 0;
    }
    EXPECT_GT(bad, 0u);
}

TEST(TransformChristoffel, IdentityIsNoOp)
{
    const GeometryCache c = build_geometry(synth::generate(torus_spec(16)));
    const ChristoffelPair p = transform_christoffel(jacobian(ReparamField::identity(c.meta)), c.gamma_u, c.gamma_v);
    EXPECT_EQ(max_diff(p.gamma_mu, c.gamma_u), 0.0);
    EXPECT_EQ(max_diff(p.gamma_nu, c.gamma_v), 0.0);
}

TEST(TransformChristoffel, PlaneUnderShear)
{
    const GridMeta m{16, 16, {AxisMode::clamped, AxisMode::periodic}};
    const ReparamField w = warp_from(m, [](double u, double v) { return Eigen::Vector2d(u, v + 0.2 * u); });
    const ScalarField zero(m);
    const ChristoffelPair p = transform_christoffel(jacobian(w), zero, zero);
    for (std::size_t k = 0; k < m.size(); ++k) {
        EXPECT_NEAR(p.gamma_mu[k], 0.0, 1e-12);
        EXPECT_NEAR(p.gamma_nu[k], 0.0, 1e-12);
    }
}

TEST(TransformChristoffel, RecoversDivergencesAtWarpedPoints)
{
    // Resample the torus through a warp, take divergences of the result, and
    // transform them back: they must equal the torus divergences at (mu, nu).
    double err[2];
    for (int r = 0; r < 2; ++r) {
        const auto spec = torus_spec(32 << r);
        const SurfaceGrid t = synth::generate(spec);
        const ReparamField w = warp_from(t.meta(), [](double u, double v) {
            return Eigen::Vector2d(u + 0.04 * std::sin(2 * pi * v), v + 0.04 * std::sin(2 * pi * u));
        });
        const GeometryCache c = build_geometry(resample(t, w));
        const ChristoffelPair p = transform_christoffel(jacobian(w), c.gamma_u, c.gamma_v);
        double worst = 0.0;
        for (std::size_t k = 0; k < c.meta.size(); ++k) {
            worst = std::max({worst, std::abs(p.gamma_mu[k]),
                              std::abs(p.gamma_nu[k] - synth::torus_gamma_v(2, 0.5, w.nu()[k]))});
        }
        err[r] = worst;
    }
    EXPECT_LT(err[1], 1e-2);
    EXPECT_GT(err[0] / err[1], 3.5);
}

TEST(TransformChristoffel, MasksNonInvertibleNodes)
{
    const GridMeta m{16, 16, {}};
    const JacobianField J =
        jacobian(warp_from(m, [](double u, double v) { return Eigen::Vector2d(u + 0.3 * std::sin(2 * pi * u), v); }));
    const ScalarField one(m, 1.0);
    const ChristoffelPair p = transform_christoffel(J, one, one);
    for (std::size_t k = 0; k < m.size(); ++k) {
        EXPECT_EQ(p.valid[k], J.invertible[k]);
        if (!p.valid[k]) {
            EXPECT_EQ(p.gamma_mu[k], 0.0);
        }
    }
}

TEST(ELGradient, ZeroForIdenticalSurfaces)
{
    for (RepKind kind : {RepKind::srnf, RepKind::rpsn}) {
        const SampledSurface t = sampled(torus_spec(24));
        const ELGradient g = el_gradient(t, t, ReparamField::identity(t.grid.meta()), kind);
        for (std::size_t k = 0; k < g.grad_mu.size(); ++k) {
            EXPECT_EQ(g.residual_u[k], 0.0);
            EXPECT_EQ(g.residual_v[k], 0.0);
            EXPECT_EQ(g.grad_mu[k], 0.0);
            EXPECT_EQ(g.grad_nu[k], 0.0);
        }
    }
}

TEST(ELGradient, RpsnTranslatedCopyResidualIsClosedForm)
{
    const SampledSurface R = sampled(torus_spec(32));
    const Vec3 d(0.3, -0.2, 0.5);
    const SampledSurface S = SampledSurface::from(R.grid.translated(d));
    const ELGradient g = el_gradient(R, S, ReparamField::identity(R.grid.meta()), RepKind::rpsn);
    for (std::size_t k = 0; k < g.residual_u.size(); ++k) {
        EXPECT_NEAR(g.residual_u[k], R.cache.S_u[k].dot(d), 1e-10);
        EXPECT_NEAR(g.residual_v[k], R.cache.S_v[k].dot(d), 1e-10);
    }
}

TEST(ELGradient, IdentityReducesToScaledResidual)
{
    const auto spec = torus_spec(32);
    const SampledSurface R = sampled(spec);
    const SampledSurface S =
        SampledSurface::from(synth::generate_reparameterized(spec, synth::random_smooth_diffeo(R.grid.meta(), 0.03, 2)));
    for (RepKind kind : {RepKind::srnf, RepKind::rpsn}) {
        const ELGradient g = el_gradient(R, S, ReparamField::identity(R.grid.meta()), kind);
        for (std::size_t k = 0; k < g.grad_mu.size(); ++k) {
            const double s = std::sqrt(R.cache.normN[k] * S.cache.normN[k]);
            EXPECT_EQ(g.grad_mu[k], s * g.residual_u[k]);
            EXPECT_EQ(g.grad_nu[k], s * g.residual_v[k]);
        }
    }
}

TEST(ELGradient, RpsnResidualIsAntisymmetric)
{
    auto a = torus_spec(32);
    auto b = a;
    b.family = synth::Family::bumpy_torus;
    const SampledSurface R = sampled(a), S = sampled(b);
    const ReparamField id = ReparamField::identity(R.grid.meta());
    const ELGradient rs = el_gradient(R, S, id, RepKind::rpsn);
    const ELGradient sr = el_gradient(S, R, id, RepKind::rpsn);
    for (std::size_t k = 0; k < rs.residual_u.size(); ++k) {
        EXPECT_NEAR(rs.residual_u[k], -sr.residual_u[k], 1e-12);
        EXPECT_NEAR(rs.residual_v[k], -sr.residual_v[k], 1e-12);
    }
}

TEST(ELGradient, ZeroOnMaskedNodes)
{
    const SampledSurface R = sampled(sphere_spec(24, 1.0));
    const SampledSurface S = sampled(sphere_spec(24, 1.3));
    const ELGradient g = el_gradient(R, S, ReparamField::identity(R.grid.meta()), RepKind::rpsn);
    for (std::size_t k = 0; k < g.grad_mu.size(); ++k) {
        if (!R.cache.valid[k]) {
            EXPECT_EQ(g.grad_mu[k], 0.0);
            EXPECT_EQ(g.grad_nu[k], 0.0);
        } else {
            EXPECT_TRUE(std::isfinite(g.grad_mu[k]) && std::isfinite(g.grad_nu[k]));
        }
    }
}

TEST(ELGradient, DegenerateJacobianThrows)
{
    const SampledSurface t = sampled(torus_spec(16));
    const ReparamField w =
        warp_from(t.grid.meta(), [](double u, double v) { return Eigen::Vector2d(u + 0.3 * std::sin(2 * pi * u), v); });
    try {
        el_gradient(t, t, w, RepKind::rpsn);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::degenerate_jacobian);
    }
}

TEST(ELGradient, MatchesFiniteDifferencesAtIdentity)
{
    for (RepKind kind : {RepKind::srnf, RepKind::rpsn}) {
        const auto coarse = synth::gradient_check(kind, 64, 1);
        const auto fine = synth::gradient_check(kind, 128, 1);
        EXPECT_LT(coarse.max_error, 1e-4) << to_string(kind);
        EXPECT_LT(fine.max_error, coarse.max_error / 4) << to_string(kind);
    }
}

TEST(ELGradient, MatchesFiniteDifferencesAwayFromIdentity)
{
    // J^-T matters here; a J^-1 gradient fails this at the 1e-2 level.
    for (RepKind kind : {RepKind::srnf, RepKind::rpsn}) {
        const auto coarse = synth::gradient_check(kind, 48, 2, 8, 0.03, true);
        const auto fine = synth::gradient_check(kind, 96, 2, 8, 0.03, true);
        EXPECT_LT(coarse.max_error, 1e-3) << to_string(kind);
        EXPECT_LT(fine.max_error, coarse.max_error / 4) << to_string(kind);
    }
}

TEST(Energy, Basics)
{
    const SampledSurface t = sampled(torus_spec(16));
    EXPECT_EQ(energy(t, t, RepKind::rpsn), 0.0);
    auto p = plane_spec(16);
    const SampledSurface a = sampled(p);
    p.offset = Vec3(0, 0, 1);
    EXPECT_NEAR(energy(a, sampled(p), RepKind::rpsn), 1.0, 1e-9);
}

TEST(Energy, DirectionalDerivativeIsLinear)
{
    const auto spec = torus_spec(24);
    const SampledSurface R = sampled(spec);
    const SampledSurface S =
        SampledSurface::from(synth::generate_reparameterized(spec, synth::random_smooth_diffeo(R.grid.meta(), 0.03, 4)));
    const ELGradient g = el_gradient(R, S, ReparamField::identity(R.grid.meta()), RepKind::rpsn);
    auto [a, b] = synth::random_probe(R.grid.meta(), 11);
    ScalarField a2 = a, b2 = b;
    for (std::size_t k = 0; k < a2.size(); ++k) {
        a2[k] *= 2;
        b2[k] *= 2;
    }
    EXPECT_NEAR(directional_derivative(g, a2, b2), 2 * directional_derivative(g, a, b), 1e-12);
}
