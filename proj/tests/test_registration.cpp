#include "support.hpp"

#include <gtest/gtest.h>

using namespace surfmean;
using namespace surfmean::test;

namespace {

struct Pair {
    SampledSurface reference;
    SurfaceGrid moving;
    synth::SmoothDiffeo gamma;
};

Pair warped_torus(int n, std::uint64_t seed, double amplitude = 0.03)
{
    const auto spec = torus_spec(n);
    const auto gamma = synth::random_smooth_diffeo(synth::meta_of(spec), amplitude, seed);
    return {sampled(spec), synth::generate_reparameterized(spec, gamma), gamma};
}

void expect_contracts(const RegistrationResult& r, double det_floor)
{
    ASSERT_EQ(r.energy_trace.size(), r.min_det_trace.size());
    for (std::size_t k = 1; k < r.energy_trace.size(); ++k) {
        EXPECT_LE(r.energy_trace[k], r.energy_trace[k - 1]);
    }
    for (double d : r.min_det_trace) {
        EXPECT_GT(d, det_floor);
    }
}

} // namespace

TEST(Smooth, PreservesConstantsAndWraps)
{
    const GridMeta m{12, 10, {AxisMode::periodic, AxisMode::clamped}};
    const ScalarField c(m, 2.5);
    EXPECT_LT(max_diff(smooth(c, 2), c), 1e-14);
    ScalarField spike(m);
    spike(0, 5) = 1.0;
    const ScalarField s = smooth(spike, 1);
    EXPECT_NEAR(s(11, 5), s(1, 5), 1e-15);
    EXPECT_GT(s(11, 5), 0.0);
}

TEST(SobolevSolver, InvertsHelmholtzOperator)
{
    const GridMeta m{16, 12, {AxisMode::periodic, AxisMode::clamped}};
    const double lambda = 0.01;
    ScalarField x(m);
    for (int j = 0; j < m.nv; ++j) {
        for (int i = 0; i < m.nu; ++i) {
            x(i, j) = std::sin(0.7 * i + 0.3 * j) + 0.1 * j;
        }
    }
    // Apply (I - lambda L) by hand with zero data beyond clamped edges.
    ScalarField b(m);
    const double cu = lambda / (m.hu() * m.hu()), cv = lambda / (m.hv() * m.hv());
    for (int j = 0; j < m.nv; ++j) {
        for (int i = 0; i < m.nu; ++i) {
            const double l = x((i + m.nu - 1) % m.nu, j) + x((i + 1) % m.nu, j);
            const double d = (j > 0 ? x(i, j - 1) : 0.0) + (j + 1 < m.nv ? x(i, j + 1) : 0.0);
            b(i, j) = x(i, j) + cu * (2 * x(i, j) - l) + cv * (2 * x(i, j) - d);
        }
    }
    EXPECT_LT(max_diff(SobolevSolver(m, lambda).solve(b), x), 1e-10);
}

TEST(Register, IdenticalSurfacesConvergeImmediately)
{
    const SampledSurface t = sampled(torus_spec(24));
    const RegistrationResult r = register_surfaces(t, t.grid, RegistrationConfig{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.warp.max_distance(ReparamField::identity(t.grid.meta())), 0.0);
}

TEST(Register, SrnfTranslatedCopyExitsImmediately)
{
    const SampledSurface t = sampled(torus_spec(24));
    RegistrationConfig cfg;
    cfg.representation = RepKind::srnf;
    const RegistrationResult r = register_surfaces(t, t.grid.translated(Vec3(0.4, 0.1, -0.3)), cfg);
    EXPECT_LT(r.initial_energy(), 1e-20);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
}

TEST(Register, OneStepLowersEnergy)
{
    const Pair p = warped_torus(32, 1);
    RegistrationConfig cfg;
    cfg.max_iters = 1;
    const RegistrationResult r = register_surfaces(p.reference, p.moving, cfg);
    ASSERT_EQ(r.energy_trace.size(), 2u);
    EXPECT_LT(r.energy_trace[1], r.energy_trace[0]);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.status, RegistrationStatus::max_iters);
}

TEST(Register, RecoversKnownWarp)
{
    for (RepKind kind : {RepKind::rpsn, RepKind::srnf}) {
        const Pair p = warped_torus(48, 2);
        RegistrationConfig cfg;
        cfg.representation = kind;
        cfg.max_iters = 400;
        const RegistrationResult r = register_surfaces(p.reference, p.moving, cfg);
        expect_contracts(r, cfg.det_floor);
        EXPECT_LT(r.final_energy(), 1e-4 * r.initial_energy()) << to_string(kind);
        EXPECT_LT(r.warp.max_distance(p.gamma.sample(p.reference.grid.meta())), 2 * p.reference.grid.meta().hu())
            << to_string(kind);
    }
}

TEST(Register, ContractsHoldWithoutPreconditioning)
{
    const Pair p = warped_torus(32, 3);
    RegistrationConfig cfg;
    cfg.smoothing = 0;
    cfg.sobolev_lambda = 0.0;
    cfg.max_iters = 60;
    const RegistrationResult r = register_surfaces(p.reference, p.moving, cfg);
    expect_contracts(r, cfg.det_floor);
    EXPECT_LT(r.final_energy(), r.initial_energy());
}

TEST(Register, SphereBoundaryStaysPinned)
{
    const auto spec = sphere_spec(32);
    const auto gamma = synth::random_smooth_diffeo(synth::meta_of(spec), 0.03, 5);
    const SampledSurface ref = sampled(spec);
    RegistrationConfig cfg;
    cfg.max_iters = 50;
    const RegistrationResult r = register_surfaces(ref, synth::generate_reparameterized(spec, gamma), cfg);
    expect_contracts(r, cfg.det_floor);
    EXPECT_LT(r.final_energy(), r.initial_energy());
    for (int i = 0; i < 32; ++i) {
        EXPECT_EQ(r.warp.nu()(i, 0), 0.0);
        EXPECT_EQ(r.warp.nu()(i, 31), 1.0);
    }
}

TEST(Register, StallsAtRoundoffWithoutStoppingRule)
{
    const Pair p = warped_torus(16, 4);
    RegistrationConfig cfg;
    cfg.energy_rtol = 0.0;
    cfg.energy_floor = 0.0;
    cfg.max_iters = 100000;
    const RegistrationResult r = register_surfaces(p.reference, p.moving, cfg);
    EXPECT_EQ(r.status, RegistrationStatus::stalled);
    EXPECT_FALSE(r.converged);
    expect_contracts(r, cfg.det_floor);
}

TEST(Register, WarmStartContinuesFromGivenWarp)
{
    const Pair p = warped_torus(32, 6);
    RegistrationConfig cfg;
    cfg.max_iters = 30;
    const RegistrationResult first = register_surfaces(p.reference, p.moving, cfg);
    const RegistrationResult second = register_surfaces(p.reference, p.moving, cfg, Vec3::Zero(), first.warp);
    EXPECT_NEAR(second.initial_energy(), first.final_energy(), 1e-12 * first.initial_energy());
    EXPECT_LE(second.final_energy(), first.final_energy());
}

TEST(Register, ShapeMismatchThrows)
{
    const SampledSurface a = sampled(torus_spec(16));
    EXPECT_THROW(register_surfaces(a, synth::generate(torus_spec(20)), RegistrationConfig{}), Error);
}
