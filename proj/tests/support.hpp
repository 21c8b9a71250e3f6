#pragma once

#include "surfmean/surfmean.hpp"
#include "surfmean/synth.hpp"

#include <cmath>

namespace surfmean::test {

inline synth::SurfaceSpec torus_spec(int n)
{
    synth::SurfaceSpec s;
    s.family = synth::Family::torus;
    s.nu = s.nv = n;
    return s;
}

inline synth::SurfaceSpec sphere_spec(int n, double radius = 1.0)
{
    synth::SurfaceSpec s;
    s.family = synth::Family::sphere;
    s.nu = s.nv = n;
    s.radius = radius;
    return s;
}

inline synth::SurfaceSpec plane_spec(int n)
{
    synth::SurfaceSpec s;
    s.family = synth::Family::plane;
    s.nu = s.nv = n;
    return s;
}

inline SampledSurface sampled(const synth::SurfaceSpec& spec) { return SampledSurface::from(synth::generate(spec)); }

inline double max_diff(const VectorField& a, const VectorField& b)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        worst = std::max(worst, (a[k] - b[k]).norm());
    }
    return worst;
}

inline double max_diff(const ScalarField& a, const ScalarField& b)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        worst = std::max(worst, std::abs(a[k] - b[k]));
    }
    return worst;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace surfmean::test
