#pragma once

// Analytic surfaces, smooth random reparameterizations and brute-force
// oracles. Everything here is deterministic given its seed, and nothing in
// the solver path depends on it.

#include "surfmean/reparam.hpp"

#include <Eigen/Dense>

#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace surfmean::synth {

using std::numbers::pi;

enum class Family { plane, sphere, torus, bumpy_torus };

inline const char* to_string(Family f)
{
    switch (f) {
    case Family::plane: return "plane";
    case Family::sphere: return "sphere";
    case Family::torus: return "torus";
    case Family::bumpy_torus: return "bumpy_torus";
    }
    return "?";
}

struct SurfaceSpec {
    Family family = Family::torus;
    double radius = 1.0;          // sphere
    double major_radius = 2.0;    // torus R
    double minor_radius = 0.5;    // torus r
    double bump_amplitude = 0.05; // relative modulation of r (bumpy torus)
    int bump_frequency = 3;
    Vec3 offset = Vec3::Zero();
    int nu = 64;
    int nv = 64;
    std::uint64_t seed = 1;
};

inline GridTopology topology_of(Family f)
{
    switch (f) {
    case Family::plane: return {AxisMode::clamped, AxisMode::clamped};
    case Family::sphere: return {AxisMode::periodic, AxisMode::clamped};
    default: return {AxisMode::periodic, AxisMode::periodic};
    }
}

inline GridMeta meta_of(const SurfaceSpec& spec) { return {spec.nu, spec.nv, topology_of(spec.family)}; }

/// Seeded uniform doubles in [0, 1) that do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

private:
    std::mt19937_64 engine_;
};

/// Position and derivatives of a closed-form chart at one parameter point.
struct ChartJet {
    Vec3 S, Su, Sv, Suu, Suv, Svv;
};

namespace detail {

struct BumpMode {
    int ku, kv;
    double amp, phase;
};

inline std::vector<BumpMode> bump_modes(const SurfaceSpec& spec)
{
    Rng rng(spec.seed * 0x9E3779B97F4A7C15ULL + 17);
    std::vector<BumpMode> modes;
    double total = 0.0;
    for (int q = 0; q < 4; ++q) {
        BumpMode b{rng.integer(0, spec.bump_frequency), rng.integer(1, spec.bump_frequency), rng.uniform(-1.0, 1.0),
                   rng.uniform(0.0, 2.0 * pi)};
        total += std::abs(b.amp);
        modes.push_back(b);
    }
    for (auto& b : modes) {
        b.amp /= total;
    }
    return modes;
}

} // namespace detail

/// Closed-form chart jet for plane, sphere and torus.
inline ChartJet chart_jet(const SurfaceSpec& spec, double u, double v)
{
    ChartJet j;
    switch (spec.family) {
    case Family::plane:
        j.S = Vec3(u, v, 0.0);
        j.Su = Vec3(1, 0, 0);
        j.Sv = Vec3(0, 1, 0);
        j.Suu = j.Suv = j.Svv = Vec3::Zero();
        break;
    case Family::sphere: {
        const double r = spec.radius, a = 2 * pi * u, b = pi * v;
        const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
        j.S = r * Vec3(sb * ca, sb * sa, cb);
        j.Su = r * 2 * pi * Vec3(-sb * sa, sb * ca, 0);
        j.Sv = r * pi * Vec3(cb * ca, cb * sa, -sb);
        j.Suu = r * 4 * pi * pi * Vec3(-sb * ca, -sb * sa, 0);
        j.Suv = r * 2 * pi * pi * Vec3(-cb * sa, cb * ca, 0);
        j.Svv = r * pi * pi * Vec3(-sb * ca, -sb * sa, -cb);
        break;
    }
    case Family::torus: {
        const double R = spec.major_radius, r = spec.minor_radius, a = 2 * pi * u, b = 2 * pi * v;
        const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
        const double w = R + r * cb;
        const double tp = 2 * pi;
        j.S = Vec3(w * ca, w * sa, r * sb);
        j.Su = tp * w * Vec3(-sa, ca, 0);
        j.Sv = tp * r * Vec3(-sb * ca, -sb * sa, cb);
        j.Suu = tp * tp * w * Vec3(-ca, -sa, 0);
        j.Suv = tp * tp * r * Vec3(sb * sa, -sb * ca, 0);
        j.Svv = tp * tp * r * Vec3(-cb * ca, -cb * sa, -sb);
        break;
    }
    case Family::bumpy_torus:
        throw Error(ErrorCode::degenerate_spec, "no closed-form jet for the bumpy torus");
    }
    j.S += spec.offset;
    return j;
}

inline Vec3 chart_position(const SurfaceSpec& spec, double u, double v)
{
    if (spec.family != Family::bumpy_torus) {
        return chart_jet(spec, u, v).S;
    }
    double bump = 0.0;
    for (const auto& b : detail::bump_modes(spec)) {
        bump += b.amp * std::sin(2 * pi * (b.ku * u + b.kv * v) + b.phase);
    }
    const double R = spec.major_radius;
    const double r = spec.minor_radius * (1.0 + spec.bump_amplitude * bump);
    const double a = 2 * pi * u, c = 2 * pi * v;
    return Vec3((R + r * std::cos(c)) * std::cos(a), (R + r * std::cos(c)) * std::sin(a), r * std::sin(c)) +
           spec.offset;
}

/// Christoffel-sum form of d ln|N| / du and d ln|N| / dv:
///   Gamma_u = S_uu . S^u + S_uv . S^v,  Gamma_v = S_uv . S^u + S_vv . S^v.
inline Eigen::Vector2d christoffel_divergences(const ChartJet& j)
{
    const Vec3 N = j.Su.cross(j.Sv);
    const double len = N.norm();
    const Vec3 n = N / len;
    const Vec3 up = j.Sv.cross(n) / len;
    const Vec3 vp = n.cross(j.Su) / len;
    return {j.Suu.dot(up) + j.Suv.dot(vp), j.Suv.dot(up) + j.Svv.dot(vp)};
}

// Closed forms used as oracles.
inline double torus_area(double R, double r) { return 4 * pi * pi * R * r; }
inline double torus_normN(double R, double r, double v) { return 4 * pi * pi * r * (R + r * std::cos(2 * pi * v)); }
inline double torus_gamma_v(double R, double r, double v)
{
    return -2 * pi * r * std::sin(2 * pi * v) / (R + r * std::cos(2 * pi * v));
}
inline double sphere_area(double r) { return 4 * pi * r * r; }
inline double sphere_normN(double r, double v) { return 2 * pi * pi * r * r * std::sin(pi * v); }
inline double sphere_second_moment(double r) { return 4 * pi * r * r * r * r; }

inline void validate(const SurfaceSpec& spec)
{
    auto fail = [](const std::string& why) { throw Error(ErrorCode::degenerate_spec, why); };
    validate_meta(meta_of(spec));
    if (!spec.offset.allFinite()) {
        fail("offset must be finite");
    }
    switch (spec.family) {
    case Family::plane: break;
    case Family::sphere:
        if (!(spec.radius > 0)) fail("sphere radius must be positive");
        break;
    case Family::bumpy_torus:
        if (!(spec.bump_amplitude >= 0 && spec.bump_amplitude < 1)) fail("bump amplitude must be in [0, 1)");
        if (spec.bump_frequency < 1) fail("bump frequency must be at least 1");
        [[fallthrough]];
    case Family::torus:
        if (!(spec.minor_radius > 0 && spec.minor_radius < spec.major_radius)) fail("torus needs 0 < r < R");
        break;
    }
}

/// Sample the closed-form chart on the grid. Throws DegenerateSpec when a
/// node other than a sphere pole has a degenerate normal.
inline SurfaceGrid generate(const SurfaceSpec& spec)
{
    validate(spec);
    const GridMeta m = meta_of(spec);
    VectorField pos(m);
    for (int j = 0; j < m.nv; ++j) {
        for (int i = 0; i < m.nu; ++i) {
            pos(i, j) = chart_position(spec, i * m.hu(), j * m.hv());
        }
    }
    SurfaceGrid grid(std::move(pos));
    const GeometryCache cache = build_geometry(grid);
    for (int j = 0; j < m.nv; ++j) {
        const bool pole_row = spec.family == Family::sphere && (j == 0 || j == m.nv - 1);
        for (int i = 0; i < m.nu; ++i) {
            if (!cache.valid(i, j) && !pole_row) {
                throw Error(ErrorCode::degenerate_spec, "degenerate normal at node (" + std::to_string(i) + ", " +
                                                            std::to_string(j) + ")");
            }
        }
    }
    return grid;
}

/// A smooth reparameterization: identity plus a band-limited displacement.
/// Periodic axes use low-frequency trigonometric modes; each clamped axis
/// contributes a sin(pi x) envelope so the boundary stays fixed.
class SmoothDiffeo {
public:
    struct Mode {
        int ku, kv;
        double amp_mu, amp_nu, phase_mu, phase_nu;
    };

    SmoothDiffeo(GridTopology topology, double amplitude, std::vector<Mode> modes)
        : topology_(topology), amplitude_(amplitude), modes_(std::move(modes))
    {}

    static SmoothDiffeo draw(GridTopology topology, double amplitude, Rng& rng, int modes = 3, int max_freq = 2)
    {
        std::vector<Mode> ms;
        double su = 0, sv = 0;
        for (int q = 0; q < modes; ++q) {
            Mode m{0, 0, rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 2 * pi), rng.uniform(0, 2 * pi)};
            do {
                m.ku = rng.integer(0, max_freq);
                m.kv = rng.integer(0, max_freq);
            } while (m.ku == 0 && m.kv == 0);
            su += std::abs(m.amp_mu);
            sv += std::abs(m.amp_nu);
            ms.push_back(m);
        }
        for (auto& m : ms) {
            m.amp_mu /= su;
            m.amp_nu /= sv;
        }
        return SmoothDiffeo(topology, amplitude, std::move(ms));
    }

    double amplitude() const { return amplitude_; }

    /// Displacement and its 2x2 Jacobian at (u, v).
    std::pair<Eigen::Vector2d, Eigen::Matrix2d> displacement(double u, double v) const
    {
        Eigen::Vector2d d = Eigen::Vector2d::Zero();
        Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
        for (const Mode& m : modes_) {
            const double arg = 2 * pi * (m.ku * u + m.kv * v);
            const double s1 = std::sin(arg + m.phase_mu), c1 = std::cos(arg + m.phase_mu);
            const double s2 = std::sin(arg + m.phase_nu), c2 = std::cos(arg + m.phase_nu);
            d[0] += m.amp_mu * s1;
            d[1] += m.amp_nu * s2;
            D(0, 0) += m.amp_mu * c1 * 2 * pi * m.ku;
            D(0, 1) += m.amp_mu * c1 * 2 * pi * m.kv;
            D(1, 0) += m.amp_nu * c2 * 2 * pi * m.ku;
            D(1, 1) += m.amp_nu * c2 * 2 * pi * m.kv;
        }
        double env = 1.0;
        Eigen::Vector2d env_grad = Eigen::Vector2d::Zero();
        if (topology_.u_mode == AxisMode::clamped) {
            env_grad = Eigen::Vector2d(pi * std::cos(pi * u), 0.0) * env;
            env *= std::sin(pi * u);
        }
        if (topology_.v_mode == AxisMode::clamped) {
            const double e = std::sin(pi * v);
            env_grad = env_grad * e + Eigen::Vector2d(0.0, env * pi * std::cos(pi * v));
            env *= e;
        }
        const Eigen::Matrix2d J = amplitude_ * (env * D + d * env_grad.transpose());
        return {amplitude_ * env * d, J};
    }

    Eigen::Vector2d apply(double u, double v) const { return Eigen::Vector2d(u, v) + displacement(u, v).first; }

    /// Preimage of (u, v) by Newton iteration on x + d(x) = y.
    Eigen::Vector2d inverse(double u, double v) const
    {
        const Eigen::Vector2d y(u, v);
        Eigen::Vector2d x = y - displacement(u, v).first;
        for (int it = 0; it < 50; ++it) {
            const auto [d, D] = displacement(x[0], x[1]);
            const Eigen::Vector2d r = x + d - y;
            if (r.norm() < 1e-15) {
                break;
            }
            x -= (Eigen::Matrix2d::Identity() + D).lu().solve(r);
        }
        return x;
    }

    ReparamField sample(const GridMeta& meta) const { return sample_with(meta, false); }
    ReparamField sample_inverse(const GridMeta& meta) const { return sample_with(meta, true); }

private:
    ReparamField sample_with(const GridMeta& meta, bool inverse_map) const
    {
        ScalarField mu(meta), nu(meta);
        for (int j = 0; j < meta.nv; ++j) {
            for (int i = 0; i < meta.nu; ++i) {
                const double u = i * meta.hu(), v = j * meta.hv();
                Eigen::Vector2d p = inverse_map ? inverse(u, v) : apply(u, v);
                if (topology_.u_mode == AxisMode::clamped && (i == 0 || i == meta.nu - 1)) p[0] = u;
                if (topology_.v_mode == AxisMode::clamped && (j == 0 || j == meta.nv - 1)) p[1] = v;
                mu(i, j) = p[0];
                nu(i, j) = p[1];
            }
        }
        return ReparamField(std::move(mu), std::move(nu));
    }

    GridTopology topology_;
    double amplitude_;
    std::vector<Mode> modes_;
};

inline constexpr double kMinRandomDetJ = 0.2;

/// Draw a smooth diffeomorphism whose sampled Jacobian determinant stays at or
/// above `min_det`, re-drawing up to 100 times.
inline SmoothDiffeo random_smooth_diffeo(const GridMeta& meta, double amplitude, std::uint64_t seed,
                                         double min_det = kMinRandomDetJ)
{
    if (!(amplitude >= 0.0 && amplitude <= 0.1)) {
        throw Error(ErrorCode::degenerate_spec, "random diffeo amplitude must be in [0, 0.1]");
    }
    Rng rng(seed);
    for (int draw = 0; draw < 100; ++draw) {
        SmoothDiffeo d = SmoothDiffeo::draw(meta.topology, amplitude, rng);
        if (jacobian(d.sample(meta)).min_det() >= min_det) {
            return d;
        }
    }
    throw Error(ErrorCode::rejection_exhausted, "no admissible diffeomorphism in 100 draws");
}

/// The chart sampled at gamma^-1 of every node, so that resampling the result
/// through gamma reproduces generate(spec).
inline SurfaceGrid generate_reparameterized(const SurfaceSpec& spec, const SmoothDiffeo& gamma)
{
    validate(spec);
    const GridMeta m = meta_of(spec);
    VectorField pos(m);
    for (int j = 0; j < m.nv; ++j) {
        for (int i = 0; i < m.nu; ++i) {
            const Eigen::Vector2d p = gamma.inverse(i * m.hu(), j * m.hv());
            pos(i, j) = chart_position(spec, p[0], p[1]);
        }
    }
    return SurfaceGrid(std::move(pos));
}

inline ReparamField random_diffeo(const GridMeta& meta, double amplitude, std::uint64_t seed)
{
    return random_smooth_diffeo(meta, amplitude, seed).sample(meta);
}

/// Smooth probe field pair for directional-derivative checks; vanishes on
/// clamped boundaries.
inline std::pair<ScalarField, ScalarField> random_probe(const GridMeta& meta, std::uint64_t seed)
{
    Rng rng(seed);
    const SmoothDiffeo d = SmoothDiffeo::draw(meta.topology, 1.0, rng);
    ScalarField pm(meta), pn(meta);
    for (int j = 0; j < meta.nv; ++j) {
        for (int i = 0; i < meta.nu; ++i) {
            const auto disp = d.displacement(i * meta.hu(), j * meta.hv()).first;
            const bool edge = (meta.topology.u_mode == AxisMode::clamped && (i == 0 || i == meta.nu - 1)) ||
                              (meta.topology.v_mode == AxisMode::clamped && (j == 0 || j == meta.nv - 1));
            pm(i, j) = edge ? 0.0 : disp[0];
            pn(i, j) = edge ? 0.0 : disp[1];
        }
    }
    return {std::move(pm), std::move(pn)};
}

struct Probe {
    ScalarField dmu;
    ScalarField dnu;
};

/// Directional derivatives of the discrete registration energy
///   E(warp) = distance_sq(rep(reference), rep(resample(moving, warp)))
/// along each probe, by central differences at step t and t/2 combined with
/// one Richardson extrapolation.
inline std::vector<double> fd_energy_gradient(const SampledSurface& reference, const SurfaceGrid& moving,
                                              const ReparamField& warp, RepKind kind, const std::vector<Probe>& probes,
                                              const Vec3& origin = Vec3::Zero(), double t = 1e-5)
{
    const double eps_N = default_eps_N(moving);
    const RepField ref_rep = representation(kind, reference, origin);
    auto energy_at = [&](const Probe& p, double s) {
        const ReparamField w = warp.stepped(p.dmu, p.dnu, -s);
        const SampledSurface mv = SampledSurface::from(resample(moving, w), eps_N);
        return distance_sq(ref_rep, representation(kind, mv, origin));
    };
    std::vector<double> out;
    out.reserve(probes.size());
    for (const Probe& p : probes) {
        const double d1 = (energy_at(p, t) - energy_at(p, -t)) / (2 * t);
        const double d2 = (energy_at(p, t / 2) - energy_at(p, -t / 2)) / t;
        out.push_back((4 * d2 - d1) / 3);
    }
    return out;
}

struct GradientCheck {
    std::vector<double> analytic;
    std::vector<double> finite_difference;
    /// Largest |analytic - fd| / (||grad|| ||probe||), norms in L2 over the grid.
    double max_error = 0.0;
};

/// Compare el_gradient() with fd_energy_gradient() on a torus pair: the
/// reference chart and the chart reparameterized by a random diffeomorphism.
/// The warp is the identity, or a second random diffeomorphism when `warped`.
inline GradientCheck gradient_check(RepKind kind, int n, std::uint64_t seed, int probe_count = 20,
                                    double amplitude = 0.03, bool warped = false)
{
    SurfaceSpec spec;
    spec.nu = spec.nv = n;
    const GridMeta m = meta_of(spec);
    const SampledSurface reference = SampledSurface::from(generate(spec));
    const SurfaceGrid moving = generate_reparameterized(spec, random_smooth_diffeo(m, amplitude, seed));
    const ReparamField warp = warped ? random_diffeo(m, amplitude, seed + 1) : ReparamField::identity(m);
    const SampledSurface resampled = SampledSurface::from(resample(moving, warp), default_eps_N(moving));
    const ELGradient g = el_gradient(reference, resampled, warp, kind);
    const double grad_norm = std::sqrt(directional_derivative(g, g.grad_mu, g.grad_nu));

    std::vector<Probe> probes;
    for (int p = 0; p < probe_count; ++p) {
        auto [a, b] = random_probe(m, 1000 * seed + static_cast<std::uint64_t>(p));
        probes.push_back({std::move(a), std::move(b)});
    }
    GradientCheck out;
    out.finite_difference = fd_energy_gradient(reference, moving, warp, kind, probes);
    for (std::size_t p = 0; p < probes.size(); ++p) {
        ScalarField sq(m);
        for (std::size_t k = 0; k < sq.size(); ++k) {
            sq[k] = probes[p].dmu[k] * probes[p].dmu[k] + probes[p].dnu[k] * probes[p].dnu[k];
        }
        const double probe_norm = std::sqrt(integrate(sq));
        const double a = directional_derivative(g, probes[p].dmu, probes[p].dnu);
        out.analytic.push_back(a);
        const double scale = grad_norm * probe_norm;
        const double err = std::abs(a - out.finite_difference[p]);
        out.max_error = std::max(out.max_error, scale > 0.0 ? err / scale : err);
    }
    return out;
}

/// Brute-force search of the centroid shift minimising
///   sum_i || (Qbar - dD sqrt|Nbar|) - (Q_i - dD sqrt|N_i|) ||^2
/// over a (2 * half + 1)^3 lattice centred at `center` with the given spacing.
inline Vec3 centroid_lattice_search(const std::vector<RepField>& constituents,
                                    const std::vector<ScalarField>& densities, const RepField& mean,
                                    const ScalarField& mean_density, const Vec3& center, double spacing,
                                    int half = 10)
{
    const GridMeta& m = mean.meta();
    auto energy = [&](const Vec3& dD) {
        double total = 0.0;
        ScalarField e(m);
        for (std::size_t c = 0; c < constituents.size(); ++c) {
            for (std::size_t k = 0; k < m.size(); ++k) {
                const Vec3 diff = (mean.values[k] - dD * mean_density[k]) -
                                  (constituents[c].values[k] - dD * densities[c][k]);
                e[k] = diff.squaredNorm();
            }
            total += integrate(e);
        }
        return total;
    };
    Vec3 best = center;
    double best_e = std::numeric_limits<double>::infinity();
    for (int a = -half; a <= half; ++a) {
        for (int b = -half; b <= half; ++b) {
            for (int c = -half; c <= half; ++c) {
                const Vec3 dD = center + spacing * Vec3(a, b, c);
                const double e = energy(dD);
                if (e < best_e) {
                    best_e = e;
                    best = dD;
                }
            }
        }
    }
    return best;
}

} // namespace surfmean::synth
