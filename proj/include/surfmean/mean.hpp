#pragma once

#include "surfmean/registration.hpp"

#include <vector>

namespace surfmean {

struct MeanConfig {
    int reference_index = 0;
    int outer_iters = 10;
    /// Stop once |dD| and every |dD_i| fall below this; 0 selects 1e-8 x bbox diagonal.
    double centroid_tol = 0.0;
    /// Guard on the centroid denominator and constituent areas; 0 selects 1e-12 x bbox diagonal^2.
    double denom_floor = 0.0;
    bool remove_translations = false;
    /// Register constituents to the reference; when off every warp stays the identity.
    bool register_constituents = true;
    RegistrationConfig registration;
};

/// One constituent after registration: the surface resampled through its warp,
/// its RPSN field about the current origin, and sqrt|N| (zero on masked nodes).
struct RegisteredConstituent {
    SampledSurface surface;
    ReparamField warp;
    RepField field;
    ScalarField density;
    RegistrationStatus status = RegistrationStatus::converged;
    int iterations = 0;
};

struct MeanResult {
    /// Surface reconstructed as sum S_i sqrt|N_i| / sum sqrt|N_i| per node.
    SurfaceGrid mean_grid;
    /// The constituent average of the RPSN fields; the canonical mean.
    RepField mean_field;
    /// Average of sqrt|N_i|, so that mean_field = (mean_grid - origin) mean_density.
    ScalarField mean_density;
    std::vector<RegisteredConstituent> constituents;
    /// Accumulated origin shift; equals the final origin.
    Vec3 centroid_shift = Vec3::Zero();
    /// Accumulated translation removed from each constituent.
    std::vector<Vec3> translation_shifts;
    double energy = 0.0;
    std::vector<double> trace;
    int outer_iterations = 0;
    bool converged = false;
    Vec3 origin = Vec3::Zero();

    std::vector<ReparamField> warps() const
    {
        std::vector<ReparamField> out;
        for (const auto& c : constituents) {
            out.push_back(c.warp);
        }
        return out;
    }
};

namespace detail {

inline double mean_scale(const std::vector<SurfaceGrid>& constituents)
{
    Eigen::AlignedBox3d box;
    for (const auto& g : constituents) {
        box.extend(g.bounding_box());
    }
    return box.diagonal().norm();
}

inline void check_constituents(const std::vector<SurfaceGrid>& constituents, const MeanConfig& cfg)
{
    if (constituents.size() < 2) {
        throw Error(ErrorCode::invalid_grid, "a mean needs at least two constituents");
    }
    for (const auto& g : constituents) {
        require_same_shape(constituents.front().meta(), g.meta(), "mean");
    }
    if (cfg.reference_index < 0 || cfg.reference_index >= static_cast<int>(constituents.size())) {
        throw Error(ErrorCode::invalid_grid, "reference index out of range");
    }
}

inline RegisteredConstituent make_constituent(SampledSurface s, ReparamField warp, const Vec3& origin)
{
    RegisteredConstituent c;
    c.field = rpsn(s.grid, s.cache, origin);
    c.density = ScalarField(s.grid.meta());
    for (std::size_t k = 0; k < c.density.size(); ++k) {
        if (s.cache.valid[k]) {
            c.density[k] = std::sqrt(s.cache.normN[k]);
        }
    }
    c.surface = std::move(s);
    c.warp = std::move(warp);
    return c;
}

} // namespace detail

/// Average the fields of already registered constituents and reconstruct the
/// mean surface. The system energy is sum_i distance_sq(mean, Q_i).
inline MeanResult assemble_mean(std::vector<RegisteredConstituent> constituents, const Vec3& origin)
{
    const GridMeta& m = constituents.front().field.meta();
    const double count = static_cast<double>(constituents.size());
    MeanResult r;
    r.origin = origin;
    r.mean_field = RepField{RepKind::rpsn, VectorField(m), origin};
    r.mean_density = ScalarField(m);
    VectorField positions(m);
    for (std::size_t k = 0; k < m.size(); ++k) {
        Vec3 q = Vec3::Zero(), weighted = Vec3::Zero(), plain = Vec3::Zero();
        double d = 0.0;
        for (const auto& c : constituents) {
            q += c.field.values[k];
            d += c.density[k];
            weighted += c.surface.grid[k] * c.density[k];
            plain += c.surface.grid[k];
        }
        r.mean_field.values[k] = q / count;
        r.mean_density[k] = d / count;
        positions[k] = d > 0.0 ? Vec3(weighted / d) : Vec3(plain / count);
    }
    r.mean_grid = SurfaceGrid(std::move(positions));
    r.energy = 0.0;
    for (const auto& c : constituents) {
        r.energy += distance_sq(r.mean_field, c.field);
    }
    r.constituents = std::move(constituents);
    r.translation_shifts.assign(r.constituents.size(), Vec3::Zero());
    r.trace = {r.energy};
    return r;
}

/// Register every constituent to the reference constituent about `origin`
/// and average. `initial` warm-starts the registrations.
inline MeanResult mean_rpsn(const std::vector<SurfaceGrid>& constituents, const MeanConfig& cfg,
                            const Vec3& origin = Vec3::Zero(), const std::vector<ReparamField>& initial = {})
{
    detail::check_constituents(constituents, cfg);
    const auto ref = static_cast<std::size_t>(cfg.reference_index);
    const SampledSurface reference = SampledSurface::from(constituents[ref]);
    RegistrationConfig rc = cfg.registration;
    rc.representation = RepKind::rpsn;

    std::vector<RegisteredConstituent> registered;
    for (std::size_t i = 0; i < constituents.size(); ++i) {
        const ReparamField identity = ReparamField::identity(constituents[i].meta());
        if (i == ref || !cfg.register_constituents) {
            SampledSurface s = i == ref ? reference : SampledSurface::from(constituents[i]);
            registered.push_back(detail::make_constituent(std::move(s), identity, origin));
            continue;
        }
        std::optional<ReparamField> warm;
        if (i < initial.size()) {
            warm = initial[i];
        }
        RegistrationResult rr = register_surfaces(reference, constituents[i], rc, origin, warm);
        RegisteredConstituent c =
            detail::make_constituent(std::move(rr.moving_resampled), std::move(rr.warp), origin);
        c.status = rr.status;
        c.iterations = rr.iterations;
        registered.push_back(std::move(c));
    }
    return assemble_mean(std::move(registered), origin);
}

/// Origin shift that minimises the system energy for fixed warps:
///   dD = sum_i int (Q_i - Qbar) sqrt|N_i|  /  sum_i int (sqrt|N_i| - sqrt|Nbar|)^2
/// with sqrt|Nbar| the average density. A denominator below `denom_floor`
/// (all metrics equal, energy independent of the origin) gives zero.
inline Vec3 proper_centroid(const std::vector<RegisteredConstituent>& constituents, const RepField& mean_field,
                            const ScalarField& mean_density, double denom_floor)
{
    const GridMeta& m = mean_field.meta();
    VectorField num(m);
    ScalarField den(m);
    for (const auto& c : constituents) {
        require_same_shape(m, c.field.meta(), "proper_centroid");
        for (std::size_t k = 0; k < m.size(); ++k) {
            num[k] += (c.field.values[k] - mean_field.values[k]) * c.density[k];
            const double dd = c.density[k] - mean_density[k];
            den[k] += dd * dd;
        }
    }
    const double denominator = integrate(den);
    if (!(denominator >= denom_floor) || denominator == 0.0) {
        return Vec3::Zero();
    }
    return integrate(num) / denominator;
}

/// Per-constituent translation that best aligns it with the mean field:
///   dD_i = int (Q_i - Qbar) sqrt|N_i|  /  int |N_i|.
inline std::vector<Vec3> remove_translations(const std::vector<RegisteredConstituent>& constituents,
                                             const RepField& mean_field, double denom_floor)
{
    const GridMeta& m = mean_field.meta();
    std::vector<Vec3> shifts;
    for (std::size_t i = 0; i < constituents.size(); ++i) {
        const auto& c = constituents[i];
        require_same_shape(m, c.field.meta(), "remove_translations");
        VectorField num(m);
        ScalarField area(m);
        for (std::size_t k = 0; k < m.size(); ++k) {
            num[k] = (c.field.values[k] - mean_field.values[k]) * c.density[k];
            area[k] = c.density[k] * c.density[k];
        }
        const double a = integrate(area);
        if (!(a >= denom_floor) || a == 0.0) {
            throw Error(ErrorCode::degenerate_area,
                        "constituent " + std::to_string(i) + " has area " + std::to_string(a));
        }
        shifts.push_back(integrate(num) / a);
    }
    return shifts;
}

/// Alternate registration and origin (plus optional translation) updates.
///
/// Each outer iteration computes dD and, if enabled, every dD_i from the
/// current registered fields, moves the origin and the constituents, and
/// re-registers with warm starts. The update is kept only if the system
/// energy does not rise; otherwise the shift is retried with the warps held
/// fixed, where it cannot raise the energy. If that also fails the loop
/// stops unconverged. Converged means every shift fell below centroid_tol.
inline MeanResult mean_pipeline(const std::vector<SurfaceGrid>& constituents, const MeanConfig& cfg)
{
    detail::check_constituents(constituents, cfg);
    const double scale = detail::mean_scale(constituents);
    const double tol = cfg.centroid_tol > 0.0 ? cfg.centroid_tol : 1e-8 * scale;
    const double floor = cfg.denom_floor > 0.0 ? cfg.denom_floor : 1e-12 * scale * scale;

    std::vector<SurfaceGrid> shapes = constituents;
    std::vector<Vec3> removed(shapes.size(), Vec3::Zero());
    Vec3 origin = Vec3::Zero();
    MeanResult state = mean_rpsn(shapes, cfg, origin);
    std::vector<double> trace = {state.energy};

    bool converged = false;
    int outer = 0;
    while (outer < cfg.outer_iters) {
        ++outer;
        const Vec3 dD = proper_centroid(state.constituents, state.mean_field, state.mean_density, floor);
        std::vector<Vec3> dDi(shapes.size(), Vec3::Zero());
        if (cfg.remove_translations) {
            dDi = remove_translations(state.constituents, state.mean_field, floor);
        }
        double largest = dD.norm();
        for (const Vec3& d : dDi) {
            largest = std::max(largest, d.norm());
        }
        if (largest < tol) {
            converged = true;
            break;
        }

        const Vec3 next_origin = origin + dD;
        std::vector<SurfaceGrid> next_shapes;
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            next_shapes.push_back(shapes[i].translated(-dDi[i]));
        }
        MeanResult candidate = mean_rpsn(next_shapes, cfg, next_origin, state.warps());
        if (!(candidate.energy <= state.energy)) {
            std::vector<RegisteredConstituent> fixed;
            for (std::size_t i = 0; i < shapes.size(); ++i) {
                const auto& c = state.constituents[i];
                SampledSurface moved{c.surface.grid.translated(-dDi[i]), c.surface.cache};
                RegisteredConstituent f = detail::make_constituent(std::move(moved), c.warp, next_origin);
                f.status = c.status;
                f.iterations = c.iterations;
                fixed.push_back(std::move(f));
            }
            candidate = assemble_mean(std::move(fixed), next_origin);
            if (!(candidate.energy <= state.energy)) {
                break;
            }
        }
        origin = next_origin;
        shapes = std::move(next_shapes);
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            removed[i] += dDi[i];
        }
        state = std::move(candidate);
        trace.push_back(state.energy);
    }

    state.trace = std::move(trace);
    state.outer_iterations = outer;
    state.converged = converged;
    state.centroid_shift = origin;
    state.translation_shifts = removed;
    return state;
}

} // namespace surfmean
