#pragma once

#include "surfmean/field.hpp"

#include <algorithm>
#include <cmath>

namespace surfmean {

/// Wrap a parameter into [0, 1) on periodic axes, clamp into [0, 1] otherwise.
inline double fold_parameter(double x, AxisMode mode)
{
    if (mode == AxisMode::periodic) {
        double r = x - std::floor(x);
        return r >= 1.0 ? 0.0 : r;
    }
    return std::clamp(x, 0.0, 1.0);
}

/// Signed shortest offset between two parameters on an axis.
inline double parameter_offset(double to, double from, AxisMode mode)
{
    double d = to - from;
    if (mode == AxisMode::periodic) {
        d -= std::round(d);
    }
    return d;
}

/// An element (mu(u, v), nu(u, v)) of the reparameterization group sampled on
/// the node grid. Values are folded into the domain (see fold_parameter()).
class ReparamField {
public:
    ReparamField() = default;

    explicit ReparamField(const GridMeta& meta) : mu_(meta), nu_(meta) {}

    ReparamField(ScalarField mu, ScalarField nu) : mu_(std::move(mu)), nu_(std::move(nu))
    {
        require_same_shape(mu_.meta(), nu_.meta(), "ReparamField");
        for (std::size_t k = 0; k < mu_.size(); ++k) {
            if (!std::isfinite(mu_[k]) || !std::isfinite(nu_[k])) {
                throw Error(ErrorCode::invalid_grid, "non-finite warp value");
            }
            mu_[k] = fold_parameter(mu_[k], meta().topology.u_mode);
            nu_[k] = fold_parameter(nu_[k], meta().topology.v_mode);
        }
    }

    static ReparamField identity(const GridMeta& meta)
    {
        ReparamField w(meta);
        for (int j = 0; j < meta.nv; ++j) {
            for (int i = 0; i < meta.nu; ++i) {
                w.mu_(i, j) = i * meta.hu();
                w.nu_(i, j) = j * meta.hv();
            }
        }
        return w;
    }

    /// Identity plus a displacement field given per component.
    static ReparamField from_displacement(const ScalarField& dmu, const ScalarField& dnu)
    {
        const GridMeta& m = dmu.meta();
        require_same_shape(m, dnu.meta(), "ReparamField::from_displacement");
        ScalarField mu(m), nu(m);
        for (int j = 0; j < m.nv; ++j) {
            for (int i = 0; i < m.nu; ++i) {
                mu(i, j) = i * m.hu() + dmu(i, j);
                nu(i, j) = j * m.hv() + dnu(i, j);
            }
        }
        return ReparamField(std::move(mu), std::move(nu));
    }

    const GridMeta& meta() const { return mu_.meta(); }
    const ScalarField& mu() const { return mu_; }
    const ScalarField& nu() const { return nu_; }

    /// mu - u and nu - v, unwrapped on periodic axes.
    std::pair<ScalarField, ScalarField> displacement() const
    {
        const GridMeta& m = meta();
        ScalarField dmu(m), dnu(m);
        for (int j = 0; j < m.nv; ++j) {
            for (int i = 0; i < m.nu; ++i) {
                dmu(i, j) = parameter_offset(mu_(i, j), i * m.hu(), m.topology.u_mode);
                dnu(i, j) = parameter_offset(nu_(i, j), j * m.hv(), m.topology.v_mode);
            }
        }
        return {std::move(dmu), std::move(dnu)};
    }

    /// Warp moved by `-step * (dmu, dnu)`, refolded into the domain.
    ReparamField stepped(const ScalarField& dmu, const ScalarField& dnu, double step) const
    {
        ScalarField mu = mu_, nu = nu_;
        for (std::size_t k = 0; k < mu.size(); ++k) {
            mu[k] -= step * dmu[k];
            nu[k] -= step * dnu[k];
        }
        return ReparamField(std::move(mu), std::move(nu));
    }

    /// Largest node-wise parameter distance to another warp (periodic-aware).
    double max_distance(const ReparamField& other) const
    {
        require_same_shape(meta(), other.meta(), "ReparamField::max_distance");
        double worst = 0.0;
        for (std::size_t k = 0; k < mu_.size(); ++k) {
            worst = std::max(worst, std::abs(parameter_offset(mu_[k], other.mu_[k], meta().topology.u_mode)));
            worst = std::max(worst, std::abs(parameter_offset(nu_[k], other.nu_[k], meta().topology.v_mode)));
        }
        return worst;
    }

private:
    ScalarField mu_;
    ScalarField nu_;
};

} // namespace surfmean
