#pragma once

#include "surfmean/reparam.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>
#include <vector>

namespace surfmean {

struct RegistrationConfig {
    RepKind representation = RepKind::rpsn;
    /// Initial step; 0 selects 0.1 / max|search direction| at the first iteration.
    double step0 = 0.0;
    double backtrack = 0.5;
    /// Step multiplier after a step accepted without backtracking.
    double growth = 2.0;
    int max_iters = 500;
    /// Stop once an accepted step lowers the energy by less than this fraction.
    double energy_rtol = 1e-8;
    /// Stop when the energy falls below this fraction of the summed squared
    /// norms of both representations.
    double energy_floor = 1e-20;
    double det_floor = kDefaultDetFloor;
    /// Half-width (nodes) of the binomial smoothing applied to the gradient; 0 disables.
    int smoothing = 1;
    /// Length scale squared of the H1 preconditioner (I - lambda Laplacian)^-1
    /// applied after smoothing; 0 disables.
    double sobolev_lambda = 0.01;
};

enum class RegistrationStatus { converged, max_iters, stalled };

inline const char* to_string(RegistrationStatus s)
{
    switch (s) {
    case RegistrationStatus::converged: return "converged";
    case RegistrationStatus::max_iters: return "max_iters";
    case RegistrationStatus::stalled: return "stalled";
    }
    return "?";
}

struct RegistrationResult {
    ReparamField warp;
    SampledSurface moving_resampled;
    std::vector<double> energy_trace;
    std::vector<double> min_det_trace;
    bool converged = false;
    RegistrationStatus status = RegistrationStatus::max_iters;
    int iterations = 0;

    double initial_energy() const { return energy_trace.front(); }
    double final_energy() const { return energy_trace.back(); }
};

/// Binomial smoothing of half-width `radius` along both axes. Periodic axes
/// wrap; clamped axes renormalise the truncated kernel.
inline ScalarField smooth(const ScalarField& f, int radius)
{
    if (radius <= 0) {
        return f;
    }
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1), 1.0);
    for (int k = 1; k <= 2 * radius; ++k) {
        // binomial coefficients C(2r, k)
        kernel[static_cast<std::size_t>(k)] =
            kernel[static_cast<std::size_t>(k - 1)] * (2 * radius - k + 1) / k;
    }
    auto pass = [&](const ScalarField& in, Axis axis) {
        const GridMeta& m = in.meta();
        const AxisMode mode = m.topology.mode(axis);
        ScalarField out(m);
        detail::for_each_line(m, axis, [&](const detail::Line& line) {
            const int n = line.count;
            for (int k = 0; k < n; ++k) {
                double acc = 0.0, wsum = 0.0;
                for (int d = -radius; d <= radius; ++d) {
                    int t = k + d;
                    if (mode == AxisMode::periodic) {
                        t = detail::wrap_index(t, n);
                    } else if (t < 0 || t >= n) {
                        continue;
                    }
                    const double w = kernel[static_cast<std::size_t>(d + radius)];
                    acc += w * in[line.start + static_cast<std::size_t>(t) * line.stride];
                    wsum += w;
                }
                out[line.start + static_cast<std::size_t>(k) * line.stride] = acc / wsum;
            }
        });
        return out;
    };
    return pass(pass(f, Axis::u), Axis::v);
}

/// Zero a field on every node of a clamped boundary row or column.
inline void pin_clamped_boundary(ScalarField& f)
{
    const GridMeta& m = f.meta();
    if (m.topology.u_mode == AxisMode::clamped) {
        for (int j = 0; j < m.nv; ++j) {
            f(0, j) = 0.0;
            f(m.nu - 1, j) = 0.0;
        }
    }
    if (m.topology.v_mode == AxisMode::clamped) {
        for (int i = 0; i < m.nu; ++i) {
            f(i, 0) = 0.0;
            f(i, m.nv - 1) = 0.0;
        }
    }
}

/// Factored (I - lambda Laplacian) on the parameter grid: 5-point Laplacian,
/// wrapped on periodic axes, zero Dirichlet data beyond clamped boundaries.
class SobolevSolver {
public:
    SobolevSolver(const GridMeta& m, double lambda) : meta_(m)
    {
        const double cu = lambda / (m.hu() * m.hu());
        const double cv = lambda / (m.hv() * m.hv());
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(m.size() * 5);
        for (int j = 0; j < m.nv; ++j) {
            for (int i = 0; i < m.nu; ++i) {
                const auto row = static_cast<int>(m.index(i, j));
                t.emplace_back(row, row, 1.0 + 2.0 * cu + 2.0 * cv);
                auto link = [&](int a, int b, AxisMode mode, int n, bool along_u, double c) {
                    int k = along_u ? a : b;
                    if (mode == AxisMode::periodic) {
                        k = detail::wrap_index(k, n);
                    } else if (k < 0 || k >= n) {
                        return;
                    }
                    const int col = static_cast<int>(along_u ? m.index(k, b) : m.index(a, k));
                    t.emplace_back(row, col, -c);
                };
                link(i - 1, j, m.topology.u_mode, m.nu, true, cu);
                link(i + 1, j, m.topology.u_mode, m.nu, true, cu);
                link(i, j - 1, m.topology.v_mode, m.nv, false, cv);
                link(i, j + 1, m.topology.v_mode, m.nv, false, cv);
            }
        }
        Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.size()));
        A.setFromTriplets(t.begin(), t.end());
        ldlt_.compute(A);
    }

    ScalarField solve(const ScalarField& rhs) const
    {
        const Eigen::Map<const Eigen::VectorXd> b(rhs.data().data(), static_cast<Eigen::Index>(rhs.size()));
        const Eigen::VectorXd x = ldlt_.solve(b);
        return ScalarField(meta_, std::vector<double>(x.data(), x.data() + x.size()));
    }

private:
    GridMeta meta_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Find the warp (mu, nu) that best aligns `moving` to `reference` in the
/// chosen representation, by gradient descent on the Euler-Lagrange gradient.
///
/// Each iteration resamples the moving surface through the current warp,
/// rebuilds its geometry, evaluates el_gradient(), smooths and preconditions
/// it, and takes a backtracking step that is accepted only if the energy
/// decreases and the warp Jacobian stays above the determinant floor.
/// Clamped boundaries are pinned. If no step down to 1e-14 * step0 is
/// acceptable the run ends with status `stalled` and the best warp so far.
inline RegistrationResult register_surfaces(const SampledSurface& reference, const SurfaceGrid& moving,
                                            const RegistrationConfig& cfg, const Vec3& origin = Vec3::Zero(),
                                            const std::optional<ReparamField>& initial = std::nullopt)
{
    const GridMeta& m = reference.grid.meta();
    require_same_shape(m, moving.meta(), "register_surfaces");
    const RepKind kind = cfg.representation;
    const double eps_N = default_eps_N(moving);
    const RepField ref_rep = representation(kind, reference, origin);
    const double ref_norm = norm_sq(ref_rep);

    RegistrationResult res;
    res.warp = initial ? *initial : ReparamField::identity(m);
    require_same_shape(m, res.warp.meta(), "register_surfaces initial warp");
    res.moving_resampled = SampledSurface::from(resample(moving, res.warp), eps_N);

    auto evaluate = [&](const SampledSurface& s) {
        const RepField rep = representation(kind, s, origin);
        return std::pair{distance_sq(ref_rep, rep), norm_sq(rep)};
    };

    auto [E, mov_norm] = evaluate(res.moving_resampled);
    res.energy_trace.push_back(E);
    res.min_det_trace.push_back(jacobian(res.warp, cfg.det_floor).min_det());

    std::unique_ptr<SobolevSolver> sobolev;
    if (cfg.sobolev_lambda > 0.0) {
        sobolev = std::make_unique<SobolevSolver>(m, cfg.sobolev_lambda);
    }

    double step = cfg.step0;
    double step_initial = cfg.step0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        if (E <= cfg.energy_floor * (ref_norm + mov_norm)) {
            res.converged = true;
            res.status = RegistrationStatus::converged;
            return res;
        }
        const ELGradient g = el_gradient(reference, res.moving_resampled, res.warp, kind, origin, cfg.det_floor);
        ScalarField dmu = smooth(g.grad_mu, cfg.smoothing);
        ScalarField dnu = smooth(g.grad_nu, cfg.smoothing);
        if (sobolev) {
            dmu = sobolev->solve(dmu);
            dnu = sobolev->solve(dnu);
        }
        pin_clamped_boundary(dmu);
        pin_clamped_boundary(dnu);

        if (step_initial <= 0.0) {
            double peak = 0.0;
            for (std::size_t k = 0; k < dmu.size(); ++k) {
                peak = std::max(peak, std::hypot(dmu[k], dnu[k]));
            }
            if (peak == 0.0) {
                res.converged = true;
                res.status = RegistrationStatus::converged;
                return res;
            }
            step_initial = 0.1 / peak;
            step = step_initial;
        }

        bool accepted = false;
        bool first_try = true;
        while (step >= 1e-14 * step_initial) {
            const ReparamField trial = res.warp.stepped(dmu, dnu, step);
            const double min_det = jacobian(trial, cfg.det_floor).min_det();
            if (min_det > cfg.det_floor) {
                try {
                    SampledSurface s = SampledSurface::from(resample(moving, trial), eps_N);
                    const auto [E_new, n_new] = evaluate(s);
                    if (E_new < E) {
                        const double drop = (E - E_new) / E;
                        res.warp = trial;
                        res.moving_resampled = std::move(s);
                        E = E_new;
                        mov_norm = n_new;
                        res.energy_trace.push_back(E);
                        res.min_det_trace.push_back(min_det);
                        res.iterations = it + 1;
                        accepted = true;
                        if (first_try) {
                            step *= cfg.growth;
                        }
                        if (drop < cfg.energy_rtol) {
                            res.converged = true;
                            res.status = RegistrationStatus::converged;
                            return res;
                        }
                        break;
                    }
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::all_degenerate) {
                        throw;
                    }
                }
            }
            step *= cfg.backtrack;
            first_try = false;
        }
        if (!accepted) {
            res.status = RegistrationStatus::stalled;
            return res;
        }
    }
    res.status = RegistrationStatus::max_iters;
    return res;
}

inline RegistrationResult register_surfaces(const SurfaceGrid& reference, const SurfaceGrid& moving,
                                            const RegistrationConfig& cfg, const Vec3& origin = Vec3::Zero())
{
    return register_surfaces(SampledSurface::from(reference), moving, cfg, origin);
}

} // namespace surfmean
