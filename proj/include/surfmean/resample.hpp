#pragma once

#include "surfmean/grid.hpp"
#include "surfmean/stencil.hpp"
#include "surfmean/warp.hpp"

#include <array>

namespace surfmean {

/// Tensor-product cubic Hermite interpolant of a node field.
///
/// Node tangents come from the same axis stencils as differentiate(), so on
/// clamped axes this is Catmull-Rom (with one-sided end tangents) and on
/// periodic axes the tangents are fourth-order. The interpolant reproduces
/// node values, is exact on affine data, and its derivative at a node equals
/// the stencil derivative there.
template <class T>
class BicubicHermite {
public:
    explicit BicubicHermite(const Field<T>& values)
        : f_(values), fu_(differentiate(values, Axis::u)), fv_(differentiate(values, Axis::v)),
          fuv_(differentiate(fv_, Axis::u))
    {}

    const GridMeta& meta() const { return f_.meta(); }

    T operator()(double mu, double nu) const
    {
        const GridMeta& m = meta();
        const Cell cu = locate(mu, m.nu, m.topology.u_mode);
        const Cell cv = locate(nu, m.nv, m.topology.v_mode);
        const auto bu = basis(cu.t);
        const auto bv = basis(cv.t);
        const double hu = m.hu();
        const double hv = m.hv();

        T out = zero_value<T>();
        for (int b = 0; b < 2; ++b) {
            const int j = b == 0 ? cv.i0 : cv.i1;
            const double pv = bv[b];          // value weight along v
            const double tv = bv[2 + b] * hv; // tangent weight along v
            for (int a = 0; a < 2; ++a) {
                const int i = a == 0 ? cu.i0 : cu.i1;
                const double pu = bu[a];
                const double tu = bu[2 + a] * hu;
                const std::size_t k = m.index(i, j);
                out += (pu * pv) * f_[k] + (tu * pv) * fu_[k] + (pu * tv) * fv_[k] + (tu * tv) * fuv_[k];
            }
        }
        return out;
    }

private:
    struct Cell {
        int i0;
        int i1;
        double t;
    };

    static Cell locate(double x, int n, AxisMode mode)
    {
        const double h = axis_spacing(n, mode);
        if (mode == AxisMode::periodic) {
            double s = (x - std::floor(x)) / h;
            int i = static_cast<int>(std::floor(s));
            double t = s - i;
            i = detail::wrap_index(i, n);
            return {i, detail::wrap_index(i + 1, n), t};
        }
        const double s = std::clamp(x, 0.0, 1.0) / h;
        const int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
        return {i, i + 1, s - i};
    }

    // {h00, h01, h10, h11}: value weights at both ends, then tangent weights.
    static std::array<double, 4> basis(double t)
    {
        const double t2 = t * t;
        const double t3 = t2 * t;
        return {2 * t3 - 3 * t2 + 1, -2 * t3 + 3 * t2, t3 - 2 * t2 + t, t3 - t2};
    }

    Field<T> f_;
    Field<T> fu_;
    Field<T> fv_;
    Field<T> fuv_;
};

/// Interpolate an arbitrary node field at the warp's sample points.
template <class T>
Field<T> resample_field(const Field<T>& values, const ReparamField& warp)
{
    require_same_shape(values.meta(), warp.meta(), "resample_field");
    const BicubicHermite<T> interp(values);
    Field<T> out(values.meta());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = interp(warp.mu()[k], warp.nu()[k]);
    }
    return out;
}

/// S(u, v) <- S(mu(u, v), nu(u, v)) on the same grid shape and topology.
inline SurfaceGrid resample(const SurfaceGrid& grid, const ReparamField& warp)
{
    return SurfaceGrid(resample_field(grid.positions(), warp));
}

} // namespace surfmean
