#pragma once

#include "surfmean/field.hpp"

namespace surfmean {

namespace detail {

struct Line {
    std::size_t start;
    std::size_t stride;
    int count;
};

template <class F>
void for_each_line(const GridMeta& m, Axis axis, F&& fn)
{
    if (axis == Axis::u) {
        for (int j = 0; j < m.nv; ++j) {
            fn(Line{m.index(0, j), 1, m.nu});
        }
    } else {
        for (int i = 0; i < m.nu; ++i) {
            fn(Line{m.index(i, 0), static_cast<std::size_t>(m.nu), m.nv});
        }
    }
}

inline int wrap_index(int k, int n)
{
    k %= n;
    return k < 0 ? k + n : k;
}

} // namespace detail

/// Partial derivative along one axis. Periodic axes use the fourth-order
/// central stencil; clamped axes use second-order central differences inside
/// and second-order one-sided differences on the two boundary nodes.
template <class T>
Field<T> differentiate(const Field<T>& f, Axis axis)
{
    const GridMeta& m = f.meta();
    const AxisMode mode = m.topology.mode(axis);
    const double h = m.spacing(axis);
    Field<T> out(m);
    detail::for_each_line(m, axis, [&](const detail::Line& line) {
        const int n = line.count;
        auto at = [&](int k) -> const T& { return f[line.start + static_cast<std::size_t>(k) * line.stride]; };
        auto put = [&](int k) -> T& { return out[line.start + static_cast<std::size_t>(k) * line.stride]; };
        if (mode == AxisMode::periodic) {
            const double c = 1.0 / (12.0 * h);
            for (int k = 0; k < n; ++k) {
                const int km2 = detail::wrap_index(k - 2, n);
                const int km1 = detail::wrap_index(k - 1, n);
                const int kp1 = detail::wrap_index(k + 1, n);
                const int kp2 = detail::wrap_index(k + 2, n);
                put(k) = c * (at(km2) - 8.0 * at(km1) + 8.0 * at(kp1) - at(kp2));
            }
        } else {
            const double c = 1.0 / (2.0 * h);
            put(0) = c * (-3.0 * at(0) + 4.0 * at(1) - at(2));
            for (int k = 1; k < n - 1; ++k) {
                put(k) = c * (at(k + 1) - at(k - 1));
            }
            put(n - 1) = c * (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3));
        }
    });
    return out;
}

/// Derivative that only reads nodes flagged in `valid`. Each node falls back
/// from the standard stencil to narrower central, one-sided second-order and
/// finally first-order differences when a neighbour is masked or missing.
/// Invalid nodes, and valid nodes without any usable neighbour, get zero.
/// On an all-valid mask this agrees with differentiate() up to rounding.
template <class T>
Field<T> differentiate_masked(const Field<T>& f, const Mask& valid, Axis axis)
{
    const GridMeta& m = f.meta();
    const AxisMode mode = m.topology.mode(axis);
    const double h = m.spacing(axis);
    Field<T> out(m);
    detail::for_each_line(m, axis, [&](const detail::Line& line) {
        const int n = line.count;
        auto offset = [&](int k) { return line.start + static_cast<std::size_t>(k) * line.stride; };
        auto usable = [&](int k, int d, int& idx) {
            int t = k + d;
            if (mode == AxisMode::periodic) {
                t = detail::wrap_index(t, n);
            } else if (t < 0 || t >= n) {
                return false;
            }
            idx = t;
            return valid[offset(t)] != 0;
        };
        for (int k = 0; k < n; ++k) {
            if (!valid[offset(k)]) {
                continue;
            }
            const T& f0 = f[offset(k)];
            int m2 = 0, m1 = 0, p1 = 0, p2 = 0;
            const bool hm1 = usable(k, -1, m1);
            const bool hp1 = usable(k, 1, p1);
            const bool hm2 = usable(k, -2, m2);
            const bool hp2 = usable(k, 2, p2);
            T& d = out[offset(k)];
            if (mode == AxisMode::periodic && hm1 && hp1 && hm2 && hp2) {
                d = (f[offset(m2)] - 8.0 * f[offset(m1)] + 8.0 * f[offset(p1)] - f[offset(p2)]) / (12.0 * h);
            } else if (hm1 && hp1) {
                d = (f[offset(p1)] - f[offset(m1)]) / (2.0 * h);
            } else if (hp1 && hp2) {
                d = (-3.0 * f0 + 4.0 * f[offset(p1)] - f[offset(p2)]) / (2.0 * h);
            } else if (hm1 && hm2) {
                d = (3.0 * f0 - 4.0 * f[offset(m1)] + f[offset(m2)]) / (2.0 * h);
            } else if (hp1) {
                d = (f[offset(p1)] - f0) / h;
            } else if (hm1) {
                d = (f0 - f[offset(m1)]) / h;
            }
        }
    });
    return out;
}

} // namespace surfmean
