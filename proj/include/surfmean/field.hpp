#pragma once

#include "surfmean/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

namespace surfmean {

using Vec3 = Eigen::Vector3d;

enum class AxisMode { periodic, clamped };
enum class Axis { u, v };

/// Boundary behaviour of the two parameter axes. Periodic axes identify
/// parameter 1 with 0; clamped axes carry nodes on both endpoints.
struct GridTopology {
    AxisMode u_mode = AxisMode::periodic;
    AxisMode v_mode = AxisMode::periodic;

    AxisMode mode(Axis axis) const { return axis == Axis::u ? u_mode : v_mode; }
    friend bool operator==(const GridTopology&, const GridTopology&) = default;
};

inline double axis_spacing(int n, AxisMode mode)
{
    return mode == AxisMode::periodic ? 1.0 / n : 1.0 / (n - 1);
}

/// Shape of a node grid over the unit parameter square. Storage is row-major
/// with v as the slow index: node (i, j) lives at j * nu + i.
struct GridMeta {
    int nu = 0;
    int nv = 0;
    GridTopology topology;

    double hu() const { return axis_spacing(nu, topology.u_mode); }
    double hv() const { return axis_spacing(nv, topology.v_mode); }
    double spacing(Axis axis) const { return axis == Axis::u ? hu() : hv(); }
    int count(Axis axis) const { return axis == Axis::u ? nu : nv; }
    std::size_t size() const { return static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nu + i; }

    friend bool operator==(const GridMeta&, const GridMeta&) = default;
};

inline void require_same_shape(const GridMeta& a, const GridMeta& b, const char* where)
{
    if (!(a == b)) {
        throw Error(ErrorCode::shape_mismatch,
                    std::string(where) + ": grids differ (" + std::to_string(a.nu) + "x" +
                        std::to_string(a.nv) + " vs " + std::to_string(b.nu) + "x" +
                        std::to_string(b.nv) + " or topology)");
    }
}

template <class T>
T zero_value()
{
    if constexpr (std::is_arithmetic_v<T>) {
        return T(0);
    } else {
        return T::Zero();
    }
}

/// Node-wise values of type T on a parameter grid.
template <class T>
class Field {
public:
    Field() = default;
    explicit Field(const GridMeta& meta) : meta_(meta), data_(meta.size(), zero_value<T>()) {}
    Field(const GridMeta& meta, const T& fill) : meta_(meta), data_(meta.size(), fill) {}
    Field(const GridMeta& meta, std::vector<T> data) : meta_(meta), data_(std::move(data))
    {
        if (data_.size() != meta_.size()) {
            throw Error(ErrorCode::shape_mismatch, "field data size does not match grid");
        }
    }

    const GridMeta& meta() const { return meta_; }
    std::size_t size() const { return data_.size(); }

    T& operator()(int i, int j) { return data_[meta_.index(i, j)]; }
    const T& operator()(int i, int j) const { return data_[meta_.index(i, j)]; }
    T& operator[](std::size_t k) { return data_[k]; }
    const T& operator[](std::size_t k) const { return data_[k]; }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    const std::vector<T>& data() const { return data_; }

private:
    GridMeta meta_;
    std::vector<T> data_;
};

using ScalarField = Field<double>;
using VectorField = Field<Vec3>;
using Mask = Field<std::uint8_t>;

/// Per-axis quadrature weights (spacing included). Periodic axes use the
/// uniform rule; clamped axes use the end-corrected trapezoid rule that is
/// exact for cubics.
inline std::vector<double> axis_weights(int n, AxisMode mode)
{
    const double h = axis_spacing(n, mode);
    std::vector<double> w(static_cast<std::size_t>(n), h);
    if (mode == AxisMode::clamped) {
        const double ends[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
        for (int k = 0; k < 3; ++k) {
            w[static_cast<std::size_t>(k)] = ends[k] * h;
            w[static_cast<std::size_t>(n - 1 - k)] = ends[k] * h;
        }
    }
    return w;
}

/// Weighted sum over the grid in storage order (v outer, u inner).
template <class T>
T integrate(const Field<T>& f)
{
    const GridMeta& m = f.meta();
    const auto wu = axis_weights(m.nu, m.topology.u_mode);
    const auto wv = axis_weights(m.nv, m.topology.v_mode);
    T total = zero_value<T>();
    for (int j = 0; j < m.nv; ++j) {
        T row = zero_value<T>();
        for (int i = 0; i < m.nu; ++i) {
            row += wu[static_cast<std::size_t>(i)] * f(i, j);
        }
        total += wv[static_cast<std::size_t>(j)] * row;
    }
    return total;
}

/// Same as integrate(), restricted to nodes where `mask` is set.
template <class T>
T integrate(const Field<T>& f, const Mask& mask)
{
    const GridMeta& m = f.meta();
    const auto wu = axis_weights(m.nu, m.topology.u_mode);
    const auto wv = axis_weights(m.nv, m.topology.v_mode);
    T total = zero_value<T>();
    for (int j = 0; j < m.nv; ++j) {
        T row = zero_value<T>();
        for (int i = 0; i < m.nu; ++i) {
            if (mask(i, j)) {
                row += wu[static_cast<std::size_t>(i)] * f(i, j);
            }
        }
        total += wv[static_cast<std::size_t>(j)] * row;
    }
    return total;
}

} // namespace surfmean
