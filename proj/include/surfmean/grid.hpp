#pragma once

#include "surfmean/field.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <limits>

namespace surfmean {

inline constexpr int kMinNodesPerAxis = 8;

inline void validate_meta(const GridMeta& meta)
{
    if (meta.nu < kMinNodesPerAxis || meta.nv < kMinNodesPerAxis) {
        throw Error(ErrorCode::invalid_grid, "grid needs at least " + std::to_string(kMinNodesPerAxis) +
                                                 " nodes per axis, got " + std::to_string(meta.nu) + "x" +
                                                 std::to_string(meta.nv));
    }
}

/// A parametric surface S(u, v) sampled on the unit square. Node (i, j)
/// samples (i * hu, j * hv).
class SurfaceGrid {
public:
    SurfaceGrid() = default;

    explicit SurfaceGrid(VectorField positions) : positions_(std::move(positions))
    {
        validate_meta(positions_.meta());
        for (const Vec3& p : positions_) {
            if (!p.allFinite()) {
                throw Error(ErrorCode::invalid_grid, "non-finite node position");
            }
        }
    }

    SurfaceGrid(const GridMeta& meta, std::vector<Vec3> positions)
        : SurfaceGrid(VectorField(meta, std::move(positions)))
    {}

    const GridMeta& meta() const { return positions_.meta(); }
    int nu() const { return meta().nu; }
    int nv() const { return meta().nv; }
    const GridTopology& topology() const { return meta().topology; }

    const VectorField& positions() const { return positions_; }
    const Vec3& operator()(int i, int j) const { return positions_(i, j); }
    const Vec3& operator[](std::size_t k) const { return positions_[k]; }

    Eigen::Vector2d parameter(int i, int j) const { return {i * meta().hu(), j * meta().hv()}; }

    Eigen::AlignedBox3d bounding_box() const
    {
        Eigen::AlignedBox3d box;
        for (const Vec3& p : positions_) {
            box.extend(p);
        }
        return box;
    }

    double bbox_diagonal() const { return bounding_box().diagonal().norm(); }

    /// Copy with every node moved by `d`.
    SurfaceGrid translated(const Vec3& d) const
    {
        VectorField moved = positions_;
        for (Vec3& p : moved) {
            p += d;
        }
        return SurfaceGrid(std::move(moved));
    }

private:
    VectorField positions_;
};

} // namespace surfmean
