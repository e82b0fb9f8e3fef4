#pragma once

#include "ptycho/field.hpp"

#include <vector>

namespace ptycho {

struct ScanPosition {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const ScanPosition&) const = default;
};

/// The J window extractors S_j: top-left corners of square frames inside the object.
class ScanGeometry {
public:
    ScanGeometry() = default;
    /// Throws std::invalid_argument if any window leaves the object or J == 0.
    ScanGeometry(std::vector<ScanPosition> positions, std::size_t frame_side, Shape object_shape);

    std::size_t num_frames() const { return positions_.size(); }
    std::size_t frame_side() const { return frame_side_; }
    Shape frame_shape() const { return {frame_side_, frame_side_}; }
    Shape object_shape() const { return object_shape_; }
    const std::vector<ScanPosition>& positions() const { return positions_; }
    const ScanPosition& position(std::size_t j) const;

    /// Number of windows covering each object pixel.
    RealField2D coverage() const;
    bool covers_object() const;

    bool operator==(const ScanGeometry&) const = default;

private:
    std::vector<ScanPosition> positions_;
    std::size_t frame_side_ = 0;
    Shape object_shape_{};
};

/// Raster grid {0, step, 2*step, ...} per axis, truncated so windows fit; row-major order.
/// If the truncated grid stops short of the far edge, one edge-aligned position
/// (object side - frame side) is appended on that axis so every pixel is covered.
ScanGeometry raster_scan(Shape object_shape, std::size_t frame_side, std::size_t step);

/// S_j u: the frame_side x frame_side patch at positions[j].
template <typename T>
Field2D<T> extract(const Field2D<T>& u, const ScanGeometry& g, std::size_t j)
{
    if (u.shape() != g.object_shape())
        throw ShapeError("extract: object shape " + to_string(u.shape()) + " does not match geometry " +
                         to_string(g.object_shape()));
    const auto& p = g.position(j);
    const std::size_t n = g.frame_side();
    Field2D<T> out(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const T* src = &u(p.row + r, p.col);
        std::copy(src, src + n, &out(r, 0));
    }
    return out;
}

/// target += S_j^T v.
template <typename T>
void embed_accumulate(const Field2D<T>& v, const ScanGeometry& g, std::size_t j, Field2D<T>& target)
{
    if (v.shape() != g.frame_shape())
        throw ShapeError("embed_accumulate: patch shape " + to_string(v.shape()) + " expected " +
                         to_string(g.frame_shape()));
    if (target.shape() != g.object_shape())
        throw ShapeError("embed_accumulate: target shape " + to_string(target.shape()) + " expected " +
                         to_string(g.object_shape()));
    const auto& p = g.position(j);
    const std::size_t n = g.frame_side();
    for (std::size_t r = 0; r < n; ++r) {
        T* dst = &target(p.row + r, p.col);
        const T* src = &v(r, 0);
        for (std::size_t c = 0; c < n; ++c) dst[c] += src[c];
    }
}

}  // namespace ptycho
